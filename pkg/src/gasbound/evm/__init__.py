from gasbound.evm.opcodes import Opcode, OPCODES, BY_NAME, INVALID, opcode_for
from gasbound.evm.disasm import Instruction, TruncatedPush, disassemble, encode
from gasbound.evm.schedule import (
    GasFamily,
    GasSchedule,
    NAMED_FAMILIES,
    family_of,
    load_schedule,
    worst_case_gas,
)

__all__ = [
    "Opcode", "OPCODES", "BY_NAME", "INVALID", "opcode_for",
    "Instruction", "TruncatedPush", "disassemble", "encode",
    "GasFamily", "GasSchedule", "NAMED_FAMILIES", "family_of",
    "load_schedule", "worst_case_gas",
]
