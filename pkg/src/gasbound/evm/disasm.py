from dataclasses import dataclass
from typing import Optional

from gasbound.evm.opcodes import Opcode, opcode_for


class TruncatedPush(ValueError):
    def __init__(self, pc: int):
        super().__init__(f"PUSH immediate runs past end of code at pc {pc}")
        self.pc = pc


@dataclass(frozen=True)
class Instruction:
    pc: int
    opcode: Opcode
    immediate: Optional[int] = None
    raw: Optional[int] = None  # original byte when it decoded to INVALID

    @property
    def mnemonic(self) -> str:
        return self.opcode.mnemonic

    @property
    def next_pc(self) -> int:
        return self.pc + 1 + self.opcode.immediate_len

    def encode(self) -> bytes:
        out = bytes([self.opcode.code if self.raw is None else self.raw])
        if self.opcode.immediate_len:
            out += self.immediate.to_bytes(self.opcode.immediate_len, "big")
        return out

    def __str__(self):
        if self.immediate is None:
            return f"{self.pc:#06x} {self.mnemonic}"
        return f"{self.pc:#06x} {self.mnemonic} {self.immediate:#x}"


def disassemble(code: bytes) -> list[Instruction]:
    """Linear sweep over ``code``.

    Undefined bytes become INVALID instructions, so trailing metadata decodes
    into an unreachable INVALID-terminated tail. Raises ``TruncatedPush`` when
    a PUSH immediate runs past the end.
    """
    out = []
    pc = 0
    n = len(code)
    while pc < n:
        op = opcode_for(code[pc])
        if op.immediate_len:
            end = pc + 1 + op.immediate_len
            if end > n:
                raise TruncatedPush(pc)
            out.append(Instruction(pc, op, int.from_bytes(code[pc + 1:end], "big")))
            pc = end
        else:
            raw = code[pc] if op.code != code[pc] else None
            out.append(Instruction(pc, op, raw=raw))
            pc += 1
    return out


def encode(instructions) -> bytes:
    return b"".join(ins.encode() for ins in instructions)


def parse_hex(text: str) -> bytes:
    """Hex bytecode as found in .bin files: optional 0x, whitespace tolerated."""
    cleaned = "".join(text.split())
    if cleaned[:2].lower() == "0x":
        cleaned = cleaned[2:]
    return bytes.fromhex(cleaned)
