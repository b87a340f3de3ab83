"""A small concrete EVM used as the ground truth for bound checks.

It runs one message call against a single contract with a dict storage.
External calls succeed without running any code. Gas follows the
pre-Istanbul yellow-paper rules; refunds are ignored. Each opcode's cost is
looked up through this module's own tier table, independently of the
analyzer's charge function.
"""

from collections import Counter
from dataclasses import dataclass, field
from typing import Optional

from gasbound.evm.arith import MASK, PURE
from gasbound.evm.disasm import disassemble
from gasbound.evm.keccak import keccak256
from gasbound.evm.schedule import GasSchedule, load_schedule

_TIERS = {
    "zero": "STOP RETURN REVERT",
    "base": ("ADDRESS ORIGIN CALLER CALLVALUE CALLDATASIZE RETURNDATASIZE CODESIZE "
             "GASPRICE COINBASE TIMESTAMP NUMBER DIFFICULTY GASLIMIT CHAINID POP PC "
             "MSIZE GAS PUSH0"),
    "verylow": ("ADD SUB NOT LT GT SLT SGT EQ ISZERO AND OR XOR BYTE SHL SHR SAR "
                "CALLDATALOAD MLOAD MSTORE MSTORE8"),
    "low": "MUL DIV SDIV MOD SMOD SIGNEXTEND SELFBALANCE",
    "mid": "ADDMOD MULMOD JUMP",
    "high": "JUMPI",
}
TIER_OF = {name: tier for tier, names in _TIERS.items() for name in names.split()}
for _n in range(1, 33):
    TIER_OF[f"PUSH{_n}"] = "verylow"
for _n in range(1, 17):
    TIER_OF[f"DUP{_n}"] = TIER_OF[f"SWAP{_n}"] = "verylow"

_UNSUPPORTED = {"CREATE", "CREATE2", "SELFDESTRUCT", "CALLCODE", "DELEGATECALL"}


@dataclass(frozen=True)
class Env:
    caller: int = 0xCA11E4
    address: int = 0xC0DE
    origin: int = 0xCA11E4
    callvalue: int = 0
    gasprice: int = 1
    coinbase: int = 0
    timestamp: int = 1_500_000_000
    number: int = 4_000_000
    difficulty: int = 0
    gaslimit: int = 8_000_000
    chainid: int = 1
    balance: int = 0


@dataclass(frozen=True)
class Step:
    pc: int
    op: str
    gas: int  # everything charged for this step
    mem_gas: int  # the memory-expansion part of ``gas``
    slot: Optional[int] = None  # storage slot for SLOAD/SSTORE


@dataclass
class ExecResult:
    status: str  # stop | return | revert | invalid | out_of_gas
    gas_used: int
    steps: list
    storage: dict
    return_data: bytes = b""
    jumps: list = field(default_factory=list)  # (from pc, to pc) taken edges
    logs: list = field(default_factory=list)
    memory_words: int = 0
    reason: str = ""  # why an invalid run stopped
    stack: list = field(default_factory=list)  # as left by the last instruction

    @property
    def mem_gas(self) -> int:
        return sum(s.mem_gas for s in self.steps)

    @property
    def opcode_counts(self) -> Counter:
        return Counter(s.op for s in self.steps)

    @property
    def storage_accesses(self) -> list:
        return [(s.pc, s.op, s.slot) for s in self.steps if s.slot is not None]

    @property
    def success(self) -> bool:
        return self.status in ("stop", "return")


class _Halt(Exception):
    def __init__(self, status, data=b"", reason=""):
        self.status = status
        self.data = data
        self.reason = reason


def _words(n: int) -> int:
    return (n + 31) // 32


class _Machine:
    def __init__(self, code, calldata, storage, schedule, gas_limit, env):
        self.code = code
        self.calldata = calldata
        self.storage = dict(storage)
        self.s = schedule
        self.gas_left = gas_limit
        self.gas_limit = gas_limit
        self.env = env
        self.instrs = {ins.pc: ins for ins in disassemble(code)}
        self.jumpdests = {pc for pc, ins in self.instrs.items() if ins.mnemonic == "JUMPDEST"}
        self.stack = []
        self.memory = bytearray()
        self.steps = []
        self.jumps = []
        self.logs = []
        self.returndata = b""

    # memory ---------------------------------------------------------------
    def _mem_cost(self, words):
        return self.s.memory_linear * words + words * words // self.s.memory_quadratic_divisor

    def expand(self, offset: int, size: int) -> int:
        """Grow memory to cover ``[offset, offset + size)``; returns the gas for it."""
        if size == 0:
            return 0
        end = offset + size
        if end > 1 << 32:
            raise _Halt("out_of_gas")
        have = len(self.memory) // 32
        need = _words(end)
        if need <= have:
            return 0
        self.memory.extend(bytes(32 * (need - have)))
        return self._mem_cost(need) - self._mem_cost(have)

    def mread(self, offset, size) -> bytes:
        return bytes(self.memory[offset:offset + size]) if size else b""

    # stack ----------------------------------------------------------------
    def pop(self):
        if not self.stack:
            raise _Halt("invalid", reason="stack underflow")
        return self.stack.pop()

    def push(self, v):
        if len(self.stack) >= 1024:
            raise _Halt("invalid", reason="stack overflow")
        self.stack.append(v & MASK)

    def static_cost(self, name) -> int:
        if name in self.s.overrides:
            return self.s.overrides[name]
        tier = TIER_OF.get(name)
        if tier is not None:
            return self.s.family_cost[tier]
        return {"SLOAD": self.s.sload, "SHA3": self.s.sha3_base}.get(name, 0)

    def run(self) -> ExecResult:
        pc = 0
        status, data, reason = "stop", b"", ""
        try:
            while True:
                ins = self.instrs.get(pc)
                if ins is None:
                    raise _Halt("stop")  # running off the end
                pc = self.step(ins)
        except _Halt as h:
            status, data, reason = h.status, h.data, h.reason
        used = self.gas_limit if status in ("out_of_gas", "invalid") else self.gas_limit - self.gas_left
        return ExecResult(status, used, self.steps, self.storage, data, self.jumps, self.logs,
                          len(self.memory) // 32, reason, list(self.stack))

    def charge(self, ins, gas, mem_gas, slot=None):
        if gas > self.gas_left:
            self.steps.append(Step(ins.pc, ins.mnemonic, self.gas_left, 0, slot))
            self.gas_left = 0
            raise _Halt("out_of_gas")
        self.gas_left -= gas
        self.steps.append(Step(ins.pc, ins.mnemonic, gas, mem_gas, slot))

    def step(self, ins) -> int:
        name = ins.mnemonic
        op = ins.opcode
        nxt = ins.next_pc
        if name == "INVALID" or name in _UNSUPPORTED:
            self.charge(ins, 0, 0)
            raise _Halt("invalid", reason=f"{name} at pc {ins.pc:#x}")
        if len(self.stack) < op.stack_pops:
            raise _Halt("invalid", reason=f"stack underflow at pc {ins.pc:#x}")
        gas = self.static_cost(name)

        if op.is_push:
            self.charge(ins, gas, 0)
            self.push(ins.immediate)
            return nxt
        if name == "PUSH0":
            self.charge(ins, gas, 0)
            self.push(0)
            return nxt
        if name.startswith("DUP"):
            self.charge(ins, gas, 0)
            self.push(self.stack[-op.stack_pops])
            return nxt
        if name.startswith("SWAP"):
            self.charge(ins, gas, 0)
            n = op.stack_pops
            self.stack[-1], self.stack[-n] = self.stack[-n], self.stack[-1]
            return nxt

        args = [self.pop() for _ in range(op.stack_pops)]

        if name in PURE:
            if name == "EXP":
                gas += self.s.exp_byte * ((args[1].bit_length() + 7) // 8)
            self.charge(ins, gas, 0)
            self.push(PURE[name](*args))
            return nxt

        env = self.env
        simple = {
            "ADDRESS": env.address, "ORIGIN": env.origin, "CALLER": env.caller,
            "CALLVALUE": env.callvalue, "CALLDATASIZE": len(self.calldata),
            "RETURNDATASIZE": len(self.returndata), "CODESIZE": len(self.code),
            "GASPRICE": env.gasprice, "COINBASE": env.coinbase, "TIMESTAMP": env.timestamp,
            "NUMBER": env.number, "DIFFICULTY": env.difficulty, "GASLIMIT": env.gaslimit,
            "CHAINID": env.chainid, "SELFBALANCE": env.balance, "PC": ins.pc,
            "MSIZE": len(self.memory),
        }
        if name in simple:
            self.charge(ins, gas, 0)
            self.push(simple[name])
            return nxt
        if name == "GAS":
            self.charge(ins, gas, 0)
            self.push(self.gas_left)
            return nxt
        if name in ("BALANCE", "EXTCODESIZE", "EXTCODEHASH", "BLOCKHASH"):
            self.charge(ins, gas, 0)
            self.push(0)
            return nxt
        if name in ("POP", "JUMPDEST"):
            self.charge(ins, gas, 0)
            return nxt

        if name == "JUMP":
            self.charge(ins, gas, 0)
            return self.jump(ins, args[0])
        if name == "JUMPI":
            self.charge(ins, gas, 0)
            if args[1] != 0:
                return self.jump(ins, args[0])
            self.jumps.append((ins.pc, nxt))
            return nxt

        if name == "CALLDATALOAD":
            self.charge(ins, gas, 0)
            off = args[0]
            word = self.calldata[off:off + 32] if off < len(self.calldata) else b""
            self.push(int.from_bytes(word.ljust(32, b"\0"), "big"))
            return nxt
        if name == "MLOAD":
            mem = self.expand(args[0], 32)
            self.charge(ins, gas + mem, mem)
            self.push(int.from_bytes(self.mread(args[0], 32), "big"))
            return nxt
        if name == "MSTORE":
            mem = self.expand(args[0], 32)
            self.charge(ins, gas + mem, mem)
            self.memory[args[0]:args[0] + 32] = args[1].to_bytes(32, "big")
            return nxt
        if name == "MSTORE8":
            mem = self.expand(args[0], 1)
            self.charge(ins, gas + mem, mem)
            self.memory[args[0]] = args[1] & 0xFF
            return nxt
        if name == "SHA3":
            off, size = args
            mem = self.expand(off, size)
            self.charge(ins, gas + self.s.sha3_word * _words(size) + mem, mem)
            self.push(int.from_bytes(keccak256(self.mread(off, size)), "big"))
            return nxt
        if name in ("CALLDATACOPY", "CODECOPY", "RETURNDATACOPY"):
            dest, off, size = args
            src = {"CALLDATACOPY": self.calldata, "CODECOPY": self.code,
                   "RETURNDATACOPY": self.returndata}[name]
            if name == "RETURNDATACOPY" and off + size > len(src):
                raise _Halt("invalid", reason=f"return data overrun at pc {ins.pc:#x}")
            mem = self.expand(dest, size)
            self.charge(ins, gas + self.s.copy_word * _words(size) + mem, mem)
            if size:
                chunk = src[off:off + size] if off < len(src) else b""
                self.memory[dest:dest + size] = chunk.ljust(size, b"\0")
            return nxt
        if name == "EXTCODECOPY":
            _addr, dest, _off, size = args
            mem = self.expand(dest, size)
            self.charge(ins, gas + self.s.copy_word * _words(size) + mem, mem)
            if size:
                self.memory[dest:dest + size] = bytes(size)
            return nxt

        if name == "SLOAD":
            self.charge(ins, gas, 0, slot=args[0])
            self.push(self.storage.get(args[0], 0))
            return nxt
        if name == "SSTORE":
            slot, value = args
            current = self.storage.get(slot, 0)
            cost = self.s.sstore_set if current == 0 and value != 0 else self.s.sstore_reset
            self.charge(ins, cost, 0, slot=slot)
            if value:
                self.storage[slot] = value
            else:
                self.storage.pop(slot, None)
            return nxt

        if name.startswith("LOG"):
            off, size, *topics = args
            mem = self.expand(off, size)
            self.charge(ins, gas + self.s.log_byte * size + mem, mem)
            self.logs.append((tuple(topics), self.mread(off, size)))
            return nxt

        if name in ("CALL", "STATICCALL"):
            if name == "CALL":
                _g, _to, value, in_off, in_size, out_off, out_size = args
            else:
                _g, _to, in_off, in_size, out_off, out_size = args
                value = 0
            mem = self.expand(in_off, in_size) + self.expand(out_off, out_size)
            if value:
                gas += self.s.call_value + self.s.call_new_account
            self.charge(ins, gas + mem, mem)
            self.returndata = b""
            self.push(1)
            return nxt

        if name in ("RETURN", "REVERT"):
            off, size = args
            mem = self.expand(off, size)
            self.charge(ins, gas + mem, mem)
            raise _Halt("return" if name == "RETURN" else "revert", self.mread(off, size))
        if name == "STOP":
            self.charge(ins, gas, 0)
            raise _Halt("stop")
        raise _Halt("invalid", reason=f"{name} at pc {ins.pc:#x} is not supported")

    def jump(self, ins, target) -> int:
        if target not in self.jumpdests:
            raise _Halt("invalid", reason=f"bad jump target {target:#x} at pc {ins.pc:#x}")
        self.jumps.append((ins.pc, target))
        return target


def execute(code: bytes, calldata: bytes = b"", storage: Optional[dict] = None,
            schedule: Optional[GasSchedule] = None, gas_limit: int = 10_000_000,
            env: Env = Env()) -> ExecResult:
    """Run ``code`` once and return the full trace."""
    schedule = schedule or load_schedule()
    return _Machine(bytes(code), bytes(calldata), storage or {}, schedule, gas_limit, env).run()
