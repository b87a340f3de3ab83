"""Gas families and the (pre-Istanbul) gas schedule.

The six named families follow the yellow-paper classification; every other
opcode forms a singleton family named after its mnemonic.
"""

import dataclasses
import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Union

from gasbound.evm.opcodes import Opcode

NAMED_FAMILIES = ("zero", "base", "verylow", "low", "mid", "high")

_MEMBERS = {
    "zero": {"STOP", "RETURN", "REVERT"},
    "base": {
        "ADDRESS", "ORIGIN", "CALLER", "CALLVALUE", "CALLDATASIZE",
        "RETURNDATASIZE", "CODESIZE", "GASPRICE", "COINBASE", "TIMESTAMP",
        "NUMBER", "DIFFICULTY", "GASLIMIT", "CHAINID", "POP", "PC", "MSIZE",
        "GAS", "PUSH0",
    },
    "verylow": {
        "ADD", "SUB", "NOT", "LT", "GT", "SLT", "SGT", "EQ", "ISZERO", "AND",
        "OR", "XOR", "BYTE", "SHL", "SHR", "SAR", "CALLDATALOAD", "MLOAD",
        "MSTORE", "MSTORE8",
    },
    "low": {"MUL", "DIV", "SDIV", "MOD", "SMOD", "SIGNEXTEND", "SELFBALANCE"},
    "mid": {"ADDMOD", "MULMOD", "JUMP"},
    "high": {"JUMPI"},
}
_FAMILY_OF_NAME = {m: fam for fam, ms in _MEMBERS.items() for m in ms}


@dataclass(frozen=True)
class GasFamily:
    name: str
    singleton: bool = False

    def __str__(self):
        return self.name


def family_of(opcode: Opcode) -> GasFamily:
    name = opcode.mnemonic
    if name in _FAMILY_OF_NAME:
        return GasFamily(_FAMILY_OF_NAME[name])
    if name.startswith(("PUSH", "DUP", "SWAP")) and name != "PUSH0":
        return GasFamily("verylow")
    return GasFamily(name, singleton=True)


def family_key(token: str) -> str:
    """Canonical report key for a family name typed by a user."""
    low = token.strip().lower()
    return low if low in NAMED_FAMILIES else token.strip().upper()


@dataclass(frozen=True)
class GasSchedule:
    family_cost: dict = field(default_factory=dict)
    sstore_set: int = 20000
    sstore_reset: int = 5000
    sload: int = 200
    sha3_base: int = 30
    sha3_word: int = 6
    memory_linear: int = 3
    memory_quadratic_divisor: int = 512
    copy_word: int = 3
    exp_byte: int = 50
    log_byte: int = 8
    call_value: int = 9000
    call_new_account: int = 25000
    overrides: dict = field(default_factory=dict)

    def __post_init__(self):
        costs = [self.sstore_set, self.sstore_reset, self.sload, self.sha3_base,
                 self.sha3_word, self.memory_linear, self.copy_word, self.exp_byte, self.log_byte,
                 self.call_value, self.call_new_account,
                 *self.family_cost.values(), *self.overrides.values()]
        if any(c < 0 for c in costs):
            raise ValueError("gas costs must be non-negative")
        if self.sstore_set < self.sstore_reset:
            raise ValueError("sstore_set must be >= sstore_reset")
        if self.memory_quadratic_divisor <= 0:
            raise ValueError("memory_quadratic_divisor must be positive")
        missing = set(NAMED_FAMILIES) - set(self.family_cost)
        if missing:
            raise ValueError(f"family_cost lacks {sorted(missing)}")

    def best_case(self) -> "GasSchedule":
        """Same schedule with every SSTORE priced at the reset cost."""
        return dataclasses.replace(self, sstore_set=self.sstore_reset)

    @classmethod
    def from_dict(cls, data: dict) -> "GasSchedule":
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown schedule keys: {sorted(unknown)}")
        kwargs = {}
        for k, v in data.items():
            if k in ("family_cost", "overrides"):
                kwargs[k] = {name: int(c) for name, c in v.items()}
            else:
                kwargs[k] = int(v)
        return cls(**kwargs)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


def load_schedule(path: Union[str, Path, None] = None) -> GasSchedule:
    """Load a schedule JSON file; the bundled default when ``path`` is None."""
    if path is None:
        text = resources.files("gasbound.evm").joinpath("data/default_schedule.json").read_text()
    else:
        text = Path(path).read_text()
    return GasSchedule.from_dict(json.loads(text))


def worst_case_gas(opcode: Opcode, schedule: GasSchedule) -> int:
    """Static worst-case charge; dynamic word and memory costs are excluded."""
    name = opcode.mnemonic
    if name in schedule.overrides:
        return schedule.overrides[name]
    if name == "SSTORE":
        return schedule.sstore_set
    if name == "SLOAD":
        return schedule.sload
    if name == "SHA3":
        return schedule.sha3_base
    fam = family_of(opcode)
    if fam.singleton:
        return 0
    return schedule.family_cost[fam.name]
