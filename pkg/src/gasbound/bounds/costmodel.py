"""What a bound counts (resource) and how charges are grouped into keys (scope)."""

import logging
from dataclasses import dataclass
from typing import Optional

from gasbound.bounds.memory import words_of
from gasbound.bounds.poly import INF, ZERO, SymbolicBound
from gasbound.evm.schedule import GasSchedule, family_key, family_of, worst_case_gas

log = logging.getLogger(__name__)

RESOURCES = ("gas", "instructions")
SCOPES = ("all", "gas-family", "storage", "storage-optimization", "line", "selected")
STORAGE_OPS = ("SLOAD", "SSTORE")
_COPY = {"CALLDATACOPY": 2, "CODECOPY": 2, "RETURNDATACOPY": 2, "EXTCODECOPY": 3}


class MissingSourceMap(ValueError):
    pass


@dataclass(frozen=True)
class CostModelConfig:
    resource: str = "gas"
    scope: str = "all"
    filter: tuple = ()

    def __post_init__(self):
        if self.resource not in RESOURCES:
            raise ValueError(f"unknown resource {self.resource!r}")
        if self.scope not in SCOPES:
            raise ValueError(f"unknown scope {self.scope!r}")
        object.__setattr__(self, "filter", tuple(self.filter))
        if self.scope == "storage-optimization" and self.resource != "instructions":
            log.warning("storage-optimization counts instructions; ignoring resource=%s", self.resource)
            object.__setattr__(self, "resource", "instructions")

    @property
    def filter_keys(self) -> tuple:
        """Filter entries normalised to report-key spelling."""
        if self.scope == "gas-family":
            return tuple(family_key(f) for f in self.filter)
        if self.scope == "selected":
            return tuple(f.strip().upper() for f in self.filter)
        return tuple(str(f).strip() for f in self.filter)


@dataclass(frozen=True)
class ChargeContext:
    """Per-instruction facts the charge depends on."""

    operands: tuple = ()
    line: Optional[int] = None
    field: Optional[str] = None
    transitive: bool = False
    has_source_map: bool = False


def report_key(ins, config: CostModelConfig, ctx: ChargeContext) -> Optional[str]:
    """Key the instruction is charged under, or None when out of scope."""
    name = ins.mnemonic
    scope = config.scope
    keys = config.filter_keys
    if scope == "all":
        return "all"
    if scope == "gas-family":
        key = family_key(family_of(ins.opcode).name)
    elif scope in ("storage", "storage-optimization"):
        if name not in STORAGE_OPS:
            return None
        if scope == "storage-optimization" and ctx.transitive:
            return None
        key = ctx.field or "unknown"
    elif scope == "line":
        if not ctx.has_source_map:
            raise MissingSourceMap("the line scope needs a source map")
        if ctx.line is None:
            return None
        key = str(ctx.line)
    else:
        key = name
    if keys and key not in keys:
        return None
    return key


def resource_amount(ins, config: CostModelConfig, schedule: GasSchedule,
                    operands=()) -> SymbolicBound:
    """Worst-case cost of one execution of ``ins`` (memory expansion excluded)."""
    if config.resource == "instructions":
        return SymbolicBound.const(1)
    name = ins.mnemonic
    static = SymbolicBound.const(worst_case_gas(ins.opcode, schedule))
    if name == "SHA3":
        return static + words_of(operands[1]).scale(schedule.sha3_word)
    if name in _COPY:
        return static + words_of(operands[_COPY[name]]).scale(schedule.copy_word)
    if name == "EXP":
        exponent = operands[1]
        nbytes = (exponent.value.bit_length() + 7) // 8 if exponent.is_const else 32
        return static + SymbolicBound.const(schedule.exp_byte * nbytes)
    if name.startswith("LOG"):
        size = operands[1].as_linear()
        if size is None:
            return INF
        return static + SymbolicBound(size.clip_negative() * schedule.log_byte)
    if name in ("CALL", "CALLCODE"):
        value = operands[2]
        if value.is_const and value.value == 0:
            return static
        extra = schedule.call_value + (schedule.call_new_account if name == "CALL" else 0)
        return static + SymbolicBound.const(extra)
    return static


def charge(ins, config: CostModelConfig, schedule: GasSchedule,
           ctx: ChargeContext = ChargeContext()) -> SymbolicBound:
    """Cost attributed to ``ins`` under ``config``; zero when out of scope."""
    if report_key(ins, config, ctx) is None:
        return ZERO
    return resource_amount(ins, config, schedule, ctx.operands)
