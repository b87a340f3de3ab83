"""Concrete consumption of a trace, grouped the way a bound report is keyed.

Keys are derived from concrete facts: the executed opcode, the storage slot
actually touched and the source line of the pc. Memory expansion is left out
of every key and returned by ``memory_charges``.
"""

from typing import Iterable, Optional

from gasbound.interp.machine import TIER_OF, ExecResult

_STORAGE = ("SLOAD", "SSTORE")
_NAMED = ("zero", "base", "verylow", "low", "mid", "high")


def _family(op: str) -> str:
    return TIER_OF.get(op, op)


def _key(step, scope, layout, srcmap, excluded) -> Optional[str]:
    if scope == "all":
        return "all"
    if scope == "gas-family":
        return _family(step.op)
    if scope in ("storage", "storage-optimization"):
        if step.op not in _STORAGE:
            return None
        if scope == "storage-optimization" and step.pc in excluded:
            return None
        if layout is None:
            return "unknown"
        return layout.field_at(step.slot)
    if scope == "line":
        line = srcmap.line(step.pc) if srcmap else None
        return None if line is None else str(line)
    return step.op


def _normalise_filter(scope, tokens) -> set:
    out = set()
    for t in tokens:
        t = str(t).strip()
        if scope == "gas-family":
            out.add(t.lower() if t.lower() in _NAMED else t.upper())
        elif scope == "selected":
            out.add(t.upper())
        else:
            out.add(t)
    return out


def measure(result: ExecResult, resource: str = "gas", scope: str = "all",
            filter: Iterable = (), layout=None, srcmap=None,
            excluded_pcs: Iterable[int] = (), skip_pcs: Iterable[int] = ()) -> dict:
    """Per-key consumption of one run.

    ``excluded_pcs`` are dropped for the storage-optimization scope only
    (code reached through calls into other public functions). ``skip_pcs``
    are dropped for every scope.
    """
    wanted = _normalise_filter(scope, filter)
    excluded = set(excluded_pcs)
    skip = set(skip_pcs)
    out = {}
    for step in result.steps:
        if step.pc in skip:
            continue
        key = _key(step, scope, layout, srcmap, excluded)
        if key is None or (wanted and key not in wanted):
            continue
        amount = 1 if resource == "instructions" else step.gas - step.mem_gas
        out[key] = out.get(key, 0) + amount
    return out


def memory_charges(result: ExecResult, skip_pcs: Iterable[int] = ()) -> int:
    skip = set(skip_pcs)
    return sum(s.mem_gas for s in result.steps if s.pc not in skip)
