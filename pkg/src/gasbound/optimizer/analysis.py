"""Which storage fields of a function are worth caching in a local, and is it safe."""

from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Optional

from gasbound.bounds.costmodel import CostModelConfig
from gasbound.bounds.engine import atom_bounds
from gasbound.bounds.poly import ZERO, SymbolicBound
from gasbound.cfg.functions import transitive_blocks
from gasbound.evm.opcodes import CALL_FAMILY
from gasbound.evm.schedule import GasSchedule, load_schedule


@dataclass(frozen=True)
class FieldAccess:
    reads: SymbolicBound
    writes: SymbolicBound

    @property
    def total(self) -> SymbolicBound:
        return self.reads + self.writes


@dataclass(frozen=True)
class StorageAccessSummary:
    per_field: dict  # field name -> FieldAccess
    transitive: frozenset = frozenset()  # blocks excluded from the counts


@dataclass(frozen=True)
class OptimizationCandidate:
    field: str
    total_bound: SymbolicBound
    read_only: bool
    safe: bool = True
    reason_if_unsafe: Optional[str] = None
    slot: Optional[int] = None


def summarize_storage(unit, cfg, loops, layout, transitive=frozenset(),
                      schedule: Optional[GasSchedule] = None) -> StorageAccessSummary:
    """Bounds on SLOAD and SSTORE executions per basic field, transitive code excluded."""
    config = CostModelConfig("instructions", "storage-optimization")
    per_atom, _ = atom_bounds(cfg, unit, config, schedule or load_schedule(), loops=loops,
                              layout=layout, transitive=transitive)
    scalars = [f.name for f in layout.entries if f.kind == "BasicScalar"] if layout else []
    out = {}
    for name in scalars:
        reads, writes = ZERO, ZERO
        for (key, mnemonic, _line, _field), b in per_atom.items():
            if key != name:
                continue
            if mnemonic == "SLOAD":
                reads = reads + b
            else:
                writes = writes + b
        out[name] = FieldAccess(reads, writes)
    return StorageAccessSummary(out, frozenset(transitive))


def detect_candidates(summary: StorageAccessSummary, layout=None) -> list:
    """Fields whose access bound differs from one."""
    out = []
    for name, acc in summary.per_field.items():
        total = acc.total
        if total.is_zero() or total.is_one():
            continue
        f = layout.field(name) if layout else None
        out.append(OptimizationCandidate(name, total, acc.writes.is_zero(),
                                         slot=f.slot if f else None))
    return out


def check_safety(candidate: OptimizationCandidate, unit, all_units, cfg,
                 transitive=None) -> OptimizationCandidate:
    """Reject candidates whose cached value another piece of code could observe.

    Any external call makes the function unsafe (re-entry could read the stale
    field); so does code shared with another public function that touches the
    field's slot.
    """
    for n in sorted(unit.reachable_blocks):
        for ins in cfg.blocks[n].instructions:
            if ins.mnemonic in CALL_FAMILY:
                return replace(candidate, safe=False,
                               reason_if_unsafe=f"external call at pc {ins.pc:#x}")
    if transitive is None:
        transitive = transitive_blocks(unit, all_units)
    for n in sorted(transitive):
        blk = cfg.blocks[n]
        for ins, args in zip(blk.instructions, blk.operands):
            if ins.mnemonic not in ("SLOAD", "SSTORE"):
                continue
            slot = args[0]
            if not slot.is_const or slot.value == candidate.slot or candidate.slot is None:
                return replace(candidate, safe=False,
                               reason_if_unsafe=f"transitive access at pc {ins.pc:#x}")
    return replace(candidate, safe=True, reason_if_unsafe=None)


def _leading(bound: SymbolicBound):
    terms = bound.poly.sorted_terms()
    return terms[-1][0] if terms else ()


def _clamp(x: Fraction) -> Fraction:
    return min(max(x, Fraction(0)), Fraction(1))


def estimate_savings(summary: StorageAccessSummary, candidate: OptimizationCandidate,
                     schedule: GasSchedule, all_bound: SymbolicBound,
                     all_bound_best: SymbolicBound) -> tuple:
    """Fraction of gas saved by caching, under worst and best SSTORE pricing.

    For a parametric access bound the comparison is made on the coefficient
    of its leading monomial (the per-iteration cost of the innermost loop):
    each cached access costs 3 instead of an SLOAD or SSTORE, and the single
    load and store moved outside the loop do not change that coefficient.
    For a constant bound the storage cost itself is compared with one load,
    one store if anything is written, and 3 per replaced access.
    """
    acc = summary.per_field[candidate.field]
    out = []
    for sched, whole in ((schedule, all_bound), (schedule.best_case(), all_bound_best)):
        sstore = sched.sstore_set
        mono = _leading(acc.total)
        r, w = acc.reads.coeff(mono), acc.writes.coeff(mono)
        if mono:
            original = whole.coeff(mono)
            optimized = original - (r * sched.sload + w * sstore) + 3 * (r + w)
        else:
            original = r * sched.sload + w * sstore
            optimized = sched.sload + (sstore if w else 0) + 3 * (r + w)
        if (mono and whole.unbounded) or original <= 0:
            out.append(Fraction(0))
        else:
            out.append(_clamp(1 - Fraction(optimized) / Fraction(original)))
    return tuple(out)
