"""Storage-caching optimization: detect, check, rewrite."""

import json
from dataclasses import dataclass, field, replace
from typing import Optional

from gasbound.bounds.costmodel import CostModelConfig
from gasbound.evm.schedule import GasSchedule, load_schedule
from gasbound.optimizer.analysis import (
    FieldAccess, OptimizationCandidate, StorageAccessSummary, check_safety, detect_candidates,
    estimate_savings, summarize_storage,
)
from gasbound.optimizer.transform import (
    FunctionNotFound, TransformResult, UnsupportedSyntax, find_function, opt_path, transform,
)

__all__ = [
    "FieldAccess", "OptimizationCandidate", "StorageAccessSummary", "check_safety",
    "detect_candidates", "estimate_savings", "summarize_storage",
    "FunctionNotFound", "TransformResult", "UnsupportedSyntax", "find_function", "opt_path",
    "transform", "OptimizationOutcome", "optimize_function",
]


@dataclass
class OptimizationOutcome:
    function: str
    summary: StorageAccessSummary
    candidates: list  # checked OptimizationCandidate, one per detected field
    savings: dict = field(default_factory=dict)  # field -> (worst, best)
    new_source: Optional[str] = None
    applied: list = field(default_factory=list)  # fields actually rewritten
    skipped: dict = field(default_factory=dict)  # field -> why the rewrite failed

    def to_json(self) -> dict:
        rows = []
        for c in self.candidates:
            worst, best = self.savings.get(c.field, (None, None))
            acc = self.summary.per_field[c.field]
            rows.append({
                "field": c.field,
                "slot": c.slot,
                "reads": str(acc.reads),
                "writes": str(acc.writes),
                "total": str(c.total_bound),
                "read_only": c.read_only,
                "safe": c.safe,
                "reason": c.reason_if_unsafe,
                "savings_worst": None if worst is None else float(worst),
                "savings_best": None if best is None else float(best),
                "applied": c.field in self.applied,
                "error": self.skipped.get(c.field),
            })
        return {"function": self.function, "candidates": rows}

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2)


def source_name(unit) -> Optional[str]:
    """Solidity name of a dispatched function: ``fill(uint256[])`` -> ``fill``."""
    if unit.signature:
        return unit.signature.split("(", 1)[0]
    return None


def optimize_function(program, unit, source: Optional[str] = None, name: Optional[str] = None,
                      schedule: Optional[GasSchedule] = None) -> OptimizationOutcome:
    """Run detection and safety on ``unit`` and rewrite ``source`` for every safe field.

    Without a source only the analysis part runs. ``name`` overrides the
    Solidity function name taken from the unit's signature.
    """
    schedule = schedule or load_schedule()
    name = name or source_name(unit) or unit.name
    transitive = program.transitive(unit)
    summary = summarize_storage(unit, program.cfg, program.loops(unit), program.layout,
                                transitive, schedule)
    whole = program.analyze(unit, CostModelConfig("gas", "all"), schedule).total()
    whole_best = program.analyze(unit, CostModelConfig("gas", "all"), schedule.best_case()).total()
    out = OptimizationOutcome(name, summary, [])
    for cand in detect_candidates(summary, program.layout):
        cand = check_safety(cand, unit, program.units, program.cfg, transitive)
        out.candidates.append(cand)
        out.savings[cand.field] = estimate_savings(summary, cand, schedule, whole, whole_best)
    if source is None:
        return out
    text = source
    for cand in out.candidates:
        if not cand.safe:
            continue
        try:
            text = transform(text, name, cand.field, cand.read_only).new_source
        except (FunctionNotFound, UnsupportedSyntax) as e:
            out.skipped[cand.field] = str(e)
            continue
        out.applied.append(cand.field)
    out.new_source = text if out.applied else None
    return out


def apply_savings(result: TransformResult, savings) -> TransformResult:
    worst, best = savings
    return replace(result, savings_worst=worst, savings_best=best)
