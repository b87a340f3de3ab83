"""Cross-check symbolic bounds against concrete runs of the fixture corpus."""

import time
from dataclasses import dataclass

from gasbound.bounds.costmodel import SCOPES, CostModelConfig
from gasbound.bounds.poly import MissingBinding
from gasbound.evm.schedule import load_schedule
from gasbound.interp.machine import execute
from gasbound.interp.measure import measure, memory_charges
from gasbound.pipeline import load_fixture

CONFIGS = tuple(CostModelConfig(res, scope) for scope in SCOPES for res in ("gas", "instructions")
                if not (scope == "storage-optimization" and res == "gas"))


@dataclass(frozen=True)
class Violation:
    fixture: str
    function: str
    config: CostModelConfig
    key: str
    data: int
    label: str
    measured: int
    bound: object

    def __str__(self):
        return (f"{self.fixture}/{self.function} {self.config.resource}:{self.config.scope} "
                f"key={self.key} data={self.data} ({self.label}): measured {self.measured} > {self.bound}")


@dataclass
class MatrixResult:
    checks: int
    runs: int
    violations: list
    seconds: float


def unit_for_case(program, case):
    if case.function is not None:
        return program.unit(case.function)
    for kind in ("anonymous", "fallback"):
        for u in program.units:
            if u.kind == kind:
                return u
    raise LookupError("no unit for a call without a selector")


def check_fixture(fixture, configs=CONFIGS, schedule=None, data_values=range(9)) -> MatrixResult:
    schedule = schedule or load_schedule()
    program = load_fixture(fixture)
    reports = {}
    violations = []
    checks = runs = 0
    start = time.perf_counter()
    for case in fixture.inputs(data_values):
        unit = unit_for_case(program, case)
        result = execute(fixture.code, case.calldata, case.storage, schedule)
        runs += 1
        excluded = program.transitive_pcs(unit)
        for config in configs:
            key = (unit.entry, config)
            if key not in reports:
                reports[key] = program.analyze(unit, config, schedule)
            report = reports[key]
            observed = measure(result, config.resource, config.scope, config.filter,
                               program.layout, program.srcmap, excluded)
            for k, amount in observed.items():
                checks += 1
                bound = report.entries.get(k)
                limit = None if bound is None else _evaluate(bound, case)
                if limit is None or amount > limit:
                    violations.append(Violation(fixture.name, unit.name, config, k, case.data,
                                                case.label, amount, bound))
            if config.resource == "gas" and config.scope == "all":
                checks += 1
                mem = memory_charges(result)
                if mem > _evaluate(report.memory_gas, case):
                    violations.append(Violation(fixture.name, unit.name, config, "memory",
                                                case.data, case.label, mem, report.memory_gas))
    return MatrixResult(checks, runs, violations, time.perf_counter() - start)


def _evaluate(bound, case):
    try:
        return bound.evaluate({p: _param_value(p, case) for p in bound.params})
    except MissingBinding:
        return None


def _param_value(name: str, case) -> int:
    """Concrete value of a bound parameter for ``case``.

    Array-length parameters are the case's ``data``; scalar arguments are
    read back from the calldata word they name.
    """
    if name.startswith("data"):
        return case.data
    if name.startswith("arg"):
        k = int(name[3:])
        word = case.calldata[4 + 32 * k: 36 + 32 * k]
        return int.from_bytes(word.ljust(32, b"\0"), "big")
    raise MissingBinding(name)


def run_matrix(fixtures, configs=CONFIGS, schedule=None, data_values=range(9)) -> MatrixResult:
    total = MatrixResult(0, 0, [], 0.0)
    for fx in fixtures:
        r = check_fixture(fx, configs, schedule, data_values)
        total.checks += r.checks
        total.runs += r.runs
        total.violations += r.violations
        total.seconds += r.seconds
    return total
