"""Acceptance checks. Each test prints one PASS/FAIL line, then asserts.

Run ``pytest tests/test_acceptance.py -v`` (the lines print with or without -s).
"""

import io
from fractions import Fraction

import pytest

from conftest import program
from gasbound import corpus
from gasbound.bounds.costmodel import CostModelConfig
from gasbound.bounds.engine import atom_bounds
from gasbound.bounds.memory import memory_gas
from gasbound.bounds.poly import INF, ZERO, Poly, SymbolicBound
from gasbound.cli import main
from gasbound.evm.schedule import load_schedule
from gasbound.interp import execute, memory_charges
from gasbound.optimizer import (check_safety, detect_candidates, find_function, summarize_storage,
                                transform)
from gasbound.soundness import run_matrix

SCHED = load_schedule()
data = Poly.var("data")
FILL = "fill(uint256[])"


@pytest.fixture
def verdict(capsys):
    def emit(criterion, ok, detail):
        with capsys.disabled():
            print(f"\n[{'PASS' if ok else 'FAIL'}] {criterion}: {detail}")
        assert ok, detail
    return emit


def _sum(bounds):
    out = ZERO
    for b in bounds:
        out = out + b
    return out


def test_soundness_matrix(verdict):
    fixtures = [corpus.get(n) for n in corpus.CORE]
    r = run_matrix(fixtures)
    # every other fixture too, outside the timed core set
    rest = run_matrix([corpus.get(n) for n in sorted(corpus.FIXTURES) if n not in corpus.CORE])
    ok = not r.violations and not rest.violations and r.seconds < 60 and len(fixtures) >= 8
    verdict("soundness matrix", ok,
            f"{len(fixtures)} core fixtures, {r.runs} runs, {r.checks} checks, "
            f"{len(r.violations)} violations, {r.seconds:.1f}s; "
            f"+{rest.checks} checks on the rest, {len(rest.violations)} violations")


def test_storage_optimization_bound(verdict):
    p = program("fill")
    r = p.analyze(p.unit(FILL), CostModelConfig("instructions", "storage-optimization"))
    got = r.entries["totalSupply"]
    verdict("storage-optimization bound is 2*data", got == data * 2, f"totalSupply: {got.render()}")


def test_storage_dominance(verdict):
    p = program("fill")
    u = p.unit(FILL)
    storage = p.analyze(u, CostModelConfig("gas", "storage")).total()
    whole = p.analyze(u, CostModelConfig("gas", "all")).entries["all"]
    ratio = storage.coeff(("data",)) / whole.coeff(("data",))
    verdict("storage dominance >= 0.95", ratio >= Fraction(95, 100),
            f"{storage.coeff(('data',))}/{whole.coeff(('data',))} = {float(ratio):.4f}")


def test_partition_identities(verdict):
    checked = 0
    bad = []
    for name in sorted(corpus.FIXTURES):
        p = program(name)
        for u in p.units:
            whole = p.analyze(u, CostModelConfig("gas", "all")).entries["all"]
            fam = p.analyze(u, CostModelConfig("gas", "gas-family")).total()
            sel = p.analyze(u, CostModelConfig("gas", "selected")).total()
            line = p.analyze(u, CostModelConfig("gas", "line")).total()
            atoms, poisoned = atom_bounds(p.cfg, u, CostModelConfig("gas", "all"), SCHED,
                                          loops=p.loops(u), layout=p.layout, srcmap=p.srcmap)
            mapped = INF if poisoned else _sum(b for a, b in atoms.items() if a[2] is not None)
            for label, lhs, rhs in (("family", fam, whole), ("selected", sel, whole),
                                    ("line", line, mapped)):
                checked += 1
                if lhs != rhs:
                    bad.append(f"{name}/{u.name} {label}: {lhs.render()} != {rhs.render()}")
    verdict("partition identities", not bad,
            f"{checked} identities over {len(corpus.FIXTURES)} fixtures" + ("; " + bad[0] if bad else ""))


def test_memory_gas_formula(verdict):
    fx = corpus.get("fill")
    p = program("fill")
    m = p.analyze(p.unit(FILL), CostModelConfig()).memory_gas
    shape = m == memory_gas(SymbolicBound(data + 5)) and len(m.mem_terms) == 1
    mismatches = []
    seen = set()
    for case in fx.inputs(range(9)):
        if case.function != FILL:
            continue
        seen.add(case.data)
        r = execute(fx.code, case.calldata, case.storage)
        want = m.evaluate({"data": case.data})
        if memory_charges(r) != want:
            mismatches.append((case.data, memory_charges(r), want))
    ok = shape and not mismatches and seen == set(range(9))
    verdict("memory gas formula", ok,
            f"{m.render()}; data {min(seen)}..{max(seen)}, mismatches: {mismatches or 'none'}")


def test_optimization_detection_and_transform(verdict):
    # detection iff the access bound is not one
    wrong = []
    for name in sorted(corpus.FIXTURES):
        p = program(name)
        for u in p.units:
            s = summarize_storage(u, p.cfg, p.loops(u), p.layout, p.transitive(u))
            found = {c.field for c in detect_candidates(s, p.layout)}
            for field, acc in s.per_field.items():
                if acc.total.is_zero():
                    continue
                if (field in found) != (not acc.total.is_one()):
                    wrong.append(f"{name}/{u.name}/{field}")

    # golden transform
    src = corpus.get("fill").source
    new = transform(src, "fill", "totalSupply").new_source
    span = find_function(new, "fill")
    body = [l.strip() for l in new[span.body_open + 1:span.body_close].splitlines() if l.strip()]
    golden = (body[0] == "uint256 totalSupply = get_field_totalSupply();"
              and body[-1] == "set_field_totalSupply(totalSupply);"
              and new == corpus.get("fill_opt").source)
    ro = transform(corpus.get("read_only").source, "peek", "rate", read_only=True)
    golden = golden and ro.setter_name is None and "set_field_" not in ro.new_source

    # the compiled pair: per-iteration reduction
    po, pn = program("fill"), program("fill_opt")
    cuts = []
    for sched in (SCHED, SCHED.best_case()):
        a = po.analyze(po.unit(FILL), CostModelConfig(), sched).entries["all"].coeff(("data",))
        b = pn.analyze(pn.unit(FILL), CostModelConfig(), sched).entries["all"].coeff(("data",))
        cuts.append((a, b, 1 - b / a))
    (wa, wb, worst), (ba, bb, best) = cuts
    ok = not wrong and golden and worst >= Fraction(40, 100) and best >= Fraction(15, 100)
    verdict("optimization detection + transform", ok,
            f"detection errors {wrong or 'none'}; golden {'ok' if golden else 'mismatch'}; "
            f"worst {wa}->{wb} ({float(worst):.2%}), best {ba}->{bb} ({float(best):.2%})")


def test_safety_conservatism(verdict):
    rows = []
    for name, fn, field in (("transitive_access", "bump()", "counter"),
                            ("external_call", "ping(address)", "pings")):
        p = program(name)
        u = p.unit(fn)
        s = summarize_storage(u, p.cfg, p.loops(u), p.layout, p.transitive(u))
        (c,) = [c for c in detect_candidates(s, p.layout) if c.field == field]
        c = check_safety(c, u, p.units, p.cfg, p.transitive(u))
        rows.append((name, c.safe, c.reason_if_unsafe))
    verdict("safety conservatism", all(not safe for _, safe, _ in rows),
            "; ".join(f"{n}: {'safe' if s else 'unsafe (' + r + ')'}" for n, s, r in rows))


def test_unbounded_fallback(verdict):
    out = io.StringIO()
    code = main(["analyze", "--fixture", "unresolvable_loop", "--model", "gas-family",
                 "--function", "grow(uint256)"], out)
    text = out.getvalue()
    entries = dict(l.strip().split(": ", 1) for l in text.splitlines()[1:] if l.startswith("  "))
    infs = sorted(k for k, v in entries.items() if v == "inf")
    bounded = sorted(k for k, v in entries.items() if v != "inf")
    ok = code == 2 and infs and bounded and entries.get("SSTORE") == "20000"
    verdict("unbounded fallback", ok,
            f"exit {code}; inf: {', '.join(infs)}; bounded: "
            + ", ".join(f"{k}={entries[k]}" for k in bounded))


def test_evaluate_spot_check(verdict):
    b = SymbolicBound(data * 40896 + 1077)
    v = b.evaluate({"data": 2})
    mem = memory_gas(SymbolicBound(data + 5)).evaluate({"data": 0})
    verdict("evaluate spot-check", v == 82869 and mem == 15, f"1077+40896*data @2 = {v}; memory @0 = {mem}")
