import difflib
from fractions import Fraction

import pytest

from conftest import program
from gasbound import corpus
from gasbound.bounds.costmodel import CostModelConfig
from gasbound.bounds.poly import Poly, SymbolicBound
from gasbound.evm.schedule import load_schedule
from gasbound.interp import execute
from gasbound.optimizer import (FunctionNotFound, UnsupportedSyntax, check_safety, detect_candidates,
                                estimate_savings, find_function, optimize_function, opt_path,
                                summarize_storage, transform)
from gasbound.soundness import unit_for_case

SCHED = load_schedule()
data = Poly.var("data")


def summary_of(name, function):
    p = program(name)
    u = p.unit(function)
    return p, u, summarize_storage(u, p.cfg, p.loops(u), p.layout, p.transitive(u))


def candidates_of(name, function):
    p, u, s = summary_of(name, function)
    return {c.field: check_safety(c, u, p.units, p.cfg, p.transitive(u))
            for c in detect_candidates(s, p.layout)}


# --- analysis ----------------------------------------------------------------

def test_fill_summary():
    _, _, s = summary_of("fill", "fill(uint256[])")
    acc = s.per_field["totalSupply"]
    assert (acc.reads, acc.writes, acc.total) == (data, data, data * 2)
    assert s.per_field["owner"].total == 1
    assert "balanceOf" not in s.per_field  # mappings are never candidates


@pytest.mark.parametrize("name", sorted(corpus.FIXTURES))
def test_total_is_reads_plus_writes(name):
    p = program(name)
    for u in p.units:
        s = summarize_storage(u, p.cfg, p.loops(u), p.layout, p.transitive(u))
        for acc in s.per_field.values():
            assert acc.total == acc.reads + acc.writes


def test_fill_candidates():
    cands = candidates_of("fill", "fill(uint256[])")
    assert set(cands) == {"totalSupply"}  # owner and sealed are read exactly once
    c = cands["totalSupply"]
    assert c.total_bound == data * 2 and not c.read_only and c.safe


def test_read_only_candidate():
    c = candidates_of("read_only", "peek()")["rate"]
    assert c.total_bound == 3 and c.read_only and c.safe


def test_transitive_access_unsafe():
    c = candidates_of("transitive_access", "bump()")["counter"]
    assert not c.safe and "transitive access" in c.reason_if_unsafe


def test_external_call_unsafe():
    c = candidates_of("external_call", "ping(address)")["pings"]
    assert not c.safe and "external call" in c.reason_if_unsafe


def test_caching_across_the_call_would_be_observable():
    # the original has already written pings when the callee runs; a cached
    # version would still show the old value to a re-entering caller
    fx = corpus.get("external_call")
    for case in fx.inputs([0]):
        r = execute(fx.code, case.calldata, case.storage)
        ops = [s.op for s in r.steps]
        call = ops.index("CALL")
        assert "SSTORE" in ops[:call] and "SLOAD" in ops[call:]


def test_caching_across_shared_code_changes_the_result():
    fx = corpus.get("transitive_access")
    for case in fx.inputs([0, 3]):
        if case.function != "bump()":
            continue
        c = case.storage.get(0, 0)
        r = execute(fx.code, case.calldata, case.storage)
        assert r.storage[0] == 2 * (c + 1) + 1
        cached = c + 2  # local copy, bumped twice, written back over touch()'s store
        assert cached != r.storage[0]


@pytest.mark.parametrize("name", sorted(corpus.FIXTURES))
def test_detection_has_no_false_negatives(name):
    fx = corpus.get(name)
    p = program(name)
    found = {}
    for case in fx.inputs(range(9)):
        u = unit_for_case(p, case)
        excluded = p.transitive_pcs(u)
        r = execute(fx.code, case.calldata, case.storage)
        counts = {}
        for pc, op, slot in r.storage_accesses:
            if pc in excluded or slot not in p.layout.scalars:
                continue
            counts[slot] = counts.get(slot, 0) + 1
        for slot, n in counts.items():
            if n >= 2:
                found.setdefault(u.name, set()).add(p.layout.scalars[slot].name)
    for fn, fields in found.items():
        assert fields <= set(candidates_of(name, fn))


def test_optimized_fill_has_no_parametric_candidate():
    cands = candidates_of("fill_opt", "fill(uint256[])")
    assert cands["totalSupply"].total_bound == 2
    assert all(c.total_bound.degree == 0 for c in cands.values())


# --- savings -----------------------------------------------------------------

def savings_of(name, function):
    p, u, s = summary_of(name, function)
    whole = p.analyze(u, CostModelConfig(), SCHED).total()
    best = p.analyze(u, CostModelConfig(), SCHED.best_case()).total()
    (c,) = detect_candidates(s, p.layout)
    return estimate_savings(s, c, SCHED, whole, best)


def test_fill_savings():
    worst, best = savings_of("fill", "fill(uint256[])")
    assert worst >= Fraction(40, 100)
    assert best >= Fraction(15, 100)
    assert 0 <= best <= worst <= 1


def test_read_only_savings_formula():
    worst, best = savings_of("read_only", "peek()")
    expected = Fraction(3 * SCHED.sload - (SCHED.sload + 3 * 3), 3 * SCHED.sload)
    assert worst == best == expected


def test_estimate_tracks_the_compiled_pair():
    po, pn = program("fill"), program("fill_opt")
    for sched, est in zip((SCHED, SCHED.best_case()), savings_of("fill", "fill(uint256[])")):
        a = po.analyze(po.unit("fill(uint256[])"), CostModelConfig(), sched).entries["all"]
        b = pn.analyze(pn.unit("fill(uint256[])"), CostModelConfig(), sched).entries["all"]
        real = 1 - b.coeff(("data",)) / a.coeff(("data",))
        assert abs(real - est) < Fraction(1, 100)


# --- transform ---------------------------------------------------------------

FILL = corpus.get("fill").source


def body_statements(src, name):
    span = find_function(src, name)
    body = src[span.body_open + 1:span.body_close]
    return [l.strip() for l in body.splitlines() if l.strip()]


def test_fill_listing_shape():
    out = transform(FILL, "fill", "totalSupply")
    stmts = body_statements(out.new_source, "fill")
    assert stmts[0] == "uint256 totalSupply = get_field_totalSupply();"
    assert stmts[-1] == "set_field_totalSupply(totalSupply);"
    assert out.getter_name == "get_field_totalSupply"
    assert out.setter_name == "set_field_totalSupply"
    assert "function get_field_totalSupply() internal view returns (uint256)" in out.new_source
    assert "function set_field_totalSupply(uint256 value) internal" in out.new_source


def test_fill_pair_matches_corpus():
    assert transform(FILL, "fill", "totalSupply").new_source == corpus.get("fill_opt").source


def test_read_only_has_no_setter():
    src = corpus.get("read_only").source
    out = transform(src, "peek", "rate", read_only=True)
    assert out.setter_name is None
    assert "set_field_" not in out.new_source
    assert body_statements(out.new_source, "peek")[0] == "uint256 rate = get_field_rate();"


def test_setter_before_every_return():
    src = """contract C {
    uint256 x;
    function f(uint256 a) returns (uint256) {
        x += a;
        if (a > 3) return x;
        x += 1;
        return x + 1;
    }
}
"""
    out = transform(src, "f", "x").new_source
    assert out.count("{ set_field_x(x); return x; }") == 1
    assert out.count("{ set_field_x(x); return x + 1; }") == 1


@pytest.mark.parametrize("src,field", [
    ("contract C { uint256 x; function f() { assembly { sstore(0, 1) } x = 1; } }", "x"),
    ("contract C { uint256 x; function f() { uint256 x = 2; x += 1; } }", "x"),
    ("contract C { uint256 x; function f(uint x) { x += 1; } }", "x"),
])
def test_unsupported(src, field):
    with pytest.raises(UnsupportedSyntax):
        transform(src, "f", field)


def test_function_not_found():
    with pytest.raises(FunctionNotFound):
        transform(FILL, "drain", "totalSupply")
    # a mention inside a comment is not a declaration
    with pytest.raises(FunctionNotFound):
        transform("// function g() { }\ncontract C { }", "g", "x")


@pytest.mark.parametrize("name,function,field,read_only", [
    ("fill", "fill", "totalSupply", False),
    ("read_only", "peek", "rate", True),
    ("transitive_access", "bump", "counter", False),
])
def test_textual_integrity(name, function, field, read_only):
    src = corpus.get(name).source
    new = transform(src, function, field, read_only).new_source
    ops = difflib.SequenceMatcher(None, src, new, autojunk=False).get_opcodes()
    assert {tag for tag, *_ in ops} <= {"equal", "insert"}


def test_field_type_is_kept():
    src = "contract C {\n    uint64 x;\n    function f() {\n        x += 1;\n        x += 1;\n    }\n}\n"
    out = transform(src, "f", "x").new_source
    assert "uint64 x = get_field_x();" in out
    assert "returns (uint64)" in out


def test_opt_path():
    assert opt_path("a/contract.sol") == "a/contract_opt.sol"


def test_optimize_function_end_to_end():
    p = program("fill")
    o = optimize_function(p, p.unit("fill(uint256[])"), FILL)
    assert o.applied == ["totalSupply"]
    assert o.new_source == corpus.get("fill_opt").source
    row = o.to_json()["candidates"][0]
    assert row["safe"] and row["total"] == "2*data" and row["savings_worst"] >= 0.4

    p = program("transitive_access")
    o = optimize_function(p, p.unit("bump()"), corpus.get("transitive_access").source)
    assert o.applied == [] and o.new_source is None
