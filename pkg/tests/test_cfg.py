import pytest
from hypothesis import given, strategies as st

import oracles
from conftest import program
from gasbound import corpus
from gasbound.cfg.build import InvalidJumpTarget, build_cfg
from gasbound.cfg.dominators import immediate_dominators
from gasbound.cfg.dot import to_dot
from gasbound.cfg.functions import dispatcher_blocks, split_functions
from gasbound.cfg.loops import find_loops
from gasbound.evm.asm import assemble
from gasbound.evm.disasm import disassemble
from gasbound.interp import execute


def cfg_of(text, strict=True):
    return build_cfg(disassemble(assemble(text).code), strict=strict)


def jump_edges(cfg):
    return {(b.end, s[0]) for b in cfg.blocks.values() for s in b.successors
            if b.terminator.mnemonic in ("JUMP", "JUMPI")}


def test_constant_jump():
    cfg = build_cfg(disassemble(bytes.fromhex("600456fe5b00")))
    assert (0, 4) in cfg.pc_edges()
    assert all(b[0] != 3 for b in cfg.blocks)  # the INVALID after JUMP is dead


def test_invalid_target():
    with pytest.raises(InvalidJumpTarget) as e:
        build_cfg(disassemble(bytes.fromhex("600356005b")))
    assert e.value.pc == 2


SHARED = """
PUSH 0 | CALLDATALOAD | PUSH @b | JUMPI
PUSH @t1 | PUSH @shared | JUMP
b:
PUSH @t2 | PUSH @shared | JUMP
shared:
JUMP
t1:
STOP
t2:
STOP
"""


def test_shared_jump_block_gets_both_targets():
    a = assemble(SHARED)
    cfg = build_cfg(disassemble(a.code))
    shared = a.labels["shared"] + 1  # the JUMP after the JUMPDEST
    explored = {e for e in oracles.explore_jumps(disassemble(a.code)) if e[0] == shared}
    assert explored == {(shared, a.labels["t1"]), (shared, a.labels["t2"])}
    assert explored <= jump_edges(cfg)


@pytest.mark.parametrize("name", sorted(corpus.FIXTURES))
def test_cfg_covers_concrete_explorer(name):
    p = program(name)
    found = oracles.explore_jumps(p.instructions)
    assert all(t is not None for _, t in found)
    valid = {e for e in found if e[1] in p.cfg.jumpdests}
    assert valid <= jump_edges(p.cfg)


@pytest.mark.parametrize("name", sorted(corpus.FIXTURES))
def test_taken_jumps_exist_in_cfg(name):
    fx = corpus.get(name)
    p = program(name)
    edges = jump_edges(p.cfg)
    for case in fx.inputs(range(0, 9, 4)):
        r = execute(fx.code, case.calldata, case.storage)
        assert oracles.executed_jumps(r) <= edges


def test_selector_pattern():
    text = """
    PUSH 0 | CALLDATALOAD | PUSH 0xe0 | SHR
    DUP1 | PUSH4 0xa9059cbb | EQ | PUSH @f | JUMPI
    PUSH 0 | DUP1 | REVERT
    f:
    STOP
    """
    units = split_functions(cfg_of(text))
    assert [u.selector for u in units if u.kind == "function"] == [0xA9059CBB]


def test_no_dispatcher_is_anonymous():
    units = split_functions(cfg_of("PUSH 1 | PUSH 2 | ADD | POP | STOP"))
    assert len(units) == 1 and units[0].kind == "anonymous"


def test_empty_code():
    cfg = build_cfg([])
    assert cfg.blocks == {}
    assert split_functions(cfg) == []


def test_three_selectors():
    p = program("multi_function")
    fns = [u for u in p.units if u.kind == "function"]
    assert len(fns) == 3
    assert len({u.entry for u in fns}) == 3
    disp = dispatcher_blocks(p.cfg)
    for u in p.units:
        assert not (u.reachable_blocks & disp)


def test_counter_loop():
    p = program("array_loop")
    (loop,) = p.loops(p.unit("sum(uint256[])"))
    (cond,) = loop.exit_conditions
    assert (cond.op, cond.step, str(cond.limit)) == ("LT", 1, "<data>")
    assert cond.init.is_const and cond.init.value == 0


def test_loop_free():
    p = program("branch")
    assert p.loops(p.unit("check(uint256)")) == []


def test_nested_loops():
    p = program("nested_loops")
    outer, inner = sorted(p.loops(p.unit("pairs(uint256[])")), key=lambda l: -len(l.body))
    assert inner.body < outer.body


@pytest.mark.parametrize("name", sorted(corpus.FIXTURES))
def test_loop_headers_dominate(name):
    p = program(name)
    for u in p.units:
        for loop in find_loops(p.cfg, u):
            assert all(p.cfg.dominates(loop.header, n) for n in loop.body)
            assert all(h == loop.header for _, h in loop.back_edges)


def test_irreducible_loop_has_no_exit_conditions():
    # two entries into the same cycle
    text = """
    PUSH 0 | CALLDATALOAD | PUSH @b | JUMPI
    a:
    PUSH 0 | CALLDATALOAD | PUSH @b | JUMPI
    STOP
    b:
    PUSH @a | JUMP
    """
    cfg = cfg_of(text)
    (u,) = split_functions(cfg)
    loops = find_loops(cfg, u)
    assert loops and all(l.irreducible and not l.exit_conditions for l in loops)


graphs = st.integers(2, 9).flatmap(lambda n: st.lists(
    st.tuples(st.integers(0, n - 1), st.integers(0, n - 1)), max_size=3 * n))


@given(graphs)
def test_dominators_match_brute_force(edges):
    succ = {}
    for a, b in edges:
        succ.setdefault(a, []).append(b)
    idom = immediate_dominators(succ, 0)
    expected = oracles.dominator_sets(succ, 0)
    assert set(idom) == set(expected)
    for n in idom:
        chain, m = set(), n
        while m is not None:
            chain.add(m)
            m = idom[m]
        assert chain == expected[n]


def test_dot_dump():
    text = to_dot(program("branch").cfg)
    assert text.startswith("digraph")
    assert 'label="true"' in text and 'label="false"' in text
