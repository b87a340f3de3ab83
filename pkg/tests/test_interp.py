import pytest
from hypothesis import given, strategies as st

import oracles
from conftest import program
from gasbound import corpus
from gasbound.evm.asm import assemble
from gasbound.evm.schedule import load_schedule
from gasbound.interp import execute, measure, memory_charges

SCHED = load_schedule()


def run(text, calldata=b"", storage=None, **kw):
    return execute(assemble(text).code, calldata, storage, **kw)


def test_add():
    r = execute(bytes.fromhex("600160010100"))
    assert r.status == "stop"
    assert r.gas_used == 9
    assert r.stack == [2]


def test_out_of_gas():
    r = execute(bytes.fromhex("600160010100"), gas_limit=5)
    assert r.status == "out_of_gas"
    assert r.gas_used == 5


def test_sstore_pricing():
    fresh = run("PUSH 1 | PUSH 0 | SSTORE | STOP")
    assert [s.gas for s in fresh.steps if s.op == "SSTORE"] == [20000]
    again = run("PUSH 1 | PUSH 0 | SSTORE | STOP", storage={0: 5})
    assert [s.gas for s in again.steps if s.op == "SSTORE"] == [5000]
    assert again.storage == {0: 1}


def test_wraps_at_256_bits():
    r = run("PUSH 1 | PUSH 0 | SUB | STOP")
    assert r.stack == [2**256 - 1]
    r = run("PUSH 1 | PUSH 0 | SUB | PUSH 2 | ADD | STOP")
    assert r.stack == [1]


def test_signed_ops():
    r = run("PUSH 2 | PUSH 7 | PUSH 0 | SUB | SDIV | STOP")  # -7 / 2
    assert r.stack == [2**256 - 3]


def test_sha3_is_keccak():
    r = run("PUSH 0x616263 | PUSH 0 | MSTORE | PUSH 3 | PUSH 29 | SHA3 | STOP")
    assert r.stack == [int.from_bytes(oracles.keccak256(b"abc"), "big")]
    sha = [s for s in r.steps if s.op == "SHA3"][0]
    assert sha.gas == SCHED.sha3_base + SCHED.sha3_word * 1


def test_unsupported_opcode_is_an_outcome():
    r = run("PUSH 0 | PUSH 0 | PUSH 0 | CREATE | STOP")
    assert r.status == "invalid" and "CREATE" in r.reason
    r = execute(bytes([0x0C]))
    assert r.status == "invalid"


def test_bad_jump_is_invalid():
    r = run("PUSH 3 | JUMP | STOP")
    assert r.status == "invalid"


def test_revert_keeps_data():
    r = run("PUSH 0xff | PUSH 0 | MSTORE8 | PUSH 1 | PUSH 0 | REVERT")
    assert r.status == "revert" and r.return_data == b"\xff"
    assert not r.success


def test_external_call_stub():
    r = run("PUSH 0 | PUSH 0 | PUSH 0 | PUSH 0 | PUSH 0 | PUSH 0xdead | GAS | CALL | STOP")
    assert r.status == "stop" and r.stack == [1]


@given(st.lists(st.tuples(st.sampled_from(["MSTORE", "MSTORE8", "MLOAD"]), st.integers(0, 4000)),
                max_size=12))
def test_memory_charges_telescope(ops):
    lines = []
    for op, off in ops:
        if op == "MLOAD":
            lines.append(f"PUSH {off} | MLOAD | POP")
        else:
            lines.append(f"PUSH 1 | PUSH {off} | {op}")
    r = run("\n".join(lines + ["STOP"]))
    a = r.memory_words
    assert memory_charges(r) == 3 * a + a * a // 512
    marks = [0]
    for op, off in ops:
        marks.append(max(marks[-1], (off + (1 if op == "MSTORE8" else 32) + 31) // 32))
    assert a == marks[-1]


@pytest.mark.parametrize("name", sorted(corpus.FIXTURES))
def test_deterministic(name):
    fx = corpus.get(name)
    for case in fx.inputs([0, 5]):
        a = execute(fx.code, case.calldata, case.storage)
        b = execute(fx.code, case.calldata, case.storage)
        assert (a.status, a.gas_used, a.steps, a.storage) == (b.status, b.gas_used, b.steps, b.storage)


def test_measure_storage_optimization_on_fill():
    fx = corpus.get("fill")
    p = program("fill")
    case = fx.inputs([3])[0]
    r = execute(fx.code, case.calldata, case.storage)
    got = measure(r, "instructions", "storage-optimization", (), p.layout)
    assert got["totalSupply"] == 6
    assert sum(1 for _, _, slot in r.storage_accesses if slot == 3) == 6


def test_measure_all_is_gas_used_minus_memory():
    fx = corpus.get("straight_line")
    r = execute(fx.code)
    assert measure(r) == {"all": r.gas_used}
    fx = corpus.get("branch")
    case = fx.inputs([8])[0]
    r = execute(fx.code, case.calldata, case.storage)
    assert measure(r)["all"] + memory_charges(r) == r.gas_used


def test_measure_selected_counts_opcodes():
    fx = corpus.get("storage_loop")
    case = fx.inputs([4])[0]
    r = execute(fx.code, case.calldata, case.storage)
    assert measure(r, "instructions", "selected", ("sstore",)) == {"SSTORE": r.opcode_counts["SSTORE"]}
