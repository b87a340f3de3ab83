import json

import pytest
from hypothesis import given, strategies as st

import oracles
from gasbound.evm.asm import assemble
from gasbound.evm.disasm import TruncatedPush, disassemble, encode
from gasbound.evm.keccak import keccak256
from gasbound.evm.opcodes import BY_NAME, INVALID, OPCODES, opcode_for
from gasbound.evm.schedule import (GasSchedule, NAMED_FAMILIES, family_of, load_schedule,
                                   worst_case_gas)

SCHED = load_schedule()


def test_disassemble_small():
    ins = disassemble(bytes.fromhex("6001600101"))
    assert [(i.pc, i.mnemonic, i.immediate) for i in ins] == [
        (0, "PUSH1", 1), (2, "PUSH1", 1), (4, "ADD", None)]


def test_disassemble_empty():
    assert disassemble(b"") == []


def test_truncated_push():
    with pytest.raises(TruncatedPush) as e:
        disassemble(bytes.fromhex("61ff"))
    assert e.value.pc == 0


def test_push32_keeps_full_immediate():
    code = b"\x7f" + bytes(range(1, 33))
    (ins,) = disassemble(code)
    assert ins.immediate == int.from_bytes(bytes(range(1, 33)), "big")


@given(st.binary(max_size=200))
def test_round_trip(code):
    try:
        ins = disassemble(code)
    except TruncatedPush as e:
        ins = disassemble(code[:e.pc])
        code = code[:e.pc]
    assert encode(ins) == code
    pcs = [i.pc for i in ins]
    assert pcs == sorted(set(pcs))
    for a, b in zip(ins, ins[1:]):
        assert b.pc == a.next_pc == a.pc + 1 + a.opcode.immediate_len


def test_opcode_table_total():
    pushes = {f"PUSH{n}" for n in range(1, 33)}
    for byte in range(256):
        op = opcode_for(byte)
        assert 0 <= op.immediate_len <= 32
        assert (op.immediate_len > 0) == (op.mnemonic in pushes)
    assert opcode_for(0x0C) is INVALID


@pytest.mark.parametrize("name,family", [
    ("ADD", "verylow"), ("MUL", "low"), ("STOP", "zero"), ("ADDRESS", "base"),
    ("ADDMOD", "mid"), ("JUMPI", "high"), ("SSTORE", "SSTORE"), ("SLOAD", "SLOAD"),
])
def test_family(name, family):
    assert str(family_of(BY_NAME[name])) == family


def test_every_opcode_has_one_family():
    for op in OPCODES.values():
        fam = family_of(op)
        assert str(fam) in NAMED_FAMILIES or str(fam) == op.mnemonic


@pytest.mark.parametrize("name,gas", [("SSTORE", 20000), ("MLOAD", 3), ("STOP", 0), ("SLOAD", 200),
                                      ("INVALID", 0)])
def test_worst_case_gas(name, gas):
    assert worst_case_gas(BY_NAME[name], SCHED) == gas


def test_override_wins():
    s = GasSchedule.from_dict({**SCHED.to_dict(), "overrides": {"ADD": 7}})
    assert worst_case_gas(BY_NAME["ADD"], s) == 7


def test_best_case_swaps_sstore():
    assert worst_case_gas(BY_NAME["SSTORE"], SCHED.best_case()) == 5000


def test_schedule_rejects_negative(tmp_path):
    bad = {**SCHED.to_dict(), "sload": -1}
    with pytest.raises(ValueError):
        GasSchedule.from_dict(bad)
    bad = {**SCHED.to_dict(), "sstore_set": 10, "sstore_reset": 20}
    with pytest.raises(ValueError):
        GasSchedule.from_dict(bad)
    path = tmp_path / "s.json"
    path.write_text(json.dumps(SCHED.to_dict()))
    assert load_schedule(path) == SCHED


@given(st.binary(max_size=300))
def test_keccak_matches_reference(data):
    assert keccak256(data) == oracles.keccak256(data)


def test_assembler_labels():
    a = assemble("PUSH @end | JUMP\nINVALID\nend:\nSTOP")
    ins = disassemble(a.code)
    assert [i.mnemonic for i in ins] == ["PUSH2", "JUMP", "INVALID", "JUMPDEST", "STOP"]
    assert ins[0].immediate == a.labels["end"] == 5
