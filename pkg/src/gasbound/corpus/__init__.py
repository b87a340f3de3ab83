"""Hand-assembled fixture contracts with their sources, layouts and inputs.

Every fixture pairs a small Solidity source with bytecode written in the
label assembler, annotated with the source line of each instruction so a
matching source map can be produced.
"""

from dataclasses import dataclass, field
from functools import cached_property
from importlib import resources
from typing import Callable, Optional

from gasbound.evm.asm import Assembled, assemble
from gasbound.evm.keccak import keccak256
from gasbound.ingest.layout import StorageField, StorageLayout
from gasbound.ingest.selector import selector_of
from gasbound.interp.machine import Env

CALLER = Env().caller
ADDR_MASK = (1 << 160) - 1


def _text(name: str) -> str:
    return resources.files(__name__).joinpath(name).read_text()


def _layout(*fields) -> StorageLayout:
    return StorageLayout(tuple(StorageField(slot, name, kind) for slot, name, kind in fields))


@dataclass(frozen=True)
class Case:
    """One concrete call: which function, the size parameter and the state."""

    function: Optional[str]  # canonical signature, None for anonymous code
    data: int
    calldata: bytes
    storage: dict = field(default_factory=dict, hash=False)
    label: str = ""


def encode_call(signature: Optional[str], args=()) -> bytes:
    """ABI-encode a call whose arguments are uint words or lists of words."""
    if signature is None:
        return b""
    head, tail = [], []
    offset = 32 * len(args)
    for a in args:
        if isinstance(a, (list, tuple)):
            head.append(offset)
            tail.append(len(a))
            tail.extend(a)
            offset += 32 * (len(a) + 1)
        else:
            head.append(a)
    words = head + tail
    return selector_of(signature).to_bytes(4, "big") + b"".join(w.to_bytes(32, "big") for w in words)


@dataclass(frozen=True)
class Fixture:
    name: str
    asm_file: str
    source_file: str
    layout: StorageLayout
    signatures: tuple = ()
    cases: Callable = field(default=None, compare=False)  # (fixture, data) -> [Case]

    @cached_property
    def assembled(self) -> Assembled:
        return assemble(_text(self.asm_file))

    @property
    def code(self) -> bytes:
        return self.assembled.code

    @cached_property
    def source(self) -> str:
        return _text(self.source_file)

    @property
    def srcmap(self) -> str:
        return self.assembled.srcmap(self.source)

    @property
    def signature_map(self) -> dict:
        return {selector_of(s): s for s in self.signatures}

    def inputs(self, data_values=range(9)) -> list:
        out = []
        for d in data_values:
            out.extend(self.cases(self, d))
        return out


def _words(n: int, start: int = 0) -> list:
    """``n`` fill-style words: amount in the high bits, a non-zero address below."""
    return [((k + 1) << 160) | (0x1000 + start + k) for k in range(n)]


def _fill_cases(fx, d):
    sig = "fill(uint256[])"
    data = encode_call(sig, [_words(d)])
    base = {0: CALLER}
    out = [
        Case(sig, d, data, dict(base), "fresh balances"),
        Case(sig, d, data, {**base, 3: 1000}, "existing supply"),
    ]
    if d:
        key = _mapping_slot(0x1000, 2)
        out.append(Case(sig, d, data, {**base, key: 7}, "first balance set"))
    out.append(Case(sig, d, data, {0: CALLER, 1: 1}, "sealed"))
    out.append(Case(sig, d, data, {0: 0xBEEF}, "not owner"))
    return out


def _mapping_slot(key: int, slot: int) -> int:
    return int.from_bytes(keccak256(key.to_bytes(32, "big") + slot.to_bytes(32, "big")), "big")


def _array_cases(sig, storage_variants=({},)):
    def cases(fx, d):
        data = encode_call(sig, [[3 * k + 1 for k in range(d)]])
        return [Case(sig, d, data, dict(s), f"storage {i}") for i, s in enumerate(storage_variants)]
    return cases


def _straight_cases(fx, d):
    return [Case(None, d, b"")]


def _branch_cases(fx, d):
    sig = "check(uint256)"
    return [Case(sig, d, encode_call(sig, [3 * d + 1]), s, f"storage {i}")
            for i, s in enumerate(({}, {0: 5}))]


def _spin_cases(fx, d):
    sig = "spin()"
    return [Case(sig, d, encode_call(sig), s) for s in ({}, {0: 45})]


def _grow_cases(fx, d):
    sig = "grow(uint256)"
    return [Case(sig, d, encode_call(sig, [d]), s) for s in ({}, {0: 1})]


def _multi_cases(fx, d):
    out = [Case("admin()", d, encode_call("admin()"), {0: CALLER})]
    for s in ({0: CALLER}, {0: 0xBEEF}):
        out.append(Case("setAdmin(address)", d, encode_call("setAdmin(address)", [0x1234 + d]), s))
    data = encode_call("tally(uint256[])", [[k + 1 for k in range(d)]])
    out += [Case("tally(uint256[])", d, data, s) for s in ({}, {1: 9})]
    out.append(Case(None, d, b"\x00\x01", {}, "short calldata"))
    return out


def _shared_cases(fx, d):
    return [Case(sig, d, encode_call(sig), s) for sig in fx.signatures for s in ({}, {0: d})]


def _ping_cases(fx, d):
    sig = "ping(address)"
    return [Case(sig, d, encode_call(sig, [0xDEAD]), s) for s in ({}, {0: 3})]


def _peek_cases(fx, d):
    return [Case("peek()", d, encode_call("peek()"), {0: d})]


FIXTURES = {
    fx.name: fx
    for fx in [
        Fixture("straight_line", "straight.asm", "straight.sol", _layout(), (), _straight_cases),
        Fixture("branch", "branch.asm", "branch.sol", _layout((0, "flag", "BasicScalar")),
                ("check(uint256)",), _branch_cases),
        Fixture("array_loop", "summer.asm", "summer.sol", _layout(), ("sum(uint256[])",),
                _array_cases("sum(uint256[])")),
        Fixture("constant_loop", "spinner.asm", "spinner.sol", _layout((0, "total", "BasicScalar")),
                ("spin()",), _spin_cases),
        Fixture("nested_loops", "pairs.asm", "pairs.sol", _layout(), ("pairs(uint256[])",),
                _array_cases("pairs(uint256[])")),
        Fixture("storage_loop", "store.asm", "store.sol",
                _layout((0, "count", "BasicScalar"), (1, "values", "Mapping")),
                ("store(uint256[])",), _array_cases("store(uint256[])", ({}, {0: 4}))),
        Fixture("unresolvable_loop", "grower.asm", "grower.sol", _layout((0, "result", "BasicScalar")),
                ("grow(uint256)",), _grow_cases),
        Fixture("multi_function", "multi.asm", "multi.sol",
                _layout((0, "admin_", "BasicScalar"), (1, "hits", "BasicScalar")),
                ("admin()", "setAdmin(address)", "tally(uint256[])"), _multi_cases),
        Fixture("fill", "fill.asm", "fill.sol",
                _layout((0, "owner", "BasicScalar"), (1, "sealed", "BasicScalar"),
                        (2, "balanceOf", "Mapping"), (3, "totalSupply", "BasicScalar")),
                ("fill(uint256[])",), _fill_cases),
        Fixture("fill_opt", "fill_opt.asm", "fill_opt.sol",
                _layout((0, "owner", "BasicScalar"), (1, "sealed", "BasicScalar"),
                        (2, "balanceOf", "Mapping"), (3, "totalSupply", "BasicScalar")),
                ("fill(uint256[])",), _fill_cases),
        Fixture("transitive_access", "shared.asm", "shared.sol",
                _layout((0, "counter", "BasicScalar")), ("bump()", "touch()"), _shared_cases),
        Fixture("external_call", "pinger.asm", "pinger.sol", _layout((0, "pings", "BasicScalar")),
                ("ping(address)",), _ping_cases),
        Fixture("read_only", "reader.asm", "reader.sol", _layout((0, "rate", "BasicScalar")),
                ("peek()",), _peek_cases),
    ]
}

# the eight shapes every soundness run must cover
CORE = ("straight_line", "branch", "array_loop", "constant_loop", "nested_loops",
        "storage_loop", "unresolvable_loop", "multi_function")


def get(name: str) -> Fixture:
    return FIXTURES[name]
