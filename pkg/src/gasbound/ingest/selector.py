import re
from dataclasses import dataclass
from typing import Optional

from gasbound.evm.keccak import keccak256

_HEX = re.compile(r"^0x[0-9a-fA-F]{8}$")
_SIG = re.compile(r"^[A-Za-z_$][A-Za-z0-9_$]*\([A-Za-z0-9_$,\[\]()]*\)$")


class BadSelector(ValueError):
    pass


@dataclass(frozen=True)
class Selector:
    bytes4: int
    signature: Optional[str] = None

    @property
    def hex(self) -> str:
        return f"0x{self.bytes4:08x}"

    def __eq__(self, other):
        if isinstance(other, Selector):
            return self.bytes4 == other.bytes4
        return NotImplemented

    def __hash__(self):
        return hash(self.bytes4)


def selector_of(signature: str) -> int:
    return int.from_bytes(keccak256(signature.encode())[:4], "big")


def resolve_selector(text: str) -> Selector:
    """``0x`` + 8 hex digits passes through; a canonical signature is hashed."""
    text = text.strip()
    if _HEX.match(text):
        return Selector(int(text, 16))
    if _SIG.match(text) and " " not in text:
        return Selector(selector_of(text), text)
    raise BadSelector(f"not a selector or canonical signature: {text!r}")


def load_signatures(text: str) -> dict:
    """One canonical signature per line; returns ``{selector: signature}``."""
    out = {}
    for line in text.splitlines():
        line = line.split("#", 1)[0].strip()
        if line:
            sel = resolve_selector(line)
            out[sel.bytes4] = sel.signature
    return out
