"""Abstract stack values for jump resolution and parameter tracking.

Besides exact constants and raw calldata words, values that are affine in
function parameters (array lengths, scalar arguments) are kept as ``lin``
so that loop limits and memory offsets can be expressed symbolically.
Affine values ignore 256-bit wrap-around.
"""

from dataclasses import dataclass
from typing import Optional

from gasbound.bounds.poly import Poly, array_length_param, scalar_param
from gasbound.evm.arith import PURE

CONST, CDWORD, CDSIZE, LIN, UNKNOWN = "const", "cdword", "cdsize", "lin", "unknown"

# keeps affine arithmetic away from wrap-around territory
_SMALL = 1 << 64


@dataclass(frozen=True)
class AbstractValue:
    kind: str
    value: object = None

    @staticmethod
    def const(v: int) -> "AbstractValue":
        return AbstractValue(CONST, v)

    @staticmethod
    def lin(p: Poly) -> "AbstractValue":
        if p.is_constant():
            c = p.coeff()
            if c.denominator == 1 and c >= 0:
                return AbstractValue(CONST, int(c))
        return AbstractValue(LIN, p)

    @property
    def is_const(self) -> bool:
        return self.kind == CONST

    @property
    def is_unknown(self) -> bool:
        return self.kind == UNKNOWN

    def as_linear(self) -> Optional[Poly]:
        """Affine form over parameters, or None when not expressible."""
        if self.kind == CONST:
            return Poly.const(self.value)
        if self.kind == LIN:
            return self.value
        if self.kind == CDWORD and self.value >= 4 and (self.value - 4) % 32 == 0:
            return Poly.var(scalar_param((self.value - 4) // 32).name)
        return None

    def join(self, other: "AbstractValue") -> "AbstractValue":
        return self if self == other else UNKNOWN_VALUE

    def __str__(self):
        if self.kind == CONST:
            return hex(self.value)
        if self.kind == CDWORD:
            return f"cd[{self.value:#x}]"
        if self.kind == LIN:
            return f"<{self.value.render()}>"
        return self.kind


UNKNOWN_VALUE = AbstractValue(UNKNOWN)


def _array_length_of(p: Poly) -> Optional[Poly]:
    """``CALLDATALOAD(4 + argK)`` reads the length of dynamic array argument K."""
    if p.coeff() != 4 or len(p.terms) != 2:
        return None
    (mono, c), = [(m, c) for m, c in p.terms.items() if m]
    if c != 1 or len(mono) != 1 or not mono[0].startswith("arg"):
        return None
    return Poly.var(array_length_param(int(mono[0][3:])).name)


def transfer(mnemonic: str, args: list, pc: int = 0) -> AbstractValue:
    """Result of a single-output operation on abstract operands (top first)."""
    if all(a.kind == CONST for a in args) and mnemonic in PURE:
        return AbstractValue.const(PURE[mnemonic](*(a.value for a in args)))
    if mnemonic == "PC":
        return AbstractValue.const(pc)
    if mnemonic == "CALLDATASIZE":
        return AbstractValue(CDSIZE)
    if mnemonic == "CALLDATALOAD":
        (off,) = args
        if off.kind == CONST:
            return AbstractValue(CDWORD, off.value)
        p = off.as_linear()
        if p is not None:
            length = _array_length_of(p)
            if length is not None:
                return AbstractValue.lin(length)
        return UNKNOWN_VALUE
    if mnemonic in ("ADD", "SUB", "MUL", "SHL"):
        return _affine(mnemonic, args)
    return UNKNOWN_VALUE


def _affine(mnemonic, args) -> AbstractValue:
    a, b = args
    pa, pb = a.as_linear(), b.as_linear()
    if pa is None or pb is None:
        return UNKNOWN_VALUE
    if mnemonic == "ADD":
        return AbstractValue.lin(pa + pb)
    if mnemonic == "SUB":
        return AbstractValue.lin(pa - pb)
    if mnemonic == "MUL":
        if pa.is_constant() and pa.coeff() < _SMALL:
            return AbstractValue.lin(pb * pa.coeff())
        if pb.is_constant() and pb.coeff() < _SMALL:
            return AbstractValue.lin(pa * pb.coeff())
        return UNKNOWN_VALUE
    # SHL: a is the shift amount
    if pa.is_constant() and pa.coeff() < 64:
        return AbstractValue.lin(pb * (1 << int(pa.coeff())))
    return UNKNOWN_VALUE
