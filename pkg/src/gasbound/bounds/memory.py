"""Memory footprint of instructions and the memory-expansion gas bound."""

import math
from fractions import Fraction
from typing import Optional

from gasbound.bounds.poly import INF, ZERO, Poly, SymbolicBound

# mnemonic -> list of (offset operand index, size operand index or fixed size)
_ACCESS = {
    "MLOAD": [(0, 32)],
    "MSTORE": [(0, 32)],
    "MSTORE8": [(0, 1)],
    "SHA3": [(0, "1")],
    "CALLDATACOPY": [(0, "2")],
    "CODECOPY": [(0, "2")],
    "RETURNDATACOPY": [(0, "2")],
    "EXTCODECOPY": [(1, "3")],
    "RETURN": [(0, "1")],
    "REVERT": [(0, "1")],
    "CREATE": [(1, "2")],
    "CREATE2": [(1, "2")],
    "CALL": [(3, "4"), (5, "6")],
    "CALLCODE": [(3, "4"), (5, "6")],
    "DELEGATECALL": [(2, "3"), (4, "5")],
    "STATICCALL": [(2, "3"), (4, "5")],
    **{f"LOG{n}": [(0, "1")] for n in range(5)},
}


def ceil_words(p: Poly) -> Poly:
    """Upper bound on ``ceil(p / 32)`` for an integer-valued affine ``p``.

    Exact when every parameter coefficient is a multiple of 32.
    """
    p = p.clip_negative()
    c0 = p.coeff()
    linear = Poly({m: c / 32 for m, c in p.terms.items() if m})
    if all(c % 32 == 0 for m, c in p.terms.items() if m):
        return linear + (-(-int(c0) // 32))
    return linear + Fraction(c0 + 31, 32)


def words_of(size) -> SymbolicBound:
    """``ceil(size / 32)`` for an abstract size operand."""
    p = size.as_linear()
    if p is None:
        return INF
    return SymbolicBound(ceil_words(p))


def accessed_words(mnemonic: str, operands) -> Optional[SymbolicBound]:
    """Words of memory an instruction may touch (highest word index + 1).

    None when the instruction touches no memory; unbounded when an offset or
    size is not trackable.
    """
    access = _ACCESS.get(mnemonic)
    if access is None:
        return None
    best = None
    for off_i, size in access:
        if isinstance(size, str):
            sz = operands[int(size)]
            if sz.is_const and sz.value == 0:
                continue
            sz_p = sz.as_linear()
        else:
            sz_p = Poly.const(size)
        off_p = operands[off_i].as_linear()
        if off_p is None or sz_p is None:
            return INF
        words = SymbolicBound(ceil_words(off_p + sz_p))
        best = words if best is None else best.join(words)
    return best


def memory_gas(words: SymbolicBound, linear: int = 3, divisor: int = 512) -> SymbolicBound:
    """``linear * A + floor(A**2 / divisor)`` for a word bound ``A``."""
    if words.unbounded:
        return INF
    if words.is_zero():
        return ZERO
    a = words.poly
    if a.is_constant():
        c = math.ceil(a.coeff())
        return SymbolicBound.const(linear * c + c * c // divisor)
    return SymbolicBound(a * linear, ((a, divisor),))
