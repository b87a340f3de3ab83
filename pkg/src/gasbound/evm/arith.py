"""Exact 256-bit semantics of the stack-only EVM operations.

Operands are given top-of-stack first, as the yellow paper numbers them.
"""

MOD = 1 << 256
MASK = MOD - 1
SIGN = 1 << 255


def to_signed(x: int) -> int:
    return x - MOD if x & SIGN else x


def to_unsigned(x: int) -> int:
    return x & MASK


def _sdiv(a, b):
    a, b = to_signed(a), to_signed(b)
    if b == 0:
        return 0
    q = abs(a) // abs(b)
    return to_unsigned(-q if (a < 0) != (b < 0) else q)


def _smod(a, b):
    a, b = to_signed(a), to_signed(b)
    if b == 0:
        return 0
    r = abs(a) % abs(b)
    return to_unsigned(-r if a < 0 else r)


def _signextend(b, x):
    if b >= 31:
        return x
    bit = 8 * b + 7
    mask = (1 << (bit + 1)) - 1
    if x & (1 << bit):
        return to_unsigned(x | ~mask)
    return x & mask


def _byte(i, x):
    return 0 if i >= 32 else (x >> (8 * (31 - i))) & 0xFF


def _sar(shift, x):
    if shift >= 256:
        return MASK if x & SIGN else 0
    return to_unsigned(to_signed(x) >> shift)


PURE = {
    "ADD": lambda a, b: (a + b) & MASK,
    "MUL": lambda a, b: (a * b) & MASK,
    "SUB": lambda a, b: (a - b) & MASK,
    "DIV": lambda a, b: 0 if b == 0 else a // b,
    "SDIV": _sdiv,
    "MOD": lambda a, b: 0 if b == 0 else a % b,
    "SMOD": _smod,
    "ADDMOD": lambda a, b, n: 0 if n == 0 else (a + b) % n,
    "MULMOD": lambda a, b, n: 0 if n == 0 else (a * b) % n,
    "EXP": lambda a, b: pow(a, b, MOD),
    "SIGNEXTEND": _signextend,
    "LT": lambda a, b: int(a < b),
    "GT": lambda a, b: int(a > b),
    "SLT": lambda a, b: int(to_signed(a) < to_signed(b)),
    "SGT": lambda a, b: int(to_signed(a) > to_signed(b)),
    "EQ": lambda a, b: int(a == b),
    "ISZERO": lambda a: int(a == 0),
    "AND": lambda a, b: a & b,
    "OR": lambda a, b: a | b,
    "XOR": lambda a, b: a ^ b,
    "NOT": lambda a: a ^ MASK,
    "BYTE": _byte,
    "SHL": lambda s, x: 0 if s >= 256 else (x << s) & MASK,
    "SHR": lambda s, x: 0 if s >= 256 else x >> s,
    "SAR": _sar,
}
