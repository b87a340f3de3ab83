"""Sparse multivariate polynomials and the symbolic bound type.

A monomial is a sorted tuple of parameter names (repeats encode powers), the
empty tuple being the constant monomial. Coefficients are ``Fraction``.
"""

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Optional, Union

MAX_DEGREE = 2

Monomial = tuple
Number = Union[int, Fraction]


class MissingBinding(KeyError):
    pass


class Poly:
    __slots__ = ("terms",)

    def __init__(self, terms: Optional[Mapping] = None):
        clean = {}
        for mono, c in (terms or {}).items():
            c = Fraction(c)
            if c:
                key = tuple(sorted(mono))
                clean[key] = clean.get(key, Fraction(0)) + c
                if not clean[key]:
                    del clean[key]
        self.terms = clean

    @classmethod
    def const(cls, c: Number) -> "Poly":
        return cls({(): c})

    @classmethod
    def var(cls, name: str, coeff: Number = 1) -> "Poly":
        return cls({(name,): coeff})

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = Poly.const(other)
        if not isinstance(other, Poly):
            return NotImplemented
        return self.terms == other.terms

    def __bool__(self):
        return bool(self.terms)

    def __add__(self, other):
        if isinstance(other, (int, Fraction)):
            other = Poly.const(other)
        terms = dict(self.terms)
        for mono, c in other.terms.items():
            terms[mono] = terms.get(mono, 0) + c
        return Poly(terms)

    __radd__ = __add__

    def __neg__(self):
        return Poly({m: -c for m, c in self.terms.items()})

    def __sub__(self, other):
        if isinstance(other, (int, Fraction)):
            other = Poly.const(other)
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return Poly({m: c * other for m, c in self.terms.items()})
        terms = {}
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                mono = tuple(sorted(m1 + m2))
                terms[mono] = terms.get(mono, 0) + c1 * c2
        return Poly(terms)

    __rmul__ = __mul__

    def coeff(self, mono=()) -> Fraction:
        return self.terms.get(tuple(sorted(mono)), Fraction(0))

    @property
    def degree(self) -> int:
        return max((len(m) for m in self.terms), default=0)

    @property
    def params(self) -> set:
        return {p for m in self.terms for p in m}

    def is_constant(self) -> bool:
        return all(m == () for m in self.terms)

    def is_nonnegative(self) -> bool:
        return all(c >= 0 for c in self.terms.values())

    def clip_negative(self) -> "Poly":
        """Drop negative terms; an upper bound when every parameter is >= 0."""
        return Poly({m: c for m, c in self.terms.items() if c > 0})

    def join(self, other: "Poly") -> "Poly":
        """Coefficient-wise maximum (an upper bound of both for params >= 0)."""
        monos = set(self.terms) | set(other.terms)
        return Poly({m: max(self.coeff(m), other.coeff(m)) for m in monos})

    def evaluate(self, bindings: Mapping[str, int]) -> Fraction:
        total = Fraction(0)
        for mono, c in self.terms.items():
            term = c
            for p in mono:
                if p not in bindings:
                    raise MissingBinding(p)
                term *= bindings[p]
            total += term
        return total

    def sorted_terms(self):
        """Ascending degree, then lexicographic monomial."""
        return sorted(self.terms.items(), key=lambda mc: (len(mc[0]), mc[0]))

    def render(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for mono, c in self.sorted_terms():
            text = _render_coeff(abs(c))
            if mono:
                names = _render_mono(mono)
                text = names if abs(c) == 1 else f"{text}*{names}"
            parts.append(("-" if c < 0 else "+", text))
        out = ("-" if parts[0][0] == "-" else "") + parts[0][1]
        for sign, text in parts[1:]:
            out += sign + text
        return out

    def __repr__(self):
        return f"Poly({self.render()})"

    def to_json(self):
        return [[list(m), _coeff_json(c)] for m, c in self.sorted_terms()]

    @classmethod
    def from_json(cls, data) -> "Poly":
        return cls({tuple(m): _coeff_parse(c) for m, c in data})


def _render_coeff(c: Fraction) -> str:
    return str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"


def _render_mono(mono) -> str:
    out = []
    i = 0
    while i < len(mono):
        j = i
        while j < len(mono) and mono[j] == mono[i]:
            j += 1
        power = j - i
        out.append(mono[i] if power == 1 else f"{mono[i]}^{power}")
        i = j
    return "*".join(out)


def _coeff_json(c: Fraction):
    return c.numerator if c.denominator == 1 else f"{c.numerator}/{c.denominator}"


def _coeff_parse(c) -> Fraction:
    return Fraction(c) if isinstance(c, (int, str)) else Fraction(str(c))


@dataclass(frozen=True)
class Param:
    """A non-negative integer quantity a bound is expressed over.

    ``origin`` is one of ``("array_length", arg)``, ``("scalar", arg)``,
    ``("storage", slot)`` or ``("unknown", None)``.
    """

    name: str
    origin: tuple


def array_length_param(arg: int) -> Param:
    return Param("data" if arg == 0 else f"data{arg}", ("array_length", arg))


def scalar_param(arg: int) -> Param:
    return Param(f"arg{arg}", ("scalar", arg))


@dataclass(frozen=True)
class SymbolicBound:
    """Upper bound ``poly + sum(floor(inner**2 / divisor))`` or infinity."""

    poly: Poly = field(default_factory=Poly)
    mem_terms: tuple = ()
    unbounded: bool = False

    @classmethod
    def const(cls, c: Number) -> "SymbolicBound":
        return cls(Poly.const(c))

    @classmethod
    def of(cls, poly: Poly) -> "SymbolicBound":
        return cls(poly)

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            return not self.unbounded and not self.mem_terms and self.poly == other
        if isinstance(other, Poly):
            return not self.unbounded and not self.mem_terms and self.poly == other
        if not isinstance(other, SymbolicBound):
            return NotImplemented
        if self.unbounded or other.unbounded:
            return self.unbounded == other.unbounded
        return self.poly == other.poly and sorted(map(_mem_key, self.mem_terms)) == sorted(
            map(_mem_key, other.mem_terms))

    def __hash__(self):
        return hash((self.poly, self.unbounded))

    def is_zero(self) -> bool:
        return not self.unbounded and not self.poly and not self.mem_terms

    def is_one(self) -> bool:
        return self == 1

    def is_constant(self) -> bool:
        return not self.unbounded and not self.mem_terms and self.poly.is_constant()

    @property
    def degree(self) -> int:
        return self.poly.degree

    def __add__(self, other: "SymbolicBound") -> "SymbolicBound":
        if self.unbounded or other.unbounded:
            return INF
        return SymbolicBound(self.poly + other.poly, self.mem_terms + other.mem_terms)

    def times(self, factor: "SymbolicBound") -> "SymbolicBound":
        """Product with a loop multiplier; degree overflow becomes unbounded."""
        if self.is_zero() or factor.is_zero():
            return ZERO
        if self.unbounded or factor.unbounded:
            return INF
        if self.mem_terms or factor.mem_terms:
            raise ValueError("memory terms cannot be multiplied")
        prod = self.poly * factor.poly
        if prod.degree > MAX_DEGREE:
            return INF
        return SymbolicBound(prod)

    def scale(self, c: Number) -> "SymbolicBound":
        if c == 0:
            return ZERO
        if self.unbounded:
            return INF
        if self.mem_terms and c != 1:
            raise ValueError("memory terms cannot be scaled")
        return SymbolicBound(self.poly * c, self.mem_terms)

    def join(self, other: "SymbolicBound") -> "SymbolicBound":
        if self.unbounded or other.unbounded:
            return INF
        mem = list(self.mem_terms)
        for t in other.mem_terms:
            if _mem_key(t) not in map(_mem_key, mem):
                mem.append(t)
        return SymbolicBound(self.poly.join(other.poly), tuple(mem))

    def coeff(self, mono=()) -> Fraction:
        return self.poly.coeff(mono)

    @property
    def params(self) -> set:
        out = set(self.poly.params)
        for inner, _ in self.mem_terms:
            out |= inner.params
        return out

    def evaluate(self, bindings: Mapping[str, int]):
        """Exact value for the bindings; ``math.inf`` when unbounded."""
        if self.unbounded:
            return math.inf
        missing = self.params - set(bindings)
        if missing:
            raise MissingBinding(sorted(missing)[0])
        total = math.ceil(self.poly.evaluate(bindings))
        for inner, divisor in self.mem_terms:
            a = inner.evaluate(bindings)
            total += math.floor(a * a / divisor)
        return total

    def render(self) -> str:
        if self.unbounded:
            return "inf"
        text = self.poly.render()
        for inner, divisor in self.mem_terms:
            term = f"floor(({inner.render()})^2/{divisor})"
            text = term if text == "0" else f"{text}+{term}"
        return text

    def __str__(self):
        return self.render()

    def __repr__(self):
        return f"SymbolicBound({self.render()})"

    def to_json(self) -> dict:
        return {
            "text": self.render(),
            "poly": self.poly.to_json(),
            "mem": [{"inner": inner.to_json(), "divisor": d} for inner, d in self.mem_terms],
            "unbounded": self.unbounded,
        }

    @classmethod
    def from_json(cls, data: dict) -> "SymbolicBound":
        if data.get("unbounded"):
            return INF
        mem = tuple((Poly.from_json(m["inner"]), int(m["divisor"])) for m in data.get("mem", []))
        return cls(Poly.from_json(data["poly"]), mem)


def _mem_key(term):
    inner, divisor = term
    return (tuple(inner.sorted_terms()), divisor)


ZERO = SymbolicBound()
INF = SymbolicBound(unbounded=True)
