"""Iteration bounds for counter loops."""

from fractions import Fraction

from gasbound.bounds.poly import INF, Poly, SymbolicBound


def _count(op: str, init: Poly, limit: Poly, step: int):
    """Header evaluations that take the continue edge, before dividing by the step.

    Returns None when the comparison cannot be bounded for this step sign.
    """
    if op == "LT" and step > 0:
        return limit - init
    if op == "LE" and step > 0:
        return limit - init + 1
    if op == "GT" and step < 0:
        # counting down to L stays clear of wrap-around only if L >= |s| - 1
        if not limit.is_constant() or limit.coeff() < -step - 1:
            return None
        return init - limit
    if op == "GE" and step < 0:
        if not limit.is_constant() or limit.coeff() < -step:
            return None
        return init - limit + 1
    if op == "NE":
        # counting up past the limit would wrap all the way round
        if step == 1 and (init == Poly() or (init.is_constant() and limit.is_constant()
                                             and init.coeff() <= limit.coeff())):
            return limit - init
        if step == -1 and limit == Poly():
            return init
    return None


def bound_from_condition(cond) -> SymbolicBound:
    """Upper bound on loop-body iterations for one exit condition."""
    if cond.step is None:
        return INF
    init, limit = cond.init.as_linear(), cond.limit.as_linear()
    if init is None or limit is None:
        return INF
    q = _count(cond.op, init, limit, cond.step)
    if q is None:
        return INF
    q = q.clip_negative()
    s = abs(cond.step)
    if s == 1:
        return SymbolicBound(q)
    if q.is_constant():
        return SymbolicBound.const(-(-q.coeff() // s))
    return SymbolicBound(q * Fraction(1, s) + Fraction(s - 1, s))


def infer_loop_bound(loop) -> SymbolicBound:
    """Tightest finite bound among the loop's exit conditions, else infinity."""
    if loop.irreducible:
        return INF
    best = INF
    for cond in loop.exit_conditions:
        b = bound_from_condition(cond)
        if b.unbounded:
            continue
        if best.unbounded or _tighter(b, best):
            best = b
    return best


def _tighter(a: SymbolicBound, b: SymbolicBound) -> bool:
    """``a`` no larger than ``b`` coefficient-wise (ties favour ``a`` when smaller degree)."""
    if a.degree != b.degree:
        return a.degree < b.degree
    monos = set(a.poly.terms) | set(b.poly.terms)
    return all(a.coeff(m) <= b.coeff(m) for m in monos)
