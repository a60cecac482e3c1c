"""Exact real-root counting for integer/rational polynomials.

Sturm sequences over Fractions: no rounding, suitable for certifying that a
polynomial has no roots in an interval.  Coefficients are ascending.
"""

from __future__ import annotations

from fractions import Fraction

__all__ = ["descartes_positive_bound", "sturm_sequence", "count_real_roots"]


def _trim(p: list[Fraction]) -> list[Fraction]:
    while p and p[-1] == 0:
        p.pop()
    return p


def _polyrem(a: list[Fraction], b: list[Fraction]) -> list[Fraction]:
    a = a[:]
    db, lb = len(b) - 1, b[-1]
    while len(a) - 1 >= db and _trim(a):
        da, la = len(a) - 1, a[-1]
        shift = da - db
        factor = la / lb
        for i, c in enumerate(b):
            a[i + shift] -= factor * c
        a = _trim(a)
        if not a:
            break
    return a


def _eval(p: list[Fraction], x: Fraction) -> Fraction:
    acc = Fraction(0)
    for c in reversed(p):
        acc = acc * x + c
    return acc


def _sign_at_inf(p: list[Fraction], positive: bool) -> int:
    lead = p[-1]
    if positive:
        s = lead
    else:
        s = lead if (len(p) - 1) % 2 == 0 else -lead
    return (s > 0) - (s < 0)


def sturm_sequence(coeffs) -> list[list[Fraction]]:
    p0 = _trim([Fraction(c) for c in coeffs])
    if len(p0) <= 1:
        raise ValueError("polynomial must be nonconstant")
    p1 = [i * c for i, c in enumerate(p0)][1:]
    seq = [p0, _trim(p1)]
    while len(seq[-1]) > 1:
        rem = _polyrem(seq[-2], seq[-1])
        if not rem:
            break
        seq.append([-c for c in rem])
    return seq


def _variations(signs) -> int:
    signs = [s for s in signs if s != 0]
    return sum(1 for a, b in zip(signs, signs[1:]) if a * b < 0)


def count_real_roots(coeffs, lo=None, hi=None) -> int:
    """Distinct real roots in (lo, hi]; None means the corresponding infinity."""
    seq = sturm_sequence(coeffs)

    def sig(x, positive_inf):
        out = []
        for p in seq:
            if x is None:
                out.append(_sign_at_inf(p, positive_inf))
            else:
                v = _eval(p, Fraction(x))
                out.append((v > 0) - (v < 0))
        return out

    return _variations(sig(lo, False)) - _variations(sig(hi, True))


def descartes_positive_bound(coeffs) -> int:
    """Descartes bound on positive real roots (0 means none)."""
    signs = [(Fraction(c) > 0) - (Fraction(c) < 0) for c in coeffs if c != 0]
    return _variations(signs)
