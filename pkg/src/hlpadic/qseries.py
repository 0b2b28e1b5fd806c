"""Exact q-series primitives over the rationals.

Everything here works with :class:`fractions.Fraction`. The only place a
float shows up is :func:`pochhammer_inf`, which returns an
:class:`EvalResult` carrying a rigorous error bound.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence, Union

from mpmath.ctx_iv import MPIntervalContext

# a private interval context, so the precision set here never leaks into
# other users of mpmath
iv = MPIntervalContext()
iv.prec = 96

Rational = Union[int, Fraction]

EXACT = "exact"
APPROX = "approx"


def as_fraction(x) -> Fraction:
    """Coerce ints, Fractions and strings like ``"1/3"`` to a Fraction.

    Floats are refused: silently importing binary rounding into an exact
    computation is exactly what this package is trying to avoid.
    """
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool):
        raise TypeError("booleans are not rationals")
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x.strip())
    raise TypeError(f"expected an exact rational, got {type(x).__name__}")


def rational_param(x, name: str = "t") -> Fraction:
    """Validate a parameter such as t, u or alpha: exact and in (0, 1)."""
    v = as_fraction(x)
    if not 0 < v < 1:
        raise ValueError(f"{name} must lie strictly between 0 and 1, got {v}")
    return v


@dataclass(frozen=True)
class EvalResult:
    """A value that is either an exact rational or a float with an error bar.

    For approximate results ``|true - value| <= error_bound`` holds rigorously.
    """

    kind: str
    value: Union[Fraction, float]
    error_bound: float = 0.0

    @classmethod
    def exact(cls, value) -> "EvalResult":
        return cls(EXACT, as_fraction(value), 0.0)

    @classmethod
    def approx(cls, value: float, error_bound: float) -> "EvalResult":
        if error_bound < 0:
            raise ValueError("error bound must be nonnegative")
        return cls(APPROX, float(value), float(error_bound))

    @property
    def is_exact(self) -> bool:
        return self.kind == EXACT

    def __float__(self) -> float:
        return float(self.value)


def pochhammer(a, t, n: int) -> Fraction:
    """(a; t)_n, the product of (1 - a t^i) for i = 0 .. n-1."""
    if n < 0:
        raise ValueError("pochhammer length must be nonnegative")
    a = as_fraction(a)
    t = as_fraction(t)
    out = Fraction(1)
    power = Fraction(1)
    for _ in range(n):
        out *= 1 - a * power
        power *= t
    return out


def _interval(x: Fraction):
    return iv.mpf(x.numerator) / x.denominator


def pochhammer_inf(a, t, tol: float = 1e-12) -> EvalResult:
    """(a; t)_infinity to within ``tol``.

    The product is truncated after K factors, which are multiplied in
    interval arithmetic. For |a| < 1 the neglected tail satisfies
    |log prod_{i>=K} (1 - a t^i)| <= B_K = |a| t^K / ((1-t)(1-|a|)), so the
    truncation moves the partial product P_K by at most |P_K| (exp(B_K) - 1).
    K grows until that and the interval width together fit in ``tol``.
    """
    a = as_fraction(a)
    t = rational_param(t)
    if abs(a) >= 1:
        raise ValueError("pochhammer_inf needs |a| < 1")
    if a == 0:
        return EvalResult.exact(1)
    if tol <= 0:
        raise ValueError("tol must be positive")
    scale = abs(a) / ((1 - t) * (1 - abs(a)))
    a_iv, t_iv = _interval(a), _interval(t)
    partial = iv.mpf(1)
    power = iv.mpf(1)
    tail = scale
    while True:
        magnitude = float(abs(partial).b)
        if magnitude * 2.0**-52 > tol / 2:
            raise ValueError(f"(a;t)_inf is too large to resolve to tol={tol} in double precision")
        trunc_err = magnitude * math.expm1(float(tail) * (1 + 2.0**-50))
        if trunc_err <= tol / 4:
            break
        partial *= 1 - a_iv * power
        power *= t_iv
        tail *= t
    value = float(partial.mid)
    width = float(partial.delta)
    bound = trunc_err + width + abs(value) * 2.0**-52
    return EvalResult.approx(value, bound)


def qbinomial(a: int, b: int, t) -> Fraction:
    """Gaussian binomial [a choose b]_t, defined as 0 unless 0 <= b <= a."""
    if a < 0 or b < 0 or b > a:
        return Fraction(0)
    t = as_fraction(t)
    b = min(b, a - b)
    num = Fraction(1)
    den = Fraction(1)
    for i in range(b):
        num *= 1 - t ** (a - i)
        den *= 1 - t ** (i + 1)
    return num / den


def qmultinomial(n: int, lam: Sequence[int], t) -> Fraction:
    """(t;t)_n divided by the product of (t;t)_{m_i} over the part values i."""
    if len(lam) != n:
        raise ValueError(f"signature has length {len(lam)}, expected {n}")
    t = as_fraction(t)
    out = pochhammer(t, t, n)
    for m in Counter(lam).values():
        out /= pochhammer(t, t, m)
    return out


def qhyp_bar(n: int, a: Sequence, b: Sequence, t, z) -> Fraction:
    """Normalized terminating basic hypergeometric sum.

    Returns sum_{k=0}^n z^k (t^-n; t)_k / (t; t)_k * prod_i (a_i; t)_k (b_i t^k; t)_{n-k}.
    Because the denominators (b_i; t)_k of the usual series are cleared, the
    sum is a polynomial in the b_i and never divides by zero.
    """
    if n < 0:
        raise ValueError("n must be nonnegative")
    if len(a) != len(b):
        raise ValueError("need as many lower as upper parameters")
    t = as_fraction(t)
    z = as_fraction(z)
    a = [as_fraction(x) for x in a]
    b = [as_fraction(x) for x in b]
    top = t ** (-n)
    total = Fraction(0)
    for k in range(n + 1):
        term = z**k * pochhammer(top, t, k) / pochhammer(t, t, k)
        if term == 0:
            continue
        for ai, bi in zip(a, b):
            term *= pochhammer(ai, t, k) * pochhammer(bi * t**k, t, n - k)
        total += term
    return total


def negative_binomial_tail(dim: int, z, start: int) -> Fraction:
    """An exact rational upper bound for sum_{s >= start} C(s + dim - 1, dim - 1) z^s.

    This counts, with weight z^s, the compositions of s into ``dim`` parts, so
    it bounds tails of laws whose terms are dominated by z^{size}. Terms are
    summed exactly until the ratio of consecutive terms drops below
    (1 + z) / 2, and the remainder is bounded by a geometric series (the
    ratios decrease in s towards z).
    """
    if dim < 1:
        raise ValueError("dim must be positive")
    z = as_fraction(z)
    if not 0 <= z < 1:
        raise ValueError("the series converges only for 0 <= z < 1")
    start = max(start, 0)
    if z == 0:
        return Fraction(1 if start == 0 else 0)
    term = Fraction(math.comb(start + dim - 1, dim - 1)) * z**start
    total = Fraction(0)
    threshold = (1 + z) / 2
    s = start
    while True:
        ratio = Fraction(s + dim, s + 1) * z
        if ratio <= threshold:
            return total + term / (1 - ratio)
        total += term
        term *= ratio
        s += 1
