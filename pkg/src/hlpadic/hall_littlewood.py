"""Hall-Littlewood polynomials evaluated at exact rational points.

Two independent routes are provided for every skew function: a dynamic
program over interlacing chains (the branching rule), and closed forms for
geometric progressions u, ut, ut^2, ... . The test-suite checks one against
the other.
"""

from __future__ import annotations

import itertools
import math
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Optional, Sequence

from gmpy2 import mpq

from .qseries import (
    EvalResult,
    as_fraction,
    pochhammer,
    pochhammer_inf,
    qhyp_bar,
    rational_param,
)
from .signatures import (
    check_signature,
    conjugate_count,
    interlace_P,
    interlace_Q,
    multiplicity,
    n_skew,
    n_stat,
    signatures_in_box,
)


@dataclass(frozen=True)
class Specialization:
    """Where a symmetric function gets evaluated.

    ``kind`` is ``"vars"`` (an explicit finite list), ``"geometric"``
    (u, u r, ..., u r^{J-1}) or ``"geometric_inf"`` (u, u r, u r^2, ...).
    """

    kind: str
    values: tuple = ()
    u: Optional[Fraction] = None
    ratio: Optional[Fraction] = None

    @classmethod
    def explicit(cls, xs: Sequence) -> "Specialization":
        return cls("vars", tuple(as_fraction(x) for x in xs))

    @classmethod
    def geometric(cls, u, ratio, length: int) -> "Specialization":
        u = as_fraction(u)
        ratio = as_fraction(ratio)
        return cls("geometric", geometric_values(u, ratio, length), u, ratio)

    @classmethod
    def geometric_inf(cls, u, ratio) -> "Specialization":
        u = as_fraction(u)
        ratio = rational_param(ratio, "ratio")
        if abs(u) >= 1:
            raise ValueError("an infinite geometric specialization needs |u| < 1")
        return cls("geometric_inf", (), u, ratio)

    @property
    def is_finite(self) -> bool:
        return self.kind != "geometric_inf"

    def __len__(self):
        if not self.is_finite:
            raise TypeError("infinite specialization has no length")
        return len(self.values)


def geometric_values(u, ratio, length: int) -> tuple:
    u = as_fraction(u)
    ratio = as_fraction(ratio)
    return tuple(u * ratio**i for i in range(length))


def _power(x: Fraction, e: int) -> Fraction:
    if x == 0 and e < 0:
        raise ZeroDivisionError("a variable equal to 0 cannot carry a negative exponent")
    return x**e


# --- polynomials ----------------------------------------------------------


def v_normalizer(lam: Sequence[int], t) -> Fraction:
    """prod over part values of (t;t)_m / (1-t)^m."""
    t = as_fraction(t)
    out = Fraction(1)
    for m in Counter(lam).values():
        out *= pochhammer(t, t, m) / (1 - t) ** m
    return out


def eval_P(lam: Sequence[int], xs: Sequence, t) -> Fraction:
    """P_lam(x_1, ..., x_n; t) for a signature lam of length n.

    Uses the symmetrization formula when the variables are pairwise distinct
    and the branching rule otherwise.
    """
    lam = check_signature(lam)
    xs = [as_fraction(x) for x in xs]
    t = as_fraction(t)
    if len(xs) != len(lam):
        raise ValueError(f"P_lam needs {len(lam)} variables, got {len(xs)}")
    if lam and lam[-1] < 0 and any(x == 0 for x in xs):
        raise ValueError("a variable is 0 but the signature has negative parts")
    if len(set(xs)) < len(xs):
        return eval_skewP_chain(lam, (), xs, t)
    n = len(lam)
    total = Fraction(0)
    for perm in itertools.permutations(range(n)):
        ys = [xs[p] for p in perm]
        term = Fraction(1)
        for y, p in zip(ys, lam):
            term *= _power(y, p)
        for i in range(n):
            for j in range(i + 1, n):
                term *= (ys[i] - t * ys[j]) / (ys[i] - ys[j])
        total += term
    return total / v_normalizer(lam, t)


def eval_Q(lam: Sequence[int], xs: Sequence, t) -> Fraction:
    """Q_lam = prod_i (t;t)_{m_i(lam)} P_lam, zero parts included."""
    t = as_fraction(t)
    out = eval_P(lam, xs, t)
    for m in Counter(lam).values():
        out *= pochhammer(t, t, m)
    return out


def principal_P(lam: Sequence[int], u, t) -> Fraction:
    """P_lam(u, ut, ..., ut^{n-1}) in closed form."""
    lam = check_signature(lam)
    u = as_fraction(u)
    t = as_fraction(t)
    out = _power(u, sum(lam)) * t ** n_stat(lam) * pochhammer(t, t, len(lam))
    for m in Counter(lam).values():
        out /= pochhammer(t, t, m)
    return out


# --- branching coefficients -----------------------------------------------


def _psi_raw(big: tuple, small: tuple, t: Fraction) -> Fraction:
    mb = Counter(big)
    ms = Counter(small)
    out = Fraction(1)
    for i, m in ms.items():
        if m == mb.get(i, 0) + 1:
            out *= 1 - t**m
    return out


def _phi_raw(nu: tuple, lam: tuple, t: Fraction) -> Fraction:
    mn = Counter(nu)
    ml = Counter(lam)
    out = Fraction(1)
    for i, m in mn.items():
        if m == ml.get(i, 0) + 1:
            out *= 1 - t**m
    return out


def psi(mu: Sequence[int], lam: Sequence[int], t) -> Fraction:
    """P-branching coefficient for lam (length n) growing into mu (length n+1)."""
    mu, lam = tuple(mu), tuple(lam)
    if not interlace_P(mu, lam):
        return Fraction(0)
    return _psi_raw(mu, lam, as_fraction(t))


def phi(nu: Sequence[int], lam: Sequence[int], t) -> Fraction:
    """Q-branching coefficient for lam growing into nu, both of length n."""
    nu, lam = tuple(nu), tuple(lam)
    if not interlace_Q(nu, lam):
        return Fraction(0)
    return _phi_raw(nu, lam, as_fraction(t))


# --- chain dynamic programs -----------------------------------------------


def _p_successors(kappa: tuple, lows: Sequence[int], highs: Sequence[int]):
    """Signatures one part longer that kappa P-interlaces into, within bounds."""
    length = len(kappa) + 1
    if length == 1:
        ranges = [range(lows[0], highs[0] + 1)]
    else:
        ranges = [range(max(kappa[0], lows[0]), highs[0] + 1)]
        for i in range(1, length - 1):
            ranges.append(range(max(kappa[i], lows[i]), min(kappa[i - 1], highs[i]) + 1))
        ranges.append(range(lows[-1], min(kappa[-1], highs[-1]) + 1))
    return itertools.product(*ranges)


def _q_successors(kappa: tuple, lows: Sequence[int], highs: Sequence[int]):
    """Signatures of the same length that kappa Q-interlaces into, within bounds."""
    if not kappa:
        return iter([()])
    ranges = [range(max(kappa[0], lows[0]), highs[0] + 1)]
    for i in range(1, len(kappa)):
        ranges.append(range(max(kappa[i], lows[i]), min(kappa[i - 1], highs[i]) + 1))
    return itertools.product(*ranges)


def _to_mpq(x: Fraction):
    return mpq(x.numerator, x.denominator)


def _to_fraction(x) -> Fraction:
    return Fraction(int(x.numerator), int(x.denominator))


@lru_cache(maxsize=1 << 18)
def _branch_factor(other: tuple, counted: tuple, t_num: int, t_den: int):
    """Product of (1 - t^m) over values whose multiplicity m in ``counted``
    exceeds that in ``other`` by exactly one. Same as _psi_raw(other, counted)
    and _phi_raw(counted, other), as a cached gmpy2 rational."""
    t = mpq(t_num, t_den)
    mo = Counter(other)
    out = mpq(1)
    for i, m in Counter(counted).items():
        if m == mo.get(i, 0) + 1:
            out *= 1 - t**m
    return out


class _Powers(dict):
    """Memoized integer powers of one rational."""

    def __init__(self, x: Fraction):
        super().__init__()
        self.x = _to_mpq(x)

    def __missing__(self, e: int):
        if self.x == 0 and e < 0:
            raise ZeroDivisionError("a variable equal to 0 cannot carry a negative exponent")
        value = self[e] = self.x**e
        return value


def _skewP_levels(lam, xs, t: Fraction, lo: int, hi: int) -> dict:
    level = {check_signature(lam): mpq(1)}
    for x in xs:
        powers = _Powers(x)
        nxt: dict = {}
        for kappa, val in level.items():
            length = len(kappa) + 1
            base = sum(kappa)
            for new in _p_successors(kappa, [lo] * length, [hi] * length):
                w = _branch_factor(new, kappa, t.numerator, t.denominator)
                if w:
                    nxt[new] = nxt.get(new, 0) + val * powers[sum(new) - base] * w
        level = nxt
    return level


def _skewQ_levels(lam, xs, t: Fraction, hi: int) -> dict:
    lam = check_signature(lam)
    n = len(lam)
    level = {lam: mpq(1)}
    lows = [min(lam, default=0)] * n
    highs = [hi] * n
    for x in xs:
        powers = _Powers(x)
        nxt: dict = {}
        for kappa, val in level.items():
            base = sum(kappa)
            for new in _q_successors(kappa, lows, highs):
                w = _branch_factor(kappa, new, t.numerator, t.denominator)
                if w:
                    nxt[new] = nxt.get(new, 0) + val * powers[sum(new) - base] * w
        level = nxt
    return level


def skewP_chain_all(lam: Sequence[int], xs: Sequence, t, lo: int, hi: int) -> dict:
    """P_{kappa/lam}(xs) for every kappa reachable with parts in [lo, hi].

    Returns a dict keyed by signatures of length len(lam) + len(xs).
    """
    xs = [as_fraction(x) for x in xs]
    level = _skewP_levels(lam, xs, as_fraction(t), lo, hi)
    return {k: _to_fraction(v) for k, v in level.items() if v}


def skewQ_chain_all(lam: Sequence[int], xs: Sequence, t, hi: int) -> dict:
    """Q_{kappa/lam}(xs) for every kappa reachable with parts at most hi."""
    xs = [as_fraction(x) for x in xs]
    level = _skewQ_levels(lam, xs, as_fraction(t), hi)
    return {k: _to_fraction(v) for k, v in level.items() if v}


def eval_skewP_chain(mu: Sequence[int], lam: Sequence[int], xs: Sequence, t) -> Fraction:
    """P_{mu/lam}(x_1, ..., x_k) by summing over interlacing chains.

    len(mu) must equal len(lam) + k. Intermediate signatures are pruned to
    the only window a chain can pass through: at a level r steps below mu,
    part i lies between mu_{i+r} and mu_i.
    """
    mu = check_signature(mu)
    lam = check_signature(lam)
    t = as_fraction(t)
    xs = [as_fraction(x) for x in xs]
    k = len(xs)
    if len(mu) != len(lam) + k:
        raise ValueError(
            f"skew P needs len(mu) = len(lam) + #variables, got {len(mu)}, {len(lam)}, {k}"
        )
    N = len(mu)
    if any(not (mu[i] >= lam[i] >= mu[i + k]) for i in range(len(lam))):
        return Fraction(0)
    level = {lam: Fraction(1)}
    for step, x in enumerate(xs):
        length = len(lam) + step + 1
        r = N - length
        lows = [mu[i + r] for i in range(length)]
        highs = [mu[i] for i in range(length)]
        nxt: dict = {}
        for kappa, val in level.items():
            base = sum(kappa)
            for new in _p_successors(kappa, lows, highs):
                w = val * _power(x, sum(new) - base) * _psi_raw(new, kappa, t)
                if w:
                    nxt[new] = nxt.get(new, 0) + w
        level = nxt
    return level.get(mu, Fraction(0))


def eval_skewQ_chain(nu: Sequence[int], lam: Sequence[int], xs: Sequence, t) -> Fraction:
    """Q_{nu/lam}(x_1, ..., x_k) by summing over Q-interlacing chains."""
    nu = check_signature(nu)
    lam = check_signature(lam)
    if len(nu) != len(lam):
        raise ValueError("skew Q needs signatures of equal length")
    t = as_fraction(t)
    xs = [as_fraction(x) for x in xs]
    n = len(nu)
    k = len(xs)
    if any(nu[i] < lam[i] for i in range(n)):
        return Fraction(0)
    level = {lam: Fraction(1)}
    for step, x in enumerate(xs):
        r = k - step - 1
        lows = [max(lam[i], nu[i + r]) if i + r < n else lam[i] for i in range(n)]
        highs = list(nu)
        nxt: dict = {}
        for kappa, val in level.items():
            base = sum(kappa)
            for new in _q_successors(kappa, lows, highs):
                w = val * _power(x, sum(new) - base) * _phi_raw(new, kappa, t)
                if w:
                    nxt[new] = nxt.get(new, 0) + w
        level = nxt
    return level.get(nu, Fraction(0))


# --- closed forms at geometric progressions --------------------------------


def _binom2(k: int) -> int:
    return k * (k - 1) // 2 if k > 1 else 0


def _check_nonneg(*sigs):
    for s in sigs:
        if s and s[-1] < 0:
            raise ValueError(f"expected a nonnegative signature, got {s}")


def skewP_principal_finite(mu: Sequence[int], lam: Sequence[int], u, J: int, t) -> Fraction:
    """P_{mu/lam}(u, ut, ..., ut^{J-1}) from the terminating 3phi2 product.

    mu and lam are nonnegative with len(mu) = len(lam) + J and J >= 1.
    """
    mu = check_signature(mu)
    lam = check_signature(lam)
    _check_nonneg(mu, lam)
    if J < 1 or len(mu) != len(lam) + J:
        raise ValueError("need J >= 1 and len(mu) = len(lam) + J")
    u = as_fraction(u)
    t = as_fraction(t)
    out = pochhammer(t, t, J) * _power(u, sum(mu) - sum(lam))
    top = max(mu[0] if mu else 0, lam[0] if lam else 0)
    for x in range(0, top + 1):
        ml = multiplicity(lam, x)
        mm = multiplicity(mu, x)
        mu_x, mu_x1 = conjugate_count(mu, x), conjugate_count(mu, x + 1)
        lam_x, lam_x1 = conjugate_count(lam, x), conjugate_count(lam, x + 1)
        e = ml * mm + _binom2(mu_x1 - lam_x1)
        hyp = qhyp_bar(
            ml,
            [t ** (-mm), 0],
            [t ** (1 + mu_x1 - lam_x), t ** (1 + J - mu_x + lam_x1)],
            t,
            t,
        )
        out *= t**e / pochhammer(t, t, mm) * hyp
    return out


def skewQ_principal_finite(nu: Sequence[int], lam: Sequence[int], u, J: int, t) -> Fraction:
    """Q_{nu/lam}(u, ut, ..., ut^{J-1}) from the terminating 3phi2 product."""
    nu = check_signature(nu)
    lam = check_signature(lam)
    if len(nu) != len(lam):
        raise ValueError("skew Q needs signatures of equal length")
    if J < 1:
        raise ValueError("need J >= 1")
    u = as_fraction(u)
    t = as_fraction(t)
    if not nu:
        return Fraction(1)
    out = _power(u, sum(nu) - sum(lam)) * t ** n_skew(nu, lam)
    for x in range(min(nu[-1], lam[-1]), max(nu[0], lam[0]) + 1):
        ml = multiplicity(lam, x)
        mn = multiplicity(nu, x)
        nu_x, nu_x1 = conjugate_count(nu, x), conjugate_count(nu, x + 1)
        lam_x, lam_x1 = conjugate_count(lam, x), conjugate_count(lam, x + 1)
        hyp = qhyp_bar(
            ml,
            [t ** (-mn), 0],
            [t ** (1 + nu_x1 - lam_x), t ** (1 + J - nu_x + lam_x1)],
            t,
            t,
        )
        out *= t ** (ml * mn) / pochhammer(t, t, ml) * hyp
    return out


def _pad(a: tuple, length: int) -> tuple:
    return a + (0,) * (length - len(a))


def skewP_principal_inf(mu: Sequence[int], lam: Sequence[int], u, t) -> Fraction:
    """P_{mu/lam}(u, ut, ut^2, ...) for partitions mu, lam.

    Zero unless lam is contained in mu. The result is a rational function of
    u, so it is returned exactly; convergence of the series itself needs
    |u| < 1.
    """
    mu = check_signature(mu)
    lam = check_signature(lam)
    _check_nonneg(mu, lam)
    length = max(len(mu), len(lam))
    mu, lam = _pad(mu, length), _pad(lam, length)
    if any(l > m for l, m in zip(lam, mu)):
        return Fraction(0)
    u = as_fraction(u)
    t = as_fraction(t)
    out = _power(u, sum(mu) - sum(lam)) * t ** n_skew(mu, lam, partitions=True)
    top = mu[0] if mu else 0
    for x in range(1, top + 1):
        ml = multiplicity(lam, x)
        mm = multiplicity(mu, x)
        gap = conjugate_count(mu, x) - conjugate_count(lam, x)
        out *= pochhammer(t ** (1 + gap), t, ml) / pochhammer(t, t, mm)
    return out


def skewQ_principal_inf(nu: Sequence[int], lam: Sequence[int], u, t) -> Fraction:
    """Q_{nu/lam}(u, ut, ut^2, ...) for signatures of equal length."""
    nu = check_signature(nu)
    lam = check_signature(lam)
    if len(nu) != len(lam):
        raise ValueError("skew Q needs signatures of equal length")
    if any(a < b for a, b in zip(nu, lam)):
        return Fraction(0)
    if not nu:
        return Fraction(1)
    u = as_fraction(u)
    t = as_fraction(t)
    out = _power(u, sum(nu) - sum(lam)) * t ** n_skew(nu, lam)
    for x in range(lam[-1], lam[0] + 1):
        ml = multiplicity(lam, x)
        if ml == 0:
            continue
        gap = conjugate_count(nu, x) - conjugate_count(lam, x)
        out *= pochhammer(t ** (1 + gap), t, ml) / pochhammer(t, t, ml)
    return out


# --- Cauchy kernel and the skew Cauchy identity ----------------------------


def _reciprocal_approx(r: EvalResult) -> EvalResult:
    v, e = r.value, r.error_bound
    if abs(v) <= e:
        raise ArithmeticError("cannot bound the reciprocal of a value this close to 0")
    return EvalResult.approx(1 / v, e / (abs(v) * (abs(v) - e)))


def cauchy_kernel(xs: Specialization, ys: Specialization, t, tol: float = 1e-12) -> EvalResult:
    """Pi(x; y) = prod_{i,j} (1 - t x_i y_j) / (1 - x_i y_j).

    Exact whenever at least one side is finite and every infinite side is a
    geometric progression with ratio t (the products then telescope);
    otherwise an Approx with a certified error bound.
    """
    t = rational_param(t)
    if xs.is_finite and ys.is_finite:
        out = Fraction(1)
        for x in xs.values:
            for y in ys.values:
                if x * y == 1:
                    raise ValueError("Cauchy kernel diverges: some x_i y_j = 1")
                out *= (1 - t * x * y) / (1 - x * y)
        return EvalResult.exact(out)
    if xs.is_finite or ys.is_finite:
        fin, inf = (xs, ys) if xs.is_finite else (ys, xs)
        for x in fin.values:
            if abs(x * inf.u) >= 1:
                raise ValueError("Cauchy kernel diverges: some |x_i y_j| >= 1")
        if inf.ratio == t:
            # prod_j (1 - t x v t^j) / (1 - x v t^j) telescopes to 1 / (1 - x v)
            out = Fraction(1)
            for x in fin.values:
                out /= 1 - x * inf.u
            return EvalResult.exact(out)
        value, err = 1.0, 0.0
        per = tol / (4 * max(1, len(fin.values)))
        for x in fin.values:
            num = pochhammer_inf(t * x * inf.u, inf.ratio, per)
            den = _reciprocal_approx(pochhammer_inf(x * inf.u, inf.ratio, per))
            f, fe = num.value * den.value, abs(num.value) * den.error_bound + abs(den.value) * num.error_bound + num.error_bound * den.error_bound
            err = abs(value) * fe + abs(f) * err + err * fe
            value *= f
        return EvalResult.approx(value, err)
    if xs.ratio != t or ys.ratio != t:
        raise NotImplementedError("two infinite progressions must both have ratio t")
    if abs(xs.u * ys.u) >= 1:
        raise ValueError("Cauchy kernel diverges")
    # prod_{i,j} collapses to 1 / (uv; t)_infinity
    return _reciprocal_approx(pochhammer_inf(xs.u * ys.u, t, tol / 4))


@dataclass
class CauchyReport:
    lhs: Fraction
    rhs: Fraction
    tail_bound: float
    cap: int

    @property
    def gap(self) -> float:
        return float(abs(self.rhs - self.lhs))

    @property
    def ok(self) -> bool:
        return self.gap <= self.tail_bound


def _cauchy_rhs(nu: tuple, mu: tuple, xs, ys, t) -> Fraction:
    """Pi(x; y) times sum over lam of Q_{nu/lam}(y) P_{mu/lam}(x); a finite sum."""
    k = len(nu)
    n = len(xs)
    kernel = cauchy_kernel(Specialization.explicit(xs), Specialization.explicit(ys), t).value
    if k == 0:
        return kernel * eval_skewP_chain(mu, (), xs, t)
    total = Fraction(0)
    lo = mu[-1]
    hi = min(nu[0], mu[0])
    for lam in signatures_in_box(k, lo, hi):
        if any(not (mu[i] >= lam[i] >= mu[i + n]) for i in range(k)):
            continue
        p = eval_skewP_chain(mu, lam, xs, t)
        if p == 0:
            continue
        total += eval_skewQ_chain(nu, lam, ys, t) * p
    return kernel * total


def verify_skew_cauchy(nu, mu, xs, ys, t, cap: int = 25) -> CauchyReport:
    """Check the skew Cauchy identity with a certified truncation bound.

    nu has length k, mu has length n + k where n = len(xs). The sum over
    kappa on the left is cut at kappa_1 <= cap. Every branching coefficient
    is nonnegative, so each omitted term is at most its value at |x|, |y|.
    Scaling x and y by r > 1 multiplies a term by r^(2|kappa| - |nu| - |mu|),
    and the omitted kappa all have |kappa| >= cap + 1 + mu_2 + ... + mu_{n+k}.
    Hence the omitted mass is at most r^-E times the right-hand side at
    (r|x|, r|y|), which is a finite sum. The best r from a small grid is used.
    """
    nu = check_signature(nu)
    mu = check_signature(mu)
    t = rational_param(t)
    xs = [as_fraction(x) for x in xs]
    ys = [as_fraction(y) for y in ys]
    if len(mu) != len(nu) + len(xs):
        raise ValueError("need len(mu) = len(nu) + len(xs)")
    prod_max = max((abs(x * y) for x in xs for y in ys), default=Fraction(0))
    if prod_max >= 1:
        raise ValueError("skew Cauchy sum diverges: some |x_i y_j| >= 1")

    rhs = _cauchy_rhs(nu, mu, xs, ys, t)
    if not mu:
        return CauchyReport(rhs, rhs, 0.0, cap)
    lo = mu[-1]
    p_vals = _skewP_levels(nu, xs, t, lo, cap)
    q_vals = _skewQ_levels(mu, ys, t, cap)
    total = mpq(0)
    for kappa, q in q_vals.items():
        p = p_vals.get(kappa)
        if p:
            total += p * q
    lhs = _to_fraction(total)
    if not xs or not ys:
        # one side is a delta function, so the sum over kappa is finite
        return CauchyReport(lhs, rhs, 0.0, cap)

    exponent = 2 * (cap + 1 + sum(mu[1:])) - sum(nu) - sum(mu)
    ax = [abs(x) for x in xs]
    ay = [abs(y) for y in ys]
    r_max = 1 / math.sqrt(float(prod_max)) if prod_max else 4.0
    best = math.inf
    for j in range(1, 8):
        r = Fraction(1) + Fraction(j, 8) * (Fraction(r_max).limit_denominator(10**6) - 1)
        if r <= 1 or r * r * prod_max >= 1:
            continue
        scaled = _cauchy_rhs(nu, mu, [r * x for x in ax], [r * y for y in ay], t)
        bound = float(scaled / r**exponent)
        best = min(best, bound)
    return CauchyReport(lhs, rhs, best, cap)
