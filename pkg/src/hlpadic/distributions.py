"""Exact probability laws for cokernels, singular numbers and their dynamics.

Every law here is an exact rational function of t (and u where relevant).
Enumerations over infinite supports are always paired with a certified
upper bound on the mass they leave out.
"""

from __future__ import annotations

import csv
import io
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Sequence

from .hall_littlewood import (
    Specialization,
    cauchy_kernel,
    principal_P,
    skewP_principal_inf,
    skewQ_principal_inf,
)
from .qseries import (
    EvalResult,
    as_fraction,
    negative_binomial_tail,
    pochhammer,
    pochhammer_inf,
    qbinomial,
    rational_param,
)
from .signatures import (
    Measure,
    _binom2,
    check_signature,
    conjugate_count,
    format_signature,
    n_skew,
    n_stat,
    negate_reverse,
    signatures_in_box,
)


def _require_nonneg(lam: tuple, n: int) -> tuple:
    lam = check_signature(lam)
    if len(lam) != n:
        raise ValueError(f"expected a signature of length {n}, got {format_signature(lam)}")
    if lam and lam[-1] < 0:
        raise ValueError(f"cokernel signatures are nonnegative, got {format_signature(lam)}")
    return lam


def _pad_partition(lam: Sequence[int], n: int) -> tuple:
    lam = check_signature(tuple(lam))
    if len(lam) > n:
        raise ValueError(f"partition {format_signature(lam)} has more than {n} parts")
    lam = lam + (0,) * (n - len(lam))
    if lam and lam[-1] < 0:
        raise ValueError("partitions have nonnegative parts")
    return lam


# --- Haar products ----------------------------------------------------------


def _step_factor(lam: tuple, nu: tuple, t: Fraction) -> Fraction:
    """t^{sum_x C(nu'_x - lam'_x + 1, 2)} prod_x [nu'_x - lam'_{x+1}, nu'_x - nu'_{x+1}]_t."""
    top = max(nu[0], lam[0]) if nu else 0
    exponent = 0
    out = Fraction(1)
    for x in range(0, top + 2):
        nx = conjugate_count(nu, x)
        if x >= 1:
            exponent += _binom2(nx - conjugate_count(lam, x) + 1)
        out *= qbinomial(nx - conjugate_count(lam, x + 1), nx - conjugate_count(nu, x + 1), t)
        if out == 0:
            return out
    return out * t**exponent


def product_cokernel_prob(chain: Sequence[Sequence[int]], n: int, t) -> Fraction:
    """Probability that coker(A_i ... A_1) has type chain[i-1] for every i.

    The A_i are independent Haar-random n x n matrices over the p-adic
    integers and t = 1/p. The formula is a product of one explicit factor per
    step; a chain that is not increasing gets probability 0 because one of
    the Gaussian binomials vanishes.
    """
    t = rational_param(t)
    chain = [_require_nonneg(tuple(lam), n) for lam in chain]
    if not chain:
        raise ValueError("the chain needs at least one signature")
    k = len(chain)
    out = pochhammer(t, t, n) ** k * t ** n_stat(chain[-1])
    previous = (0,) * n
    for lam in chain:
        out *= _step_factor(previous, lam, t)
        if out == 0:
            return out
        previous = lam
    return out


def _telescoped_normalizer(n: int, t: Fraction) -> Fraction:
    """Pi(1, ..., t^{n-1}; t, t^2, ...), exact since the second side has ratio t."""
    ones = Specialization.geometric(1, t, n)
    rest = Specialization.geometric_inf(t, t)
    return cauchy_kernel(ones, rest, t).value


def hl_process_prob(chain: Sequence[Sequence[int]], n: int, t) -> Fraction:
    """The same chain probability, written as a Hall-Littlewood process.

    P_{last}(1, ..., t^{n-1}) times the skew Q functions of consecutive steps
    at (t, t^2, ...), divided by the Cauchy kernel for k copies of (t, t^2, ...).
    """
    t = rational_param(t)
    chain = [_require_nonneg(tuple(lam), n) for lam in chain]
    if not chain:
        raise ValueError("the chain needs at least one signature")
    out = principal_P(chain[-1], 1, t)
    previous = (0,) * n
    for lam in chain:
        out *= skewQ_principal_inf(lam, previous, t, t)
        if out == 0:
            return out
        previous = lam
    return out / _telescoped_normalizer(n, t) ** len(chain)


def product_tail_bound(n: int, k: int, t, part_cap: int) -> Fraction:
    """Upper bound on Pr(the largest cokernel part after k steps exceeds part_cap).

    The total size |lambda(k)| is a sum of k independent copies of
    val(det A) with A Haar. A single copy has Pr(size = s) at most
    C(s+n-1, n-1) t^s (t;t)_n^{2-n} (bound each term of the Haar law), and
    convolving k such bounds gives a negative binomial series in t.
    """
    t = rational_param(t)
    scale = pochhammer(t, t, n) ** ((2 - n) * k)
    return scale * negative_binomial_tail(n * k, t, part_cap + 1)


def _chains(n: int, k: int, cap: int) -> Iterator[tuple]:
    boxes = list(signatures_in_box(n, 0, cap))

    def rec(prefix):
        if len(prefix) == k:
            yield tuple(prefix)
            return
        low = prefix[-1] if prefix else (0,) * n
        for lam in boxes:
            if all(a >= b for a, b in zip(lam, low)):
                prefix.append(lam)
                yield from rec(prefix)
                prefix.pop()

    yield from rec([])


def product_cokernel_law(n: int, k: int, t, part_cap: int) -> Measure:
    """Joint law of the first k cokernels, restricted to parts <= part_cap.

    The result is a partial :class:`Measure` keyed by k-tuples of signatures.
    ``deficit`` is the exact omitted mass 1 - (kept mass) and
    ``deficit_bound`` a certified upper bound for it that does not rely on
    the law summing to one.
    """
    t = rational_param(t)
    if k < 1:
        raise ValueError("k must be at least 1")
    weights = {}
    for chain in _chains(n, k, part_cap):
        w = product_cokernel_prob(chain, n, t)
        if w:
            weights[chain] = w
    kept = sum(weights.values(), Fraction(0))
    return Measure(
        weights,
        complete=False,
        deficit=1 - kept,
        deficit_bound=product_tail_bound(n, k, t, part_cap),
    )


def fw_prob(lam: Sequence[int], n: int, t) -> Fraction:
    """Probability that an n x n Haar matrix has cokernel of type lam.

    lam is a partition with at most n parts; zero parts are counted in the
    multiplicity of 0.
    """
    t = rational_param(t)
    lam = _pad_partition(lam, n)
    out = t ** (2 * n_stat(lam) + sum(lam)) * pochhammer(t, t, n) ** 2
    for m in Counter(lam).values():
        out /= pochhammer(t, t, m)
    return out


def fw_tail_bound(n: int, t, part_cap: int) -> Fraction:
    """Upper bound on the mass of partitions with a part above part_cap."""
    return product_tail_bound(n, 1, t, part_cap)


# --- one step of Cauchy dynamics ---------------------------------------------


def cauchy_dynamics_step(lam: Sequence[int], nu: Sequence[int], u, t) -> Fraction:
    """Transition probability lam -> nu for the dynamics driven by (u, ut, ...).

    Closed form (u;t)_n u^{|nu|-|lam|} t^{n(nu)-n(lam)+n(nu/lam)} times a
    product of Gaussian binomials over the columns.
    """
    lam = check_signature(lam)
    nu = check_signature(nu)
    u = rational_param(u, "u")
    t = rational_param(t)
    n = len(lam)
    if len(nu) != n:
        raise ValueError("dynamics needs signatures of equal length")
    if n == 0:
        return Fraction(1)
    if any(a < b for a, b in zip(nu, lam)):
        return Fraction(0)
    out = Fraction(1)
    for x in range(min(nu[-1], lam[-1]) - 1, max(nu[0], lam[0]) + 2):
        nx = conjugate_count(nu, x)
        out *= qbinomial(nx - conjugate_count(lam, x + 1), nx - conjugate_count(nu, x + 1), t)
        if out == 0:
            return out
    exponent = n_stat(nu) - n_stat(lam) + n_skew(nu, lam)
    return out * pochhammer(u, t, n) * u ** (sum(nu) - sum(lam)) * t**exponent


def cauchy_dynamics_by_definition(lam: Sequence[int], nu: Sequence[int], u, t) -> Fraction:
    """Q_{nu/lam}(u, ut, ...) P_nu(1..t^{n-1}) / (P_lam(1..t^{n-1}) Pi)."""
    lam = check_signature(lam)
    nu = check_signature(nu)
    u = rational_param(u, "u")
    t = rational_param(t)
    q = skewQ_principal_inf(nu, lam, u, t)
    if q == 0:
        return q
    kernel = cauchy_kernel(Specialization.geometric(1, t, len(lam)), Specialization.geometric_inf(u, t), t)
    return q * principal_P(nu, 1, t) / (principal_P(lam, 1, t) * kernel.value)


def dynamics_tail_bound(lam: Sequence[int], u, t, cap: int) -> Fraction:
    """Bound on the transition mass from lam to targets with nu_1 > cap.

    Every term is at most (u;t)_n (t;t)_n^{-n} u^{|nu|-|lam|}, and at most
    C(s+n-1, n-1) targets have |nu| - |lam| = s.
    """
    lam = check_signature(lam)
    u = rational_param(u, "u")
    t = rational_param(t)
    n = len(lam)
    if n == 0:
        return Fraction(0)
    scale = pochhammer(u, t, n) / pochhammer(t, t, n) ** n
    return scale * negative_binomial_tail(n, u, cap + 1 - lam[0])


def dynamics_row(lam: Sequence[int], u, t, cap: int) -> dict:
    """All transition probabilities from lam to targets with parts <= cap."""
    lam = check_signature(lam)
    n = len(lam)
    out = {}
    if n == 0:
        return {(): Fraction(1)}
    for nu in signatures_in_box(n, lam[-1], cap):
        w = cauchy_dynamics_step(lam, nu, u, t)
        if w:
            out[nu] = w
    return out


# --- p-adic Hua measures --------------------------------------------------------


def hua_sn_law(lam: Sequence[int], u, t) -> Fraction:
    """Singular-number law of the n x n p-adic Hua measure, n = len(lam).

    The family is parameterized by u = t^{1+s} so that everything stays
    rational.
    """
    lam = check_signature(lam)
    u = rational_param(u, "u")
    t = rational_param(t)
    n = len(lam)
    plus = sum(max(p, 0) for p in lam)
    out = pochhammer(u, t, n) ** 2 / pochhammer(u, t, 2 * n)
    out *= u**plus * t ** ((2 * n - 1) * (plus - sum(lam)) + 2 * n_stat(lam))
    out *= pochhammer(t, t, n) ** 2
    for m in Counter(lam).values():
        out /= pochhammer(t, t, m)
    return out


def hua_weight_rational_part(mu: Sequence[int], u, t) -> Fraction:
    """u^{|mu|} t^{2 n(mu)} / prod_{i>=1} (t;t)_{m_i(mu)}, the weight without (u;t)_inf."""
    mu = _pad_partition(mu, len(tuple(mu)))
    u = as_fraction(u)
    t = as_fraction(t)
    out = u ** sum(mu) * t ** (2 * n_stat(mu))
    for value, m in Counter(mu).items():
        if value > 0:
            out /= pochhammer(t, t, m)
    return out


def hua_decomposition_weight(mu: Sequence[int], u, t, tol: float = 1e-12) -> EvalResult:
    """Weight of the ergodic component labelled by the partition mu.

    Equal to P_mu(1, t, ...) Q_mu(u, ut, ...) / Pi(1, t, ...; u, ut, ...),
    which collapses to (u;t)_inf times :func:`hua_weight_rational_part`.
    """
    u = rational_param(u, "u")
    t = rational_param(t)
    r = hua_weight_rational_part(mu, u, t)
    fr = float(r)
    head = pochhammer_inf(u, t, tol / (2 * max(1.0, fr)))
    value = head.value * fr
    err = head.error_bound * fr + abs(value) * 2.0**-51
    return EvalResult.approx(value, err)


def hua_weight_truncated(mu: Sequence[int], u, t, length: int) -> Fraction:
    """The same weight with every specialization cut to ``length`` variables.

    Exact; converges to :func:`hua_decomposition_weight` as length grows.
    """
    mu = _pad_partition(mu, length)
    u = as_fraction(u)
    t = as_fraction(t)
    p = principal_P(mu, 1, t)
    q = principal_P(mu, u, t)
    for value, m in Counter(mu).items():
        if value > 0:
            q *= pochhammer(t, t, m)
    kernel = cauchy_kernel(
        Specialization.geometric(1, t, length), Specialization.geometric(u, t, length), t
    ).value
    return p * q / kernel


def partitions_up_to(total: int) -> Iterator[tuple]:
    """All partitions of size at most ``total``, the empty one first."""

    def rec(remaining, bound, prefix):
        yield tuple(prefix)
        for p in range(min(remaining, bound), 0, -1):
            prefix.append(p)
            yield from rec(remaining - p, p, prefix)
            prefix.pop()

    yield from rec(total, total, [])


def hua_truncation_tail(u, t, cap: int, tol: float = 1e-6) -> float:
    """Certified bound on the decomposition weight of all mu with |mu| > cap.

    The weights sum to one, so the omitted mass is one minus the kept mass,
    with (u;t)_inf bounded from below.
    """
    u = rational_param(u, "u")
    t = rational_param(t)
    head = pochhammer_inf(u, t, tol / 100)
    kept = sum((hua_weight_rational_part(mu, u, t) for mu in partitions_up_to(cap)), Fraction(0))
    return max(0.0, 1.0 - (head.value - head.error_bound) * float(kept) * (1 - 2.0**-50))


def hua_certified_cap(u, t, tol: float = 1e-6, floor: int = 12, ceiling: int = 24) -> int:
    """Smallest cap >= floor whose truncation tail leaves room for the
    (u;t)_inf error, which verify_hua_identity keeps below tol / 100."""
    for cap in range(floor, ceiling + 1):
        if hua_truncation_tail(u, t, cap, tol) <= 0.99 * tol:
            return cap
    raise ValueError(f"Hua truncation tail cannot be certified below {tol} with cap <= {ceiling}")


@dataclass
class HuaReport:
    """Result of checking the Hua decomposition identity at one signature."""

    nu: tuple
    lhs: float
    rhs: Fraction
    truncation_tail: float
    approx_error: float
    tol: float
    cap: int

    @property
    def certified(self) -> bool:
        """Whether the omitted mass is provably below tol."""
        return self.truncation_tail + self.approx_error <= self.tol

    @property
    def gap(self) -> float:
        return abs(self.lhs - float(self.rhs))

    @property
    def ok(self) -> bool:
        return self.certified and self.gap <= self.tol


def _hua_inner(mu: tuple, n: int, nu: tuple, t: Fraction, cache: dict) -> Fraction:
    """sum over lam in Sig_n, lam >= 0, of the boundary weight and the lower transition."""
    top = mu + (0,) * max(0, n - len(mu))
    lows = [max(p, 0) for p in nu]
    full = skewP_principal_inf(mu, (), 1, t)
    tn = t**n
    total = Fraction(0)

    def rec(prefix, i):
        nonlocal total
        if i == n:
            lam = tuple(prefix)
            middle = skewP_principal_inf(mu, lam, tn, t)
            if middle:
                total += middle * _lower_transition(lam, nu, t, cache) * principal_P(lam, 1, t) / full
            return
        bound = top[i] if i == 0 else min(top[i], prefix[-1])
        for p in range(bound, lows[i] - 1, -1):
            prefix.append(p)
            rec(prefix, i + 1)
            prefix.pop()

    rec([], 0)
    return total


def _lower_transition(lam: tuple, nu: tuple, t: Fraction, cache: dict) -> Fraction:
    """Q_{-nu/-lam}(t, t^2, ...) P_{-nu}(1..) / (P_{-lam}(1..) Pi(1..; t, ...))."""
    if lam not in cache:
        nn, nl = negate_reverse(nu), negate_reverse(lam)
        q = skewQ_principal_inf(nn, nl, t, t)
        if q:
            q = q * principal_P(nn, 1, t) / (principal_P(nl, 1, t) * _telescoped_normalizer(len(lam), t))
        cache[lam] = q
    return cache[lam]


def verify_hua_identity(nu: Sequence[int], u, t, cap: int = 16, tol: float = 1e-6) -> HuaReport:
    """Check the ergodic decomposition of the Hua measure at the n x n corner.

    The outer sum runs over partitions mu with |mu| <= cap. Each inner sum
    is finite and computed exactly. Because every inner sum is a probability
    and the weights sum to one, the omitted outer mass is
    1 - sum of the kept weights, which is bounded using the certified error
    of (u;t)_inf.
    """
    nu = check_signature(nu)
    u = rational_param(u, "u")
    t = rational_param(t)
    n = len(nu)
    head = pochhammer_inf(u, t, tol / 100)
    lhs_rational = Fraction(0)
    kept_rational = Fraction(0)
    cache: dict = {}
    for mu in partitions_up_to(cap):
        r = hua_weight_rational_part(mu, u, t)
        kept_rational += r
        inner = _hua_inner(mu, n, nu, t, cache)
        if inner:
            lhs_rational += r * inner
    lhs = head.value * float(lhs_rational)
    approx = head.error_bound * float(lhs_rational) + abs(lhs) * 2.0**-50
    # the kept weights sum to (u;t)_inf * kept_rational, and the full sum is 1
    kept_low = (head.value - head.error_bound) * float(kept_rational) * (1 - 2.0**-50)
    tail = max(0.0, 1.0 - kept_low)
    return HuaReport(nu, lhs, hua_sn_law(nu, u, t), tail, approx, tol, cap)


# --- export ---------------------------------------------------------------------


def law_to_csv(measure: Measure) -> str:
    """Render a law as CSV with columns signature(s), prob_num, prob_den, prob_float."""
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(["signature(s)", "prob_num", "prob_den", "prob_float"])
    for key, w in measure.items():
        writer.writerow([format_signature(key), w.numerator, w.denominator, repr(float(w))])
    return buffer.getvalue()
