"""Links, boundary measures and boundary dynamics of the Hall-Littlewood
Gelfand-Tsetlin graph, its finite-rank variants, and the two-dimensional
graph of matrix corners.

Extended signatures are tuples whose trailing entries may be ``NEG_INF``.
Measures on them are keyed by the extended signature of length min(m, n)
for an n x m corner.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .hall_littlewood import (
    eval_skewP_chain,
    principal_P,
    skewP_principal_inf,
    skewQ_principal_finite,
    skewQ_principal_inf,
)
from .qseries import as_fraction, pochhammer, qbinomial, qhyp_bar, qmultinomial, rational_param
from .signatures import (
    INF,
    NEG_INF,
    InfSignature,
    Measure,
    check_signature,
    conjugate_count,
    finite_parts,
    interlace_Q,
    multiplicity,
    negate_reverse,
    signatures_in_box,
)

# --- links of the one-dimensional graph ------------------------------------


def link_support(mu: tuple, lam: tuple) -> bool:
    """Whether a chain of P-interlacings leads from lam up to mu."""
    J = len(mu) - len(lam)
    return all(mu[i] >= lam[i] >= mu[i + J] for i in range(len(lam)))


def link(mu: Sequence[int], lam: Sequence[int], t) -> Fraction:
    """Cotransition probability L^m_n(mu, lam), m = len(mu) > n = len(lam).

    Evaluated through the product over x of terminating 3phi2 sums, which
    makes translation invariance manifest.
    """
    mu = check_signature(mu)
    lam = check_signature(lam)
    t = rational_param(t)
    m, n = len(mu), len(lam)
    if not m > n >= 1:
        raise ValueError(f"link needs len(mu) > len(lam) >= 1, got {m}, {n}")
    J = m - n
    out = 1 / qbinomial(m, J, t)
    for x in range(min(lam[-1], mu[-1]), max(lam[0], mu[0]) + 1):
        ml = multiplicity(lam, x)
        mm = multiplicity(mu, x)
        mu_x, mu_x1 = conjugate_count(mu, x), conjugate_count(mu, x + 1)
        lam_x, lam_x1 = conjugate_count(lam, x), conjugate_count(lam, x + 1)
        e = (n - lam_x) * (mu_x - lam_x) + ml * mm
        hyp = qhyp_bar(
            ml,
            [t ** (-mm), 0],
            [t ** (1 + mu_x1 - lam_x), t ** (1 + J - mu_x + lam_x1)],
            t,
            t,
        )
        out *= t**e / pochhammer(t, t, ml) * hyp
    return out


def link_by_definition(mu: Sequence[int], lam: Sequence[int], t) -> Fraction:
    """L^m_n(mu, lam) = P_{mu/lam}(t^n, ..., t^{m-1}) P_lam(1..t^{n-1}) / P_mu(1..t^{m-1})."""
    mu = check_signature(mu)
    lam = check_signature(lam)
    t = rational_param(t)
    m, n = len(mu), len(lam)
    xs = [t**i for i in range(n, m)]
    return eval_skewP_chain(mu, lam, xs, t) * principal_P(lam, 1, t) / principal_P(mu, 1, t)


def link_targets(mu: tuple, n: int):
    """Every lam of length n with L^m_n(mu, lam) possibly nonzero."""
    J = len(mu) - n
    lo = mu[-1]
    for lam in signatures_in_box(n, lo, mu[0]):
        if link_support(mu, lam):
            yield lam


# --- boundary measures -------------------------------------------------------


def _require_const_tail(mu: InfSignature) -> int:
    if not isinstance(mu, InfSignature) or mu.tail is NEG_INF:
        raise ValueError("expected an infinite signature with a constant tail")
    return mu.tail


def boundary_weight(mu: InfSignature, lam: Sequence[int], t) -> Fraction:
    """M_n^mu(lam) for mu with constant tail D and lam of length n.

    Infinite conjugate counts (x <= D) are handled case by case: the factor
    is 1 when lam'_x = n and 0 otherwise.
    """
    D = _require_const_tail(mu)
    lam = check_signature(lam)
    t = as_fraction(t)
    n = len(lam)
    out = qmultinomial(n, lam, t)
    top = max(lam[0], mu.part(1))
    for x in range(lam[-1], top + 1):
        mc = conjugate_count(mu, x)
        lc = conjugate_count(lam, x)
        if mc is INF:
            if lc < n:
                return Fraction(0)
            continue
        out *= t ** ((mc - lc) * (n - lc)) * pochhammer(
            t ** (1 + mc - lc), t, multiplicity(lam, x)
        )
    return out


def boundary_measure(mu: InfSignature, n: int, t) -> Measure:
    """The level-n measure of the coherent system indexed by mu (constant tail).

    The support is finite: lam_n >= D and lam_i <= mu_i.
    """
    D = _require_const_tail(mu)
    t = rational_param(t)
    weights = {}
    for lam in signatures_in_box(n, D, mu.part(1)):
        if any(lam[i] > mu.part(i + 1) for i in range(n)):
            continue
        w = boundary_weight(mu, lam, t)
        if w:
            weights[lam] = w
    return Measure(weights, complete=True)


@dataclass
class CoherencyReport:
    n: int
    checked: int
    mismatches: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.mismatches


def push_forward(measure: Measure, n: int, t) -> dict:
    """Apply the links L^{m}_{n} to a measure on Sig_m; returns exact weights."""
    out: dict = {}
    for mu, w in measure.items():
        for lam in link_targets(mu, n):
            v = link(mu, lam, t)
            if v:
                out[lam] = out.get(lam, 0) + w * v
    return out


def verify_coherency(mu: InfSignature, n: int, t) -> CoherencyReport:
    """Check exactly that M_{n+1}^mu pushed down by L^{n+1}_n equals M_n^mu."""
    upper = boundary_measure(mu, n + 1, t)
    lower = boundary_measure(mu, n, t)
    pushed = push_forward(upper, n, t)
    report = CoherencyReport(n, 0)
    for lam in sorted(set(pushed) | set(lower.weights)):
        report.checked += 1
        if pushed.get(lam, 0) != lower[lam]:
            report.mismatches.append((lam, pushed.get(lam, 0), lower[lam]))
    return report


# --- the finite-rank graphs --------------------------------------------------


def finite_k_weight(mu: Sequence[int], lam: Sequence[int], level: int, t) -> Fraction:
    """M_level^mu(lam) on Sig_k, k = len(mu).

    Q_{-lam/-mu}(t^l, t^{l+1}, ...) P_{-lam}(1..t^{k-1}) / P_{-mu}(1..t^{k-1})
    divided by Pi(1, ..., t^{k-1}; t^l, t^{l+1}, ...) = 1 / (t^l; t)_k.
    """
    mu = check_signature(mu)
    lam = check_signature(lam)
    t = as_fraction(t)
    k = len(mu)
    if len(lam) != k:
        raise ValueError("finite-rank measure needs signatures of equal length")
    if level < 1:
        raise ValueError("levels start at 1")
    nmu, nlam = negate_reverse(mu), negate_reverse(lam)
    q = skewQ_principal_inf(nlam, nmu, t**level, t)
    if q == 0:
        return Fraction(0)
    return q * pochhammer(t**level, t, k) * principal_P(nlam, 1, t) / principal_P(nmu, 1, t)


def finite_k_boundary_measure(mu: Sequence[int], level: int, t, depth: int = 24) -> Measure:
    """Boundary measure of the rank-k graph at the given level, truncated.

    The support {lam <= mu componentwise} is infinite downward, so only
    lam_k >= mu_k - depth is kept. The returned measure is partial and its
    ``deficit`` is the omitted mass 1 - (kept mass), which is exact because
    the full measure has total mass one.
    """
    mu = check_signature(mu)
    t = rational_param(t)
    k = len(mu)
    if k == 0:
        return Measure({(): Fraction(1)})
    floor = mu[-1] - depth
    return _finite_k_measure_floor(mu, level, t, floor)


def _finite_k_measure_floor(mu: tuple, level: int, t, floor: int) -> Measure:
    k = len(mu)
    if k == 0:
        return Measure({(): Fraction(1)})
    weights = {}
    for lam in signatures_in_box(k, floor, mu[0]):
        if any(lam[i] > mu[i] for i in range(k)):
            continue
        w = finite_k_weight(mu, lam, level, t)
        if w:
            weights[lam] = w
    total = sum(weights.values(), Fraction(0))
    return Measure(weights, complete=(total == 1), deficit=1 - total)


# --- the two-dimensional graph of corners ------------------------------------


def _extended_key(finite: tuple, length: int) -> tuple:
    return tuple(finite) + (NEG_INF,) * (length - len(finite))


def _pi_single(a: Fraction, k: int, t: Fraction) -> Fraction:
    """Pi(a; 1, t, ..., t^{k-1}) = (1 - a t^k) / (1 - a) after telescoping."""
    return (1 - a * t**k) / (1 - a)


def link2d(mu, lam, m: int, n: int, t, axis: str = "column") -> Fraction:
    """Corner transition probability of the two-dimensional graph.

    With ``axis="column"`` this is the chance that dropping the last column
    of an n x (m+1) matrix with singular numbers mu leaves singular numbers
    lam. ``axis="row"`` drops the last row of an (n+1) x m matrix, which is the
    same kernel with m and n exchanged.
    """
    if axis == "row":
        m, n = n, m
    elif axis != "column":
        raise ValueError("axis must be 'column' or 'row'")
    t = rational_param(t)
    ms = finite_parts(check_signature(mu))
    ls = finite_parts(check_signature(lam))
    k = len(ms)
    if k > min(m + 1, n):
        raise ValueError(f"an {n} x {m + 1} matrix has at most {min(m + 1, n)} finite singular numbers")
    if len(ls) == k and k <= min(m, n):
        if k == 0:
            return Fraction(1)
        a = t ** (m + 1 - k)
        nmu, nlam = negate_reverse(ms), negate_reverse(ls)
        if not interlace_Q(nlam, nmu):
            return Fraction(0)
        q = skewQ_principal_finite(nlam, nmu, a, 1, t)
        return q * principal_P(nlam, 1, t) / (principal_P(nmu, 1, t) * _pi_single(a, k, t))
    if k == m + 1 and len(ls) == m:
        if m == 0:
            return Fraction(1)
        return link(ms, ls, t)
    return Fraction(0)


def _link2d_targets(ms: tuple, m: int, n: int, floor: int):
    """Finite parts lam* reachable from mu* when a column leaves n x (m+1)."""
    k = len(ms)
    if k <= min(m, n):
        if k == 0:
            yield ()
            return
        # -mu Q-interlaces into -lam: mu_1 >= lam_1 >= mu_2 >= ... >= mu_k >= lam_k
        lows = [ms[i + 1] for i in range(k - 1)] + [floor]
        for lam in signatures_in_box(k, floor, ms[0]):
            if all(ms[i] >= lam[i] >= lows[i] for i in range(k)):
                yield lam
    elif k == m + 1:
        for lam in signatures_in_box(m, ms[-1], ms[0]):
            if link_support(ms, lam):
                yield lam


def push_measure_2d(measure: Measure, m: int, n: int, t, axis: str = "column", floor: int | None = None) -> Measure:
    """Push a measure on corners of size n x (m+1) (column) or (n+1) x m (row)
    through one corner link. Parts below ``floor`` are discarded and the lost
    mass is added to the deficit.
    """
    t = rational_param(t)
    mm, nn = (m, n) if axis == "column" else (n, m)
    new_len = min(m, n)
    out: dict = {}
    for key, w in measure.items():
        ms = finite_parts(key)
        f = floor if floor is not None else (min(ms) if ms else 0) - 24
        for ls in _link2d_targets(ms, mm, nn, f):
            v = link2d(ms, ls, m, n, t, axis=axis)
            if v:
                k2 = _extended_key(ls, new_len)
                out[k2] = out.get(k2, 0) + w * v
    total = sum(out.values(), Fraction(0))
    return Measure(out, complete=(total == 1), deficit=1 - total)


def boundary_measure_2d(mu: InfSignature, m: int, n: int, t, depth: int = 16) -> Measure:
    """Law of the singular numbers of an n x m corner under the extreme
    coherent system indexed by mu.

    mu has either a constant tail D, or a -inf tail with k finite parts. The
    displayed convolution formulas cover m >= n (constant tail) and m, n >= k
    (-inf tail); other sizes are reached by pushing through corner links.
    Parts below (smallest finite part of mu) - depth are truncated away and
    the omitted mass is reported as ``deficit``.
    """
    t = rational_param(t)
    if not isinstance(mu, InfSignature):
        raise TypeError("mu must be an InfSignature")
    if mu.tail is not NEG_INF:
        D = mu.tail
        floor = D - depth
        if m < n:
            meas = boundary_measure_2d(mu, n, n, t, depth)
            for cols in range(n - 1, m - 1, -1):
                meas = push_measure_2d(meas, cols, n, t, "column", floor)
            return meas
        top = boundary_measure(mu, n, t)
        out: dict = {}
        for lam, w in top.items():
            inner = _finite_k_measure_floor(lam, m - n + 1, t, floor)
            for nu, v in inner.items():
                key = _extended_key(nu, min(m, n))
                out[key] = out.get(key, 0) + w * v
        total = sum(out.values(), Fraction(0))
        return Measure(out, complete=(total == 1), deficit=1 - total)

    ms = mu.prefix
    k = len(ms)
    floor = (ms[-1] if ms else 0) - depth
    M0, N0 = max(m, k), max(n, k)
    out = {}
    rows = _finite_k_measure_floor(ms, N0 - k + 1, t, floor)
    for lam, w in rows.items():
        inner = _finite_k_measure_floor(lam, M0 - k + 1, t, floor)
        for nu, v in inner.items():
            key = _extended_key(nu, min(M0, N0))
            out[key] = out.get(key, 0) + w * v
    total = sum(out.values(), Fraction(0))
    meas = Measure(out, complete=(total == 1), deficit=1 - total)
    for cols in range(M0 - 1, m - 1, -1):
        meas = push_measure_2d(meas, cols, N0, t, "column", floor)
    for rws in range(N0 - 1, n - 1, -1):
        meas = push_measure_2d(meas, m, rws, t, "row", floor)
    return meas


# --- Markov dynamics on the levels and on the boundary -------------------------


def _q_single(nu: tuple, lam: tuple, alpha: Fraction, t: Fraction) -> Fraction:
    if not interlace_Q(nu, lam):
        return Fraction(0)
    return skewQ_principal_finite(nu, lam, alpha, 1, t)


def gamma_kernel(lam: Sequence[int], nu: Sequence[int], alpha, t) -> Fraction:
    """Gamma^n_alpha(lam, nu) = Q_{nu/lam}(alpha) P_nu(1..t^{n-1}) / (P_lam(..) Pi(alpha; 1..t^{n-1}))."""
    lam = check_signature(lam)
    nu = check_signature(nu)
    alpha = rational_param(alpha, "alpha")
    t = rational_param(t)
    n = len(lam)
    q = _q_single(nu, lam, alpha, t)
    if q == 0:
        return Fraction(0)
    return q * principal_P(nu, 1, t) / (principal_P(lam, 1, t) * _pi_single(alpha, n, t))


def _phi_partitions(nu: tuple, lam: tuple, t: Fraction) -> Fraction:
    """phi for partitions: part value 0 carries infinite multiplicity and is skipped."""
    out = Fraction(1)
    values = set(nu) | set(lam)
    for i in values:
        if i == 0:
            continue
        mn = sum(1 for p in nu if p == i)
        ml = sum(1 for p in lam if p == i)
        if mn == ml + 1:
            out *= 1 - t**mn
    return out


def gamma_inf(mu: InfSignature, kappa: InfSignature, alpha, t) -> Fraction:
    """Gamma^infinity_alpha(mu, kappa) for infinite signatures with one shared constant tail."""
    alpha = rational_param(alpha, "alpha")
    t = rational_param(t)
    D = _require_const_tail(mu)
    if kappa.tail != D:
        return Fraction(0)
    length = max(len(mu.prefix), len(kappa.prefix)) + 1
    a = tuple(p - D for p in mu.truncate(length))
    b = tuple(p - D for p in kappa.truncate(length))
    if not interlace_Q(b, a):
        return Fraction(0)
    q = alpha ** (sum(b) - sum(a)) * _phi_partitions(b, a, t)
    # Pi(alpha; 1, t, t^2, ...) telescopes to 1 / (1 - alpha)
    ratio = skewP_principal_inf(b, (), 1, t) / skewP_principal_inf(a, (), 1, t)
    return q * ratio * (1 - alpha)


def gamma_targets(lam: tuple, cap: int):
    """nu Q-interlacing over lam with nu_1 <= cap."""
    n = len(lam)
    highs = [cap] + [lam[i - 1] for i in range(1, n)]
    for nu in signatures_in_box(n, lam[-1], cap):
        if all(lam[i] <= nu[i] <= highs[i] for i in range(n)):
            yield nu


def gamma_tail_bound(lam: tuple, alpha, t, cap: int) -> Fraction:
    """Upper bound on the Gamma^n_alpha(lam, .) mass with nu_1 > cap.

    Each such nu has |nu| - |lam| >= nu_1 - lam_1, phi <= 1, n(nu) >= n(lam),
    and the multiplicity ratio is at most (t;t)_n^{-n}. For fixed nu_1 there
    are prod_{i>=2} (lam_{i-1} - lam_i + 1) choices of nu.
    """
    alpha = as_fraction(alpha)
    t = as_fraction(t)
    n = len(lam)
    count = 1
    for i in range(1, n):
        count *= lam[i - 1] - lam[i] + 1
    geo = alpha ** (cap + 1 - lam[0]) / (1 - alpha)
    return count * geo * pochhammer(t, t, n) ** (-n) / _pi_single(alpha, n, t)


@dataclass
class CommutationReport:
    lhs: Fraction
    rhs: Fraction
    tail_bound: Fraction
    cap: int

    @property
    def gap(self) -> Fraction:
        return abs(self.lhs - self.rhs)

    @property
    def ok(self) -> bool:
        return self.gap <= self.tail_bound


def verify_commutation(mu: Sequence[int], nu: Sequence[int], alpha, t, cap: int = 20) -> CommutationReport:
    """Compare (Gamma^m L^m_n)(mu, nu) with (L^m_n Gamma^n)(mu, nu).

    The right side is a finite sum. The left side runs over kappa with
    kappa_1 <= cap; since every link is at most 1 the omitted part is bounded
    by :func:`gamma_tail_bound`.
    """
    mu = check_signature(mu)
    nu = check_signature(nu)
    alpha = rational_param(alpha, "alpha")
    t = rational_param(t)
    n = len(nu)
    if not len(mu) > n >= 1:
        raise ValueError("need len(mu) > len(nu) >= 1")
    rhs = Fraction(0)
    for lam in link_targets(mu, n):
        g = gamma_kernel(lam, nu, alpha, t)
        if g:
            rhs += link(mu, lam, t) * g
    lhs = Fraction(0)
    for kappa in gamma_targets(mu, cap):
        if not link_support(kappa, nu):
            continue
        g = gamma_kernel(mu, kappa, alpha, t)
        if g:
            lhs += g * link(kappa, nu, t)
    return CommutationReport(lhs, rhs, gamma_tail_bound(mu, alpha, t, cap), cap)
