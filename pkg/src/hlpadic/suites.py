"""Identity suites shared by the ``verify`` command and the acceptance tests.

Each suite walks a finite family of cases and records every case that fails,
together with enough detail to reproduce it.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction

from .branching_graph import (
    boundary_measure,
    boundary_weight,
    gamma_tail_bound,
    link,
    link_support,
    verify_commutation,
    verify_coherency,
)
from .distributions import fw_prob, hl_process_prob, hua_certified_cap, product_cokernel_prob, verify_hua_identity
from .hall_littlewood import (
    eval_skewP_chain,
    eval_skewQ_chain,
    geometric_values,
    skewP_principal_finite,
    skewP_principal_inf,
    skewQ_principal_finite,
    skewQ_principal_inf,
    verify_skew_cauchy,
)
from .signatures import InfSignature, conjugate_count, format_signature, signatures_in_box


@dataclass
class SuiteResult:
    name: str
    checked: int = 0
    failures: list = field(default_factory=list)
    worst: float = 0.0

    @property
    def ok(self) -> bool:
        return self.checked > 0 and not self.failures

    def summary(self) -> str:
        status = "PASS" if self.ok else "FAIL"
        return f"{status} {self.name}: {self.checked} cases, {len(self.failures)} failures, worst slack {self.worst:.3g}"


CAUCHY_X = (Fraction(1, 2), Fraction(-1, 3))
CAUCHY_Y = (Fraction(1, 3), Fraction(2, 5))


def skew_cauchy_suite(max_parts: int = 3, max_len: int = 2, t=Fraction(1, 3), cap: int = 25,
                      bound: float = 1e-8) -> SuiteResult:
    """Skew Cauchy identity for nu of length k, mu of length n + k, m variables y."""
    res = SuiteResult("skew-cauchy")
    for k in range(0, max_len + 1):
        for n in range(0, max_len + 1):
            if n + k == 0:
                continue
            xs = CAUCHY_X[:n]
            for m in range(0, max_len + 1):
                ys = CAUCHY_Y[:m]
                for nu in signatures_in_box(k, 0, max_parts):
                    for mu in signatures_in_box(n + k, 0, max_parts):
                        rep = verify_skew_cauchy(nu, mu, xs, ys, t, cap)
                        res.checked += 1
                        res.worst = max(res.worst, rep.tail_bound)
                        if not rep.ok or rep.tail_bound > bound:
                            res.failures.append(
                                f"nu={format_signature(nu)} mu={format_signature(mu)} x={xs} y={ys}: "
                                f"gap {rep.gap:.3g}, bound {rep.tail_bound:.3g}"
                            )
    return res


def coherency_suite(max_n: int = 3, max_parts: int = 3, max_len: int = 3, tails=(-2, -1, 0),
                    t=Fraction(1, 3)) -> SuiteResult:
    """Exact coherency of the boundary measures, prefixes with parts in [0, max_parts]."""
    res = SuiteResult("coherency")
    for D in tails:
        for length in range(0, max_len + 1):
            for prefix in signatures_in_box(length, 0, max_parts):
                mu = InfSignature(tuple(x + D for x in prefix), D)
                for n in range(1, max_n + 1):
                    rep = verify_coherency(mu, n, t)
                    res.checked += 1
                    if not rep.ok:
                        res.failures.append(f"mu={mu} n={n}: {rep.mismatches[:3]}")
    return res


def closed_form_suite(max_n: int = 3, max_J: int = 3, max_parts: int = 3, u=Fraction(1, 2),
                      ts=(Fraction(1, 2), Fraction(1, 3)), long_J: int = 40, bound: float = 1e-10) -> SuiteResult:
    """Closed forms at geometric progressions against the chain sums.

    Finite progressions must agree exactly. The infinite-progression forms are
    compared with the finite ones at ``long_J`` terms.
    """
    res = SuiteResult("closed-form")
    for t in ts:
        for n in range(0, max_n + 1):
            lams = list(signatures_in_box(n, 0, max_parts))
            for J in range(1, max_J + 1):
                xs = geometric_values(u, t, J)
                for lam in lams:
                    for mu in signatures_in_box(n + J, 0, max_parts):
                        res.checked += 1
                        if skewP_principal_finite(mu, lam, u, J, t) != eval_skewP_chain(mu, lam, xs, t):
                            res.failures.append(f"P t={t} J={J} mu={format_signature(mu)} lam={format_signature(lam)}")
                    if n == 0:
                        continue
                    for nu in signatures_in_box(n, 0, max_parts):
                        res.checked += 1
                        if skewQ_principal_finite(nu, lam, u, J, t) != eval_skewQ_chain(nu, lam, xs, t):
                            res.failures.append(f"Q t={t} J={J} nu={format_signature(nu)} lam={format_signature(lam)}")
            if n == 0:
                continue
            # infinite progressions: partitions padded with zeros for P, equal lengths for Q
            for lam in lams:
                for mu in lams:
                    pad = lambda s: tuple(s) + (0,) * long_J
                    approx = skewP_principal_finite(pad(mu), lam, u, long_J, t)
                    gap = abs(float(skewP_principal_inf(mu, lam, u, t) - approx))
                    gap_q = abs(float(skewQ_principal_inf(mu, lam, u, t) - skewQ_principal_finite(mu, lam, u, long_J, t)))
                    res.checked += 2
                    res.worst = max(res.worst, gap, gap_q)
                    if gap > bound or gap_q > bound:
                        res.failures.append(f"infinite t={t} {format_signature(mu)}/{format_signature(lam)}: {gap:.3g}, {gap_q:.3g}")
    return res


def support_suite(max_m: int = 4, lo: int = -2, hi: int = 3, t=Fraction(1, 3)) -> SuiteResult:
    """Where links and boundary weights vanish, checked cell by cell.

    A link from mu down to lam is nonzero exactly on the interlacing window,
    and in particular vanishes whenever some conjugate count of lam exceeds
    that of mu. Each link row also sums to one. A boundary weight is nonzero
    exactly when lam_n >= D and lam'_x <= mu'_x for every x.
    """
    res = SuiteResult("support")
    for m in range(2, max_m + 1):
        for mu in signatures_in_box(m, lo, hi):
            for n in range(1, m):
                row = Fraction(0)
                for lam in signatures_in_box(n, lo, hi):
                    v = link(mu, lam, t)
                    row += v
                    res.checked += 1
                    exceeds = any(conjugate_count(lam, x) > conjugate_count(mu, x) for x in range(lo, hi + 1))
                    if (v != 0) != link_support(mu, lam) or (exceeds and v != 0):
                        res.failures.append(f"link {format_signature(mu)} -> {format_signature(lam)} = {v}")
                if row != 1:
                    res.failures.append(f"link row {format_signature(mu)} to level {n} sums to {row}")
    for D in range(lo, 1):
        for length in range(0, 4):
            for prefix in signatures_in_box(length, D, hi):
                mu = InfSignature(prefix, D)
                for n in range(1, 4):
                    if boundary_measure(mu, n, t).total() != 1:
                        res.failures.append(f"boundary measure {mu} at level {n} does not sum to 1")
                    for lam in signatures_in_box(n, lo, hi):
                        w = boundary_weight(mu, lam, t)
                        inside = lam[-1] >= D and all(
                            conjugate_count(lam, x) <= conjugate_count(mu, x) for x in range(D + 1, hi + 1)
                        )
                        res.checked += 1
                        if (w != 0) != inside:
                            res.failures.append(f"boundary {mu} at {format_signature(lam)} = {w}")
    return res


def dual_formula_suite(max_n: int = 2, max_k: int = 2, max_parts: int = 3,
                       ts=(Fraction(1, 2), Fraction(1, 3))) -> SuiteResult:
    """Both chain-law formulas agree exactly, and one step reduces to the Haar law."""
    res = SuiteResult("dual-formula")
    for t in ts:
        for n in range(1, max_n + 1):
            box = list(signatures_in_box(n, 0, max_parts))
            for k in range(1, max_k + 1):
                for chain in itertools.product(box, repeat=k):
                    a = product_cokernel_prob(chain, n, t)
                    b = hl_process_prob(chain, n, t)
                    res.checked += 1
                    if a != b:
                        res.failures.append(f"t={t} chain={[format_signature(c) for c in chain]}: {a} != {b}")
            for lam in box:
                res.checked += 1
                if product_cokernel_prob([lam], n, t) != fw_prob(lam, n, t):
                    res.failures.append(f"t={t} one-step law differs at {format_signature(lam)}")
    return res


HUA_CASES = (
    (1, (0,)),
    (1, (-1,)),
    (1, (2,)),
    (2, (1, 0)),
    (2, (0, -1)),
)


def hua_suite(max_n: int = 2, cap: int | None = None, tol: float = 1e-6,
              params=(Fraction(1, 2), Fraction(1, 3))) -> SuiteResult:
    """The Hua decomposition identity at small corners, over u, t in ``params``.

    ``cap`` is a floor: each (u, t) runs at the smallest cap from there on
    whose truncation tail is certified below tol.
    """
    res = SuiteResult("hua")
    caps = {(u, t): hua_certified_cap(u, t, tol, floor=cap or 12) for u in params for t in params}
    for n, nu in HUA_CASES:
        if n > max_n:
            continue
        for u in params:
            for t in params:
                rep = verify_hua_identity(nu, u, t, caps[u, t], tol)
                res.checked += 1
                res.worst = max(res.worst, rep.gap)
                if not rep.ok:
                    res.failures.append(
                        f"nu={format_signature(nu)} u={u} t={t}: gap {rep.gap:.3g}, "
                        f"tail {rep.truncation_tail:.3g}, certified={rep.certified}"
                    )
    return res


def commutation_suite(max_m: int = 3, max_parts: int = 2, alphas=(Fraction(1, 4), Fraction(1, 3)),
                      t=Fraction(1, 2), cap: int | None = None, bound: float = 1e-8) -> SuiteResult:
    """Kernel commutation for m <= max_m, n < m, with a certified tail at most ``bound``."""
    res = SuiteResult("commutation")
    for alpha in alphas:
        for m in range(2, max_m + 1):
            for mu in signatures_in_box(m, 0, max_parts):
                for n in range(1, m):
                    for nu in signatures_in_box(n, 0, max_parts + 2):
                        c = cap if cap is not None else commutation_cap(mu, alpha, t, bound)
                        rep = verify_commutation(mu, nu, alpha, t, c)
                        res.checked += 1
                        res.worst = max(res.worst, float(rep.tail_bound))
                        if not rep.ok or rep.tail_bound > bound:
                            res.failures.append(
                                f"mu={format_signature(mu)} nu={format_signature(nu)} alpha={alpha}: "
                                f"gap {float(rep.gap):.3g}, bound {float(rep.tail_bound):.3g}"
                            )
    return res


def commutation_cap(mu: tuple, alpha, t, bound: float) -> int:
    """Smallest cap whose certified tail is at most ``bound``."""
    cap = mu[0] + 1
    while gamma_tail_bound(mu, alpha, t, cap) > bound:
        cap += 1
    return cap


SUITES = {
    "skew-cauchy": skew_cauchy_suite,
    "closed-form": closed_form_suite,
    "support": support_suite,
    "coherency": coherency_suite,
    "dual-formula": dual_formula_suite,
    "hua": hua_suite,
    "commutation": commutation_suite,
}
