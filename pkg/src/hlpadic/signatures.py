"""Signatures and the combinatorial statistics the formulas are built from.

A signature is a plain tuple of weakly decreasing integers. Extended
signatures may end in copies of :data:`NEG_INF`. Infinite signatures are a
finite prefix followed by a tail rule, see :class:`InfSignature`.
"""

from __future__ import annotations

import functools
import json
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Union


@functools.total_ordering
class _Infinity:
    """Signed infinity that compares correctly against Python ints."""

    __slots__ = ("sign",)

    def __init__(self, sign: int):
        self.sign = sign

    def __eq__(self, other):
        return isinstance(other, _Infinity) and other.sign == self.sign

    def __lt__(self, other):
        if isinstance(other, _Infinity):
            return self.sign < other.sign
        return self.sign < 0

    def __hash__(self):
        return hash(("inf", self.sign))

    def __neg__(self):
        return INF if self.sign < 0 else NEG_INF

    def __repr__(self):
        return "INF" if self.sign > 0 else "NEG_INF"

    def __str__(self):
        return "inf" if self.sign > 0 else "-inf"


INF = _Infinity(1)
NEG_INF = _Infinity(-1)


def is_infinite(x) -> bool:
    return isinstance(x, _Infinity)


def check_signature(parts: Iterable) -> tuple:
    """Return ``parts`` as a tuple after checking it is weakly decreasing.

    Integer parts and trailing ``NEG_INF`` entries are accepted, so this also
    validates extended signatures.
    """
    out = tuple(parts)
    for p in out:
        if p is NEG_INF:
            continue
        if isinstance(p, bool) or not isinstance(p, int):
            raise ValueError(f"signature parts must be integers, got {p!r}")
    for a, b in zip(out, out[1:]):
        if a < b:
            raise ValueError(f"signature {format_signature(out)} is not weakly decreasing")
    return out


def is_signature(parts) -> bool:
    try:
        check_signature(parts)
    except ValueError:
        return False
    return True


def finite_parts(lam: tuple) -> tuple:
    return tuple(p for p in lam if p is not NEG_INF)


@dataclass(frozen=True)
class InfSignature:
    """An infinite signature: ``prefix`` followed by infinitely many ``tail``.

    ``tail`` is either an integer D (so the signature lies in Y + D) or
    ``NEG_INF``, for signatures with finitely many finite parts.
    """

    prefix: tuple
    tail: Union[int, _Infinity]

    def __post_init__(self):
        prefix = check_signature(self.prefix)
        object.__setattr__(self, "prefix", prefix)
        if self.tail is not NEG_INF:
            if isinstance(self.tail, bool) or not isinstance(self.tail, int):
                raise ValueError("tail must be an integer or NEG_INF")
            if prefix and prefix[-1] < self.tail:
                raise ValueError("prefix parts must be at least the tail value")
        elif NEG_INF in prefix:
            raise ValueError("prefix must be finite; use the tail for -inf parts")

    def part(self, i: int):
        """The i-th part, counting from 1."""
        if i <= len(self.prefix):
            return self.prefix[i - 1]
        return self.tail

    def truncate(self, n: int) -> tuple:
        """The first n parts as a (possibly extended) signature."""
        return tuple(self.part(i) for i in range(1, n + 1))

    @property
    def finite_count(self):
        """Number of finite parts (INF for a constant tail)."""
        return len(self.prefix) if self.tail is NEG_INF else INF

    def __str__(self):
        body = ",".join(str(p) for p in self.prefix)
        return f"({body};{self.tail}...)"


def conjugate_count(lam, x: int):
    """lam'_x, the number of parts that are at least ``x``.

    For an infinite signature with constant tail D this is ``INF`` whenever
    x <= D.
    """
    if isinstance(lam, InfSignature):
        if lam.tail is not NEG_INF and x <= lam.tail:
            return INF
        lam = lam.prefix
    return sum(1 for p in lam if p is not NEG_INF and p >= x)


def multiplicity(lam, x: int):
    """m_x, the number of parts equal to x (INF at the tail of an InfSignature)."""
    if isinstance(lam, InfSignature):
        if lam.tail is not NEG_INF and x == lam.tail:
            return INF
        lam = lam.prefix
    return sum(1 for p in lam if p == x)


def size(lam: tuple) -> int:
    return sum(lam)


def n_stat(lam: tuple) -> int:
    """n(lam) = sum over i of (i - 1) lam_i, with i counted from 1."""
    return sum(i * p for i, p in enumerate(lam))


def _binom2(k: int) -> int:
    return k * (k - 1) // 2 if k > 1 else 0


def n_stat_conjugate(lam: tuple) -> int:
    """n(lam) as sum_{x>=1} C(lam'_x, 2); only valid for nonnegative lam."""
    if lam and lam[-1] < 0:
        raise ValueError("the conjugate formula needs nonnegative parts")
    top = lam[0] if lam else 0
    return sum(_binom2(conjugate_count(lam, x)) for x in range(1, top + 1))


def n_skew(nu: tuple, lam: tuple, partitions: bool = False) -> int:
    """n(nu/lam), which measures how far nu and lam are from interlacing.

    Both the pairwise form sum_{i<j} max(nu_j - lam_i, 0) and the conjugate
    form sum_x C(nu'_{x+1} - lam'_{x+1}, 2) are computed and must agree. With
    ``partitions=True`` the inputs are padded with zeros to a common length
    and the conjugate sum starts at x = 0.
    """
    nu = tuple(nu)
    lam = tuple(lam)
    if partitions:
        length = max(len(nu), len(lam))
        nu = nu + (0,) * (length - len(nu))
        lam = lam + (0,) * (length - len(lam))
    elif len(nu) != len(lam):
        raise ValueError("n_skew needs signatures of equal length")
    n = len(nu)
    if n == 0:
        return 0
    pairwise = sum(
        max(nu[j] - lam[i], 0) for i in range(n) for j in range(i + 1, n)
    )
    start = 0 if partitions else lam[-1]
    top = max(nu[0], lam[0])
    conjugate = sum(
        _binom2(conjugate_count(nu, x + 1) - conjugate_count(lam, x + 1))
        for x in range(start, top + 1)
    )
    if pairwise != conjugate:
        raise AssertionError(
            f"n_skew formulas disagree for {nu}/{lam}: {pairwise} != {conjugate}"
        )
    return pairwise


def interlace_P(mu: tuple, lam: tuple) -> bool:
    """True when lam precedes mu in the P-interlacing order.

    Here len(mu) = len(lam) + 1 and mu_i >= lam_i >= mu_{i+1}.
    """
    if len(mu) != len(lam) + 1:
        raise ValueError(
            f"P-interlacing needs lengths n+1 and n, got {len(mu)} and {len(lam)}"
        )
    return all(mu[i] >= lam[i] >= mu[i + 1] for i in range(len(lam)))


def interlace_Q(nu: tuple, lam: tuple) -> bool:
    """True when lam precedes nu in the Q-interlacing order.

    Both have length n, nu_i >= lam_i for all i and lam_i >= nu_{i+1}.
    """
    if len(nu) != len(lam):
        raise ValueError(
            f"Q-interlacing needs equal lengths, got {len(nu)} and {len(lam)}"
        )
    n = len(nu)
    return all(nu[i] >= lam[i] for i in range(n)) and all(
        lam[i] >= nu[i + 1] for i in range(n - 1)
    )


def translate(lam: tuple, shift: int) -> tuple:
    return tuple(p if p is NEG_INF else p + shift for p in lam)


def negate_reverse(lam: tuple) -> tuple:
    """-lam = (-lam_n, ..., -lam_1); turns -inf parts into leading +inf."""
    return tuple(-p for p in reversed(lam))


def signatures_in_box(n: int, lo: int, hi: int):
    """All signatures of length n with parts in [lo, hi], in decreasing order."""
    if n == 0:
        yield ()
        return
    if hi < lo:
        return

    def rec(prefix, bound, remaining):
        if remaining == 0:
            yield tuple(prefix)
            return
        for p in range(bound, lo - 1, -1):
            prefix.append(p)
            yield from rec(prefix, p, remaining - 1)
            prefix.pop()

    yield from rec([], hi, n)


def format_signature(lam) -> str:
    if isinstance(lam, InfSignature):
        return str(lam)
    if lam and isinstance(lam[0], tuple):
        return "|".join(format_signature(x) for x in lam)
    return "(" + ",".join(str(p) for p in lam) + ")"


def parse_signature(text: str) -> tuple:
    """Parse ``"3,1,0"`` (or ``"(3,1,0)"``, or ``""`` for the empty signature)."""
    text = text.strip().strip("()[]")
    if not text:
        return ()
    parts = []
    for piece in text.split(","):
        piece = piece.strip()
        if piece in ("-inf", "-oo"):
            parts.append(NEG_INF)
        else:
            parts.append(int(piece))
    return check_signature(parts)


# JSON: integer arrays, "-inf" for negative infinity, and
# {"prefix": [...], "tail": {"const": D} | "neg_inf"} for infinite signatures.


def to_json_obj(lam):
    if isinstance(lam, InfSignature):
        tail = "neg_inf" if lam.tail is NEG_INF else {"const": lam.tail}
        return {"prefix": list(lam.prefix), "tail": tail}
    if lam and isinstance(lam[0], tuple):
        return [to_json_obj(x) for x in lam]
    return ["-inf" if p is NEG_INF else p for p in lam]


def from_json_obj(obj):
    if isinstance(obj, dict):
        tail = obj["tail"]
        if tail == "neg_inf":
            return InfSignature(tuple(obj["prefix"]), NEG_INF)
        return InfSignature(tuple(obj["prefix"]), int(tail["const"]))
    if obj and isinstance(obj[0], list):
        return tuple(from_json_obj(x) for x in obj)
    return check_signature(NEG_INF if p == "-inf" else p for p in obj)


def dumps(lam) -> str:
    return json.dumps(to_json_obj(lam))


def loads(text: str):
    return from_json_obj(json.loads(text))


class Measure:
    """A finitely supported measure with exact rational weights.

    ``complete=True`` promises the weights sum to exactly 1 and is checked on
    construction. Partial measures record ``deficit``, an upper bound on the
    mass that was left out, and optionally ``deficit_bound``, a bound on that
    mass which was certified without assuming the full law sums to one.
    """

    def __init__(self, weights: dict, complete: bool = True, deficit=0, deficit_bound=None):
        self.weights = {k: Fraction(v) for k, v in weights.items() if v != 0}
        for key, w in self.weights.items():
            if w < 0:
                raise ValueError(f"negative weight {w} at {key}")
        self.complete = complete
        self.deficit = deficit
        self.deficit_bound = deficit_bound
        if complete and self.total() != 1:
            raise ValueError(f"complete measure has total mass {self.total()}")

    def total(self) -> Fraction:
        return sum(self.weights.values(), Fraction(0))

    def __getitem__(self, key) -> Fraction:
        return self.weights.get(key, Fraction(0))

    def __len__(self):
        return len(self.weights)

    def __iter__(self):
        return iter(self.keys())

    def keys(self):
        return sorted(self.weights)

    def items(self):
        return [(k, self.weights[k]) for k in self.keys()]

    def as_floats(self) -> dict:
        return {k: float(w) for k, w in self.items()}

    def to_json_obj(self) -> list:
        return [
            {
                "signature": to_json_obj(k),
                "weight": f"{w.numerator}/{w.denominator}",
                "float": float(w),
            }
            for k, w in self.items()
        ]

    def __repr__(self):
        body = ", ".join(f"{format_signature(k)}: {w}" for k, w in self.items())
        return f"Measure({{{body}}}, complete={self.complete})"
