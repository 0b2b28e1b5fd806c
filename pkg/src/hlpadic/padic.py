"""Finite-precision p-adic matrices and the Monte Carlo samplers built on them.

A p-adic integer is modelled by its residue modulo p^N. Every valuation that
comes out of a computation is therefore only known when it is below N; parts
that cannot be told apart from "divisible by p^N" are reported as
``NEG_INF`` and counted separately, never silently merged with deep finite
valuations.

Two implementations of each sampler live here. The scalar one works on a
:class:`PadicMatrix` with Python integers and runs Gaussian elimination with
valuation pivots. The batch one runs the same elimination on numpy arrays
of shape (samples, rows, cols). Tests check that the two agree.
"""

from __future__ import annotations

import itertools
import math
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .signatures import NEG_INF, InfSignature, Measure, check_signature, finite_parts

DEFAULT_GUARD = 8

# numpy arithmetic below needs p^N * 2 < 2^62 so that sums never overflow
MAX_MODULUS_BITS = 60

# stands in for -inf inside integer arrays
NEG_SENTINEL = -(1 << 40)


def _check_prime(p: int) -> None:
    if p < 2 or any(p % d == 0 for d in range(2, math.isqrt(p) + 1)):
        raise ValueError(f"p must be a prime, got {p}")


def _modulus(p: int, N: int) -> int:
    _check_prime(p)
    if N < 1:
        raise ValueError("precision must be at least 1")
    M = p**N
    if M.bit_length() > MAX_MODULUS_BITS:
        raise ValueError(f"p^N = {p}^{N} exceeds the supported {MAX_MODULUS_BITS}-bit working modulus")
    return M


def valuation(x: int, p: int, N: int) -> int:
    """p-adic valuation of a residue mod p^N, capped at N (meaning 'at least N')."""
    x %= p**N
    if x == 0:
        return N
    v = 0
    while x % p == 0:
        x //= p
        v += 1
    return v


# --- random streams ----------------------------------------------------------


@dataclass(frozen=True)
class RngStream:
    """An explicitly seeded random stream.

    Streams with the same seed but different ``stream_id`` are statistically
    independent, and the same pair always reproduces the same numbers.
    """

    seed: int
    stream_id: int = 0

    def generator(self) -> np.random.Generator:
        seq = np.random.SeedSequence(self.seed, spawn_key=(self.stream_id,))
        return np.random.Generator(np.random.PCG64(seq))


def _as_generator(rng) -> np.random.Generator:
    if isinstance(rng, RngStream):
        return rng.generator()
    if isinstance(rng, np.random.Generator):
        return rng
    raise TypeError("rng must be an RngStream or a numpy Generator")


# --- scalar matrices ----------------------------------------------------------


@dataclass(frozen=True)
class PadicMatrix:
    """A rows x cols matrix over Z_p known modulo p^N."""

    p: int
    N: int
    entries: tuple

    def __post_init__(self):
        M = _modulus(self.p, self.N)
        rows = tuple(tuple(int(x) % M for x in row) for row in self.entries)
        if len({len(r) for r in rows}) > 1:
            raise ValueError("rows must all have the same length")
        object.__setattr__(self, "entries", rows)

    @classmethod
    def from_array(cls, p: int, N: int, array) -> "PadicMatrix":
        return cls(p, N, tuple(tuple(int(x) for x in row) for row in np.asarray(array)))

    @property
    def modulus(self) -> int:
        return self.p**self.N

    @property
    def rows(self) -> int:
        return len(self.entries)

    @property
    def cols(self) -> int:
        return len(self.entries[0]) if self.entries else 0

    def to_array(self) -> np.ndarray:
        return np.array(self.entries, dtype=np.int64).reshape(self.rows, self.cols)

    def transpose(self) -> "PadicMatrix":
        return PadicMatrix(self.p, self.N, tuple(zip(*self.entries)))

    def __matmul__(self, other: "PadicMatrix") -> "PadicMatrix":
        if (self.p, self.N) != (other.p, other.N):
            raise ValueError("matrices live in different rings")
        if self.cols != other.rows:
            raise ValueError(f"cannot multiply {self.rows}x{self.cols} by {other.rows}x{other.cols}")
        M = self.modulus
        out = tuple(
            tuple(sum(a * b for a, b in zip(row, col)) % M for col in zip(*other.entries))
            for row in self.entries
        )
        return PadicMatrix(self.p, self.N, out)


def haar_sample(n: int, m: int, p: int, N: int, rng) -> PadicMatrix:
    """An n x m matrix with iid entries uniform modulo p^N."""
    M = _modulus(p, N)
    gen = _as_generator(rng)
    return PadicMatrix.from_array(p, N, gen.integers(0, M, size=(n, m), dtype=np.int64))


def _det_mod_p_nonzero(A: PadicMatrix) -> bool:
    form = smith_normal_form(PadicMatrix(A.p, 1, A.entries))
    return all(part == 0 for part in form.signature)


def haar_gl_sample(n: int, p: int, N: int, rng) -> PadicMatrix:
    """Haar-random element of GL_n(Z_p) mod p^N, by rejection from Haar matrices."""
    gen = _as_generator(rng)
    while True:
        A = haar_sample(n, n, p, N, gen)
        if _det_mod_p_nonzero(A):
            return A


@dataclass(frozen=True)
class SmithForm:
    """Singular numbers of a matrix known modulo p^N.

    ``signature`` lists lam_i = -v_i for the pivot valuations v_1 <= v_2 <= ...;
    pivots that are zero modulo p^N appear as ``NEG_INF``.
    """

    signature: tuple
    valuations: tuple
    precision: int

    @property
    def at_precision(self) -> int:
        """How many parts are -inf only because the precision ran out."""
        return sum(1 for v in self.valuations if v >= self.precision)

    def guard_hit(self, guard: int = DEFAULT_GUARD) -> bool:
        """True when some finite pivot valuation falls in the guard band [N - guard, N)."""
        return any(self.precision - guard <= v < self.precision for v in self.valuations)

    def cokernel(self) -> tuple:
        """The cokernel type, -SN read backwards; only for full-rank matrices."""
        if NEG_INF in self.signature:
            raise ValueError("cokernel is infinite at this precision")
        return tuple(-x for x in reversed(self.signature))


def smith_normal_form(A: PadicMatrix) -> SmithForm:
    """Singular numbers by Gaussian elimination with minimal-valuation pivots.

    At each stage the entry of least valuation v is moved to the corner, its
    unit part is inverted modulo p^N, and it clears its row and column. The
    pivots come out with nondecreasing valuations.
    """
    p, N, M = A.p, A.N, A.modulus
    work = [list(row) for row in A.entries]
    rows, cols = A.rows, A.cols
    valuations = []
    for step in range(min(rows, cols)):
        best, where = N, None
        for i in range(step, rows):
            for j in range(step, cols):
                v = valuation(work[i][j], p, N)
                if v < best:
                    best, where = v, (i, j)
        if where is None:
            valuations.extend([N] * (min(rows, cols) - step))
            break
        i, j = where
        work[step], work[i] = work[i], work[step]
        for row in work:
            row[step], row[j] = row[j], row[step]
        scale = p**best
        unit_inv = pow(work[step][step] // scale, -1, M)
        pivot_row = work[step]
        for r in range(step + 1, rows):
            factor = (work[r][step] // scale) * unit_inv % M
            if factor:
                work[r] = [(a - factor * b) % M for a, b in zip(work[r], pivot_row)]
        for c in range(step + 1, cols):
            factor = (pivot_row[c] // scale) * unit_inv % M
            if factor:
                for r in range(step, rows):
                    work[r][c] = (work[r][c] - factor * work[r][step]) % M
        valuations.append(best)
    signature = tuple(NEG_INF if v >= N else -v for v in valuations)
    return SmithForm(signature, tuple(valuations), N)


def _check_orbit_parts(lam: tuple, N: int, guard: int) -> tuple:
    lam = check_signature(lam)
    finite = finite_parts(lam)
    if finite and finite[0] > 0:
        raise ValueError("only Z_p-valued orbits are simulated: parts must be <= 0")
    if finite and finite[-1] < -(N - guard):
        raise ValueError(
            f"part {finite[-1]} needs more than the {N - guard} digits left after the guard band"
        )
    return lam


def sample_orbit(lam: Sequence, n: int, m: int, p: int, N: int, rng, guard: int = DEFAULT_GUARD) -> PadicMatrix:
    """U diag(p^{-lam_1}, ...) V with U, V Haar on GL_n(Z_p) and GL_m(Z_p)."""
    lam = _check_orbit_parts(tuple(lam), N, guard)
    if len(lam) != min(n, m):
        raise ValueError(f"an {n}x{m} matrix has {min(n, m)} singular numbers, got {len(lam)}")
    gen = _as_generator(rng)
    U = haar_gl_sample(n, p, N, gen)
    V = haar_gl_sample(m, p, N, gen)
    diag = [[0] * m for _ in range(n)]
    for i, part in enumerate(lam):
        diag[i][i] = 0 if part is NEG_INF else p ** (-part)
    return U @ PadicMatrix(p, N, tuple(map(tuple, diag))) @ V


def drop_column(A: PadicMatrix) -> PadicMatrix:
    """Remove the last column, keeping the first cols - 1."""
    if A.cols < 2:
        raise ValueError("dropping the only column leaves an empty matrix")
    return PadicMatrix(A.p, A.N, tuple(row[:-1] for row in A.entries))


def drop_row(A: PadicMatrix) -> PadicMatrix:
    """Remove the last row, keeping the first rows - 1."""
    if A.rows < 2:
        raise ValueError("dropping the only row leaves an empty matrix")
    return PadicMatrix(A.p, A.N, A.entries[:-1])


@dataclass(frozen=True)
class ChainSample:
    signatures: tuple
    overflow: bool


def product_chain_sample(n: int, k: int, p: int, N: int, rng, guard: int = DEFAULT_GUARD) -> ChainSample:
    """Singular numbers of A_1, A_2 A_1, ..., A_k ... A_1 for iid Haar A_i.

    ``overflow`` is set when a pivot valuation reaches N - guard.
    """
    if k < 1:
        raise ValueError("k must be at least 1")
    gen = _as_generator(rng)
    product = None
    out = []
    overflow = False
    for _ in range(k):
        A = haar_sample(n, n, p, N, gen)
        product = A if product is None else A @ product
        form = smith_normal_form(product)
        overflow |= any(v >= N - guard for v in form.valuations)
        out.append(form.signature)
    return ChainSample(tuple(out), overflow)


def _check_e_mu(mu: InfSignature) -> tuple:
    if not isinstance(mu, InfSignature):
        raise TypeError("mu must be an InfSignature")
    if (mu.prefix and mu.prefix[0] > 0) or (mu.tail is not NEG_INF and mu.tail > 0):
        raise ValueError("only Z_p-valued ensembles are simulated: parts must be <= 0")
    if mu.tail is NEG_INF:
        return mu.prefix, None
    return tuple(x for x in mu.prefix if x > mu.tail), mu.tail


def sample_E_mu(mu: InfSignature, rows: int, cols: int, p: int, N: int, rng, guard: int = DEFAULT_GUARD) -> PadicMatrix:
    """The rows x cols corner of sum_l p^{-mu_l} X^(l) Y^(l)^T + p^{-tail} Z.

    X^(l), Y^(l) and Z have iid Haar entries; the sum runs over the parts
    strictly above the tail value and the Z term is absent for a -inf tail.
    """
    spikes, tail = _check_e_mu(mu)
    lowest = min(list(spikes) + ([tail] if tail is not None else []), default=0)
    if lowest < -(N - guard):
        raise ValueError(f"part {lowest} needs more than the {N - guard} digits left after the guard band")
    gen = _as_generator(rng)
    M = _modulus(p, N)
    total = [[0] * cols for _ in range(rows)]
    for part in spikes:
        x = gen.integers(0, M, size=rows, dtype=np.int64)
        y = gen.integers(0, M, size=cols, dtype=np.int64)
        scale = p ** (-part)
        for i in range(rows):
            for j in range(cols):
                total[i][j] += scale * int(x[i]) * int(y[j])
    if tail is not None:
        z = gen.integers(0, M, size=(rows, cols), dtype=np.int64)
        scale = p ** (-tail)
        for i in range(rows):
            for j in range(cols):
                total[i][j] += scale * int(z[i, j])
    return PadicMatrix(p, N, tuple(map(tuple, total)))


# --- empirical measures ----------------------------------------------------------


def empirical_measure(samples: Iterable) -> Measure:
    """Frequency measure of a list of hashable keys (exact rational frequencies)."""
    counts = Counter(samples)
    return measure_from_counts(counts)


def measure_from_counts(counts: dict) -> Measure:
    total = sum(counts.values())
    if total == 0:
        raise ValueError("no samples")
    return Measure({k: Fraction(c, total) for k, c in counts.items()})


def _weights(m) -> dict:
    if isinstance(m, Measure):
        return m.weights
    return dict(m)


def tv_distance(a, b) -> float:
    """Half the l1 distance over the union of supports."""
    wa, wb = _weights(a), _weights(b)
    keys = set(wa) | set(wb)
    return 0.5 * sum(abs(float(wa.get(k, 0)) - float(wb.get(k, 0))) for k in keys)


# --- batch arithmetic ---------------------------------------------------------------


def _mulmod(a: np.ndarray, b: np.ndarray, M: int) -> np.ndarray:
    """Elementwise a * b mod M for int64 arrays with entries in [0, M).

    When M^2 would overflow, b is split into chunks small enough that every
    partial product stays below 2^62.
    """
    bits = M.bit_length()
    if 2 * bits <= 62:
        return (a * b) % M
    chunk = 62 - bits
    mask = (1 << chunk) - 1
    pieces = -(-bits // chunk)
    out = np.zeros(np.broadcast(a, b).shape, dtype=np.int64)
    for i in reversed(range(pieces)):
        digit = (b >> (i * chunk)) & mask
        out = ((out << chunk) + a * digit) % M
    return out


def batch_matmul(A: np.ndarray, B: np.ndarray, M: int) -> np.ndarray:
    """Batched matrix product modulo M for arrays of shape (S, n, k) and (S, k, m)."""
    S, n, k = A.shape
    m = B.shape[2]
    out = np.zeros((S, n, m), dtype=np.int64)
    for j in range(k):
        term = _mulmod(A[:, :, j][:, :, None], B[:, j, :][:, None, :], M)
        out = (out + term) % M
    return out


def _batch_det(A: np.ndarray, M: int) -> np.ndarray:
    """Determinants modulo M of a batch of k x k matrices via the Leibniz sum."""
    S, k, _ = A.shape
    total = np.zeros(S, dtype=np.int64)
    for perm in itertools.permutations(range(k)):
        term = np.ones(S, dtype=np.int64) % M
        for i, j in enumerate(perm):
            term = _mulmod(term, A[:, i, j], M)
        inversions = sum(1 for a, b in itertools.combinations(perm, 2) if a > b)
        total = (total - term) % M if inversions % 2 else (total + term) % M
    return total


def batch_valuation(x: np.ndarray, p: int, N: int) -> np.ndarray:
    """Valuations of residues mod p^N, with N standing for 'at least N'."""
    x = np.asarray(x, dtype=np.int64)
    v = np.where(x == 0, N, 0).astype(np.int64)
    live = x != 0
    y = x.copy()
    while True:
        divisible = live & (y % p == 0)
        if not divisible.any():
            return v
        v += divisible
        y = np.where(divisible, y // p, y)
        live = divisible


def batch_pivot_valuations(A: np.ndarray, p: int, N: int) -> np.ndarray:
    """Pivot valuations v_1 <= v_2 <= ... of each matrix in a batch, capped at N.

    The same minimal-valuation elimination as :func:`smith_normal_form`, done
    for all samples at once. Instead of inverting the pivot's unit part u,
    every other row is first multiplied by u, which is also invertible and
    keeps the arithmetic free of modular inverses.
    """
    M = p**N
    X = np.array(A, dtype=np.int64)
    S, n, m = X.shape
    r = min(n, m)
    out = np.empty((S, r), dtype=np.int64)
    samples = np.arange(S)
    for step in range(r):
        a, b = X.shape[1], X.shape[2]
        V = batch_valuation(X, p, N).reshape(S, a * b)
        flat = V.argmin(axis=1)
        best = V[samples, flat]
        out[:, step] = best
        if step == r - 1:
            break
        i, j = flat // b, flat % b
        row_order = np.tile(np.arange(a), (S, 1))
        row_order[samples, i] = 0
        row_order[:, 0] = i
        col_order = np.tile(np.arange(b), (S, 1))
        col_order[samples, j] = 0
        col_order[:, 0] = j
        X = np.take_along_axis(X, row_order[:, :, None], axis=1)
        X = np.take_along_axis(X, col_order[:, None, :], axis=2)
        scale = np.array([p**int(v) if v < N else 1 for v in range(N + 1)], dtype=np.int64)[best]
        unit = (X[:, 0, 0] // scale)[:, None, None]
        below = (X[:, 1:, 0] // scale[:, None])[:, :, None]
        pivot_row = X[:, 0:1, 1:]
        X = (_mulmod(unit, X[:, 1:, 1:], M) - _mulmod(below, pivot_row, M)) % M
        # a zero pivot means everything left is zero as well
        X[best >= N] = 0
    return out


@dataclass
class BatchSmith:
    """Singular numbers for a batch: parts use NEG_SENTINEL for -inf."""

    parts: np.ndarray
    guard_hit: np.ndarray
    deep_count: np.ndarray

    @property
    def at_precision(self) -> np.ndarray:
        return self.deep_count > 0

    def overflow(self, structural_deep: int = 0) -> np.ndarray:
        """Samples in the guard band, or with more -inf parts than the ensemble forces."""
        return self.guard_hit | (self.deep_count > structural_deep)


def batch_smith(A: np.ndarray, p: int, N: int, guard: int = DEFAULT_GUARD) -> BatchSmith:
    V = batch_pivot_valuations(A, p, N)
    deep = V >= N
    parts = np.where(deep, NEG_SENTINEL, -V)
    guard_hit = ((V >= N - guard) & ~deep).any(axis=1)
    return BatchSmith(parts, guard_hit, deep.sum(axis=1))


def batch_haar(S: int, n: int, m: int, p: int, N: int, gen: np.random.Generator) -> np.ndarray:
    return gen.integers(0, _modulus(p, N), size=(S, n, m), dtype=np.int64)


def batch_gl(S: int, n: int, p: int, N: int, gen: np.random.Generator) -> tuple:
    """S Haar elements of GL_n(Z_p) mod p^N by rejection; returns (matrices, draws)."""
    out = batch_haar(S, n, n, p, N, gen)
    draws = S
    bad = _batch_det(out % p, p) == 0
    while bad.any():
        count = int(bad.sum())
        out[bad] = batch_haar(count, n, n, p, N, gen)
        draws += count
        bad[bad] = _batch_det(out[bad] % p, p) == 0
    return out, draws


def batch_orbit(lam: tuple, S: int, n: int, m: int, p: int, N: int, gen, guard: int = DEFAULT_GUARD) -> np.ndarray:
    lam = _check_orbit_parts(tuple(lam), N, guard)
    if len(lam) != min(n, m):
        raise ValueError(f"an {n}x{m} matrix has {min(n, m)} singular numbers, got {len(lam)}")
    M = _modulus(p, N)
    U, _ = batch_gl(S, n, p, N, gen)
    V, _ = batch_gl(S, m, p, N, gen)
    diag = np.zeros((n, m), dtype=np.int64)
    for i, part in enumerate(lam):
        diag[i, i] = 0 if part is NEG_INF else p ** (-part) % M
    middle = np.broadcast_to(diag, (S, n, m)).copy()
    return batch_matmul(batch_matmul(U, middle, M), V, M)


def batch_E_mu(mu: InfSignature, S: int, rows: int, cols: int, p: int, N: int, gen, guard: int = DEFAULT_GUARD) -> np.ndarray:
    spikes, tail = _check_e_mu(mu)
    lowest = min(list(spikes) + ([tail] if tail is not None else []), default=0)
    if lowest < -(N - guard):
        raise ValueError(f"part {lowest} needs more than the {N - guard} digits left after the guard band")
    M = _modulus(p, N)
    total = np.zeros((S, rows, cols), dtype=np.int64)
    for part in spikes:
        x = gen.integers(0, M, size=(S, rows, 1), dtype=np.int64)
        y = gen.integers(0, M, size=(S, 1, cols), dtype=np.int64)
        outer = _mulmod(x, y, M)
        total = (total + _mulmod(outer, np.int64(p ** (-part) % M), M)) % M
    if tail is not None:
        z = gen.integers(0, M, size=(S, rows, cols), dtype=np.int64)
        total = (total + _mulmod(z, np.int64(p ** (-tail) % M), M)) % M
    return total


def parts_to_key(row) -> tuple:
    return tuple(NEG_INF if x == NEG_SENTINEL else int(x) for x in row)


def count_rows(parts: np.ndarray) -> Counter:
    """Counter of signature keys from a (S, r) parts array."""
    if parts.shape[1] == 0:
        return Counter({(): parts.shape[0]})
    uniq, counts = np.unique(parts, axis=0, return_counts=True)
    return Counter({parts_to_key(u): int(c) for u, c in zip(uniq, counts)})
