"""Monte Carlo experiments paired with the exact laws they are meant to match.

Each experiment draws its samples in fixed-size chunks. Chunk i always uses
the random stream (seed, i), so the empirical counts do not depend on how
many workers share the chunks. Counts are merged by addition, which makes
the result independent of scheduling as well. Exact laws are cached per
parameter set, so repeated seeds reuse them.
"""

from __future__ import annotations

import os
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache, partial

import numpy as np

from .branching_graph import boundary_measure_2d, link2d
from .distributions import fw_prob, product_cokernel_law
from .padic import (
    DEFAULT_GUARD,
    RngStream,
    batch_E_mu,
    batch_haar,
    batch_matmul,
    batch_orbit,
    batch_smith,
    count_rows,
    measure_from_counts,
    parts_to_key,
    tv_distance,
)
from .signatures import NEG_INF, InfSignature, Measure, negate_reverse, signatures_in_box

DEFAULT_CHUNK = 50_000


def default_workers() -> int:
    """Worker count from HLPADIC_THREADS, falling back to 1."""
    raw = os.environ.get("HLPADIC_THREADS", "").strip()
    if not raw:
        return 1
    try:
        value = int(raw)
    except ValueError:
        raise ValueError(f"HLPADIC_THREADS must be a positive integer, got {raw!r}") from None
    if value < 1:
        raise ValueError(f"HLPADIC_THREADS must be a positive integer, got {raw!r}")
    return value


@dataclass
class ChunkResult:
    counts: Counter
    guard_hits: int = 0
    at_precision: int = 0
    overflow: int = 0
    log: list | None = None


def _flag_strings(guard_hit: np.ndarray, deep: np.ndarray) -> list:
    """Per-sample flags: "guard", "precision", both joined by "|", or empty."""
    labels = {(False, False): "", (True, False): "guard", (False, True): "precision", (True, True): "guard|precision"}
    return [labels[bool(g), bool(d)] for g, d in zip(guard_hit, deep)]


def _chunk(res, structural_deep: int = 0, log: bool = False) -> ChunkResult:
    entries = None
    if log:
        keys = [parts_to_key(row) for row in res.parts]
        entries = list(zip(keys, _flag_strings(res.guard_hit, res.deep_count > structural_deep)))
    return ChunkResult(
        count_rows(res.parts),
        int(res.guard_hit.sum()),
        int(res.at_precision.sum()),
        int(res.overflow(structural_deep).sum()),
        entries,
    )


@dataclass
class MonteCarloResult:
    """Merged output of a sampling run."""

    counts: Counter
    samples: int
    guard_hits: int
    at_precision: int
    overflow: int
    seed: int
    workers: int
    chunk: int
    exact: Measure | None = None
    log: list | None = None

    def measure(self) -> Measure:
        return measure_from_counts(self.counts)

    @property
    def overflow_rate(self) -> float:
        return self.overflow / self.samples

    def tv(self) -> float:
        if self.exact is None:
            raise ValueError("no exact law attached to this experiment")
        return tv_distance(self.measure(), self.exact)


def run_chunks(kernel, samples: int, seed: int, workers: int = 1, chunk: int = DEFAULT_CHUNK) -> tuple:
    """Run ``kernel(count, generator)`` over the chunks and merge the results.

    Returns (counts, guard_hits, at_precision, overflow, log); the per-sample
    log is in trial order and is None unless the kernel produced one.
    """
    if samples < 1:
        raise ValueError("samples must be positive")
    sizes = [min(chunk, samples - start) for start in range(0, samples, chunk)]
    jobs = [(size, seed, i) for i, size in enumerate(sizes)]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(partial(_run_one, kernel), jobs))
    else:
        parts = [_run_one(kernel, job) for job in jobs]
    counts: Counter = Counter()
    guard_hits = at_precision = overflow = 0
    log = [] if any(part.log is not None for part in parts) else None
    for part in parts:
        counts.update(part.counts)
        guard_hits += part.guard_hits
        at_precision += part.at_precision
        overflow += part.overflow
        if log is not None:
            log.extend(part.log)
    return counts, guard_hits, at_precision, overflow, log


def _run_one(kernel, job) -> ChunkResult:
    size, seed, stream_id = job
    return kernel(size, RngStream(seed, stream_id).generator())


# --- kernels (module level so they pickle) ----------------------------------


def _haar_kernel(n: int, p: int, N: int, guard: int, log: bool, count: int, gen) -> ChunkResult:
    A = batch_haar(count, n, n, p, N, gen)
    res = batch_smith(A, p, N, guard)
    return _chunk(res, 0, log)


def _chain_kernel(n: int, k: int, p: int, N: int, guard: int, log: bool, count: int, gen) -> ChunkResult:
    M = p**N
    product = None
    columns = []
    guard_hits = np.zeros(count, dtype=bool)
    deep = np.zeros(count, dtype=bool)
    for _ in range(k):
        A = batch_haar(count, n, n, p, N, gen)
        product = A if product is None else batch_matmul(A, product, M)
        res = batch_smith(product, p, N, guard)
        columns.append(res.parts)
        guard_hits |= res.guard_hit
        deep |= res.at_precision
    clean = ~(guard_hits | deep)
    for before, after in zip(columns, columns[1:]):
        # cokernels grow along the chain, so singular numbers can only drop
        if np.any((after > before)[clean]):
            raise AssertionError("cokernel chain failed to increase on an unflagged sample")
    stacked = np.concatenate(columns, axis=1)
    split = lambda key: tuple(key[i * n:(i + 1) * n] for i in range(k))
    counts = Counter({split(key): c for key, c in count_rows(stacked).items()})
    entries = None
    if log:
        entries = list(zip((split(parts_to_key(row)) for row in stacked), _flag_strings(guard_hits, deep)))
    return ChunkResult(counts, int(guard_hits.sum()), int(deep.sum()), int((guard_hits | deep).sum()), entries)


def _corner_kernel(lam: tuple, rows: int, cols: int, axis: str, p: int, N: int, guard: int, log: bool,
                   count: int, gen) -> ChunkResult:
    A = batch_orbit(lam, count, rows, cols, p, N, gen, guard)
    A = A[:, :, :-1] if axis == "column" else A[:, :-1, :]
    res = batch_smith(A, p, N, guard)
    rank = sum(1 for x in lam if x is not NEG_INF)
    return _chunk(res, max(0, min(A.shape[1], A.shape[2]) - rank), log)


def _e_mu_kernel(mu: InfSignature, rows: int, cols: int, p: int, N: int, guard: int, log: bool,
                 count: int, gen) -> ChunkResult:
    A = batch_E_mu(mu, count, rows, cols, p, N, gen, guard)
    res = batch_smith(A, p, N, guard)
    rank = len(mu.prefix) if mu.tail is NEG_INF else min(rows, cols)
    return _chunk(res, max(0, min(rows, cols) - rank), log)


# --- experiments ------------------------------------------------------------------


def _t(p: int) -> Fraction:
    return Fraction(1, p)


@lru_cache(maxsize=None)
def haar_snf_law(n: int, p: int, cap: int) -> Measure:
    """Exact singular-number law of an n x n Haar matrix, parts down to -cap."""
    t = _t(p)
    weights = {negate_reverse(lam): fw_prob(lam, n, t) for lam in signatures_in_box(n, 0, cap)}
    kept = sum(weights.values(), Fraction(0))
    return Measure(weights, complete=False, deficit=1 - kept)


def simulate_haar_snf(n: int, p: int, N: int, samples: int, seed: int, workers: int = 1,
                      guard: int = DEFAULT_GUARD, cap: int = 20, log: bool = False) -> MonteCarloResult:
    kernel = partial(_haar_kernel, n, p, N, guard, log)
    counts, g, d, o, entries = run_chunks(kernel, samples, seed, workers)
    exact = haar_snf_law(n, p, cap)
    return MonteCarloResult(counts, samples, g, d, o, seed, workers, DEFAULT_CHUNK, exact, entries)


@lru_cache(maxsize=None)
def product_chain_law(n: int, k: int, p: int, cap: int) -> Measure:
    """Exact chain law translated to singular numbers (negated, reversed cokernels)."""
    law = product_cokernel_law(n, k, _t(p), cap)
    weights = {tuple(negate_reverse(lam) for lam in chain): w for chain, w in law.items()}
    return Measure(weights, complete=False, deficit=law.deficit, deficit_bound=law.deficit_bound)


def simulate_product_chain(n: int, k: int, p: int, N: int, samples: int, seed: int, workers: int = 1,
                           guard: int = DEFAULT_GUARD, cap: int = 16, log: bool = False) -> MonteCarloResult:
    kernel = partial(_chain_kernel, n, k, p, N, guard, log)
    counts, g, d, o, entries = run_chunks(kernel, samples, seed, workers)
    exact = product_chain_law(n, k, p, cap)
    return MonteCarloResult(counts, samples, g, d, o, seed, workers, DEFAULT_CHUNK, exact, entries)


@lru_cache(maxsize=None)
def corner_law(lam: tuple, rows: int, cols: int, p: int, axis: str = "column", depth: int = 20) -> Measure:
    """Exact law of the singular numbers after removing the last column (or row)."""
    t = _t(p)
    if axis == "column":
        m, n = cols - 1, rows
    else:
        m, n = cols, rows - 1
    finite = [x for x in lam if x is not NEG_INF]
    floor = (min(finite) if finite else 0) - depth
    length = min(m, n)
    out = {}
    for size in range(0, len(finite) + 1):
        for target in signatures_in_box(size, floor, max(finite) if finite else 0):
            key = tuple(target) + (NEG_INF,) * (length - size)
            if len(key) != length:
                continue
            w = link2d(lam, key, m, n, t, axis=axis)
            if w:
                out[key] = w
    kept = sum(out.values(), Fraction(0))
    return Measure(out, complete=(kept == 1), deficit=1 - kept)


def simulate_corner(lam: tuple, rows: int, cols: int, p: int, N: int, samples: int, seed: int,
                    workers: int = 1, guard: int = DEFAULT_GUARD, axis: str = "column",
                    log: bool = False) -> MonteCarloResult:
    kernel = partial(_corner_kernel, tuple(lam), rows, cols, axis, p, N, guard, log)
    counts, g, d, o, entries = run_chunks(kernel, samples, seed, workers)
    exact = corner_law(tuple(lam), rows, cols, p, axis)
    return MonteCarloResult(counts, samples, g, d, o, seed, workers, DEFAULT_CHUNK, exact, entries)


@lru_cache(maxsize=None)
def e_mu_law(mu: InfSignature, rows: int, cols: int, p: int, depth: int = 16) -> Measure:
    """Exact singular-number law of the rows x cols corner of the E_mu ensemble."""
    return boundary_measure_2d(mu, cols, rows, _t(p), depth)


def simulate_e_mu(mu: InfSignature, rows: int, cols: int, p: int, N: int, samples: int, seed: int,
                  workers: int = 1, guard: int = DEFAULT_GUARD, depth: int = 16,
                  log: bool = False) -> MonteCarloResult:
    kernel = partial(_e_mu_kernel, mu, rows, cols, p, N, guard, log)
    counts, g, d, o, entries = run_chunks(kernel, samples, seed, workers)
    exact = e_mu_law(mu, rows, cols, p, depth)
    return MonteCarloResult(counts, samples, g, d, o, seed, workers, DEFAULT_CHUNK, exact, entries)
