from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.stats import chisquare

from hlpadic.padic import (
    PadicMatrix,
    RngStream,
    _mulmod,
    batch_E_mu,
    batch_gl,
    batch_haar,
    batch_matmul,
    batch_orbit,
    batch_smith,
    count_rows,
    drop_column,
    drop_row,
    empirical_measure,
    haar_gl_sample,
    haar_sample,
    parts_to_key,
    product_chain_sample,
    sample_E_mu,
    sample_orbit,
    smith_normal_form,
    tv_distance,
    valuation,
)
from hlpadic.signatures import NEG_INF, InfSignature, Measure, conjugate_count, signatures_in_box


def mat(p, N, rows):
    return PadicMatrix(p, N, tuple(map(tuple, rows)))


class TestSmithForm:
    def test_identity(self):
        assert smith_normal_form(mat(3, 6, np.eye(3, dtype=int))).signature == (0, 0, 0)

    def test_diagonal(self):
        assert smith_normal_form(mat(2, 8, [[2, 0], [0, 4]])).signature == (-1, -2)
        assert smith_normal_form(mat(2, 8, [[4, 0], [0, 2]])).signature == (-1, -2)

    def test_zero_matrix_is_flagged(self):
        form = smith_normal_form(mat(5, 4, [[0, 0], [0, 0]]))
        assert form.signature == (NEG_INF, NEG_INF)
        assert form.at_precision == 2

    def test_guard_band(self):
        form = smith_normal_form(mat(2, 10, [[2**9]]))
        assert form.signature == (-9,)
        assert form.guard_hit(guard=1) and not form.guard_hit(guard=0)

    def test_cokernel(self):
        assert smith_normal_form(mat(3, 8, [[9, 0], [0, 3]])).cokernel() == (2, 1)
        with pytest.raises(ValueError):
            smith_normal_form(mat(3, 4, [[0]])).cokernel()

    def test_valuation(self):
        assert valuation(0, 2, 7) == 7
        assert valuation(24, 2, 7) == 3

    @given(st.integers(0, 2**32), st.integers(1, 3), st.integers(1, 3), st.sampled_from([2, 3, 5]))
    @settings(max_examples=60, deadline=None)
    def test_invariant_under_invertible_factors(self, seed, n, m, p):
        gen = RngStream(seed).generator()
        N = 6
        A = haar_sample(n, m, p, N, gen)
        U = haar_gl_sample(n, p, N, gen)
        V = haar_gl_sample(m, p, N, gen)
        assert smith_normal_form(U @ A @ V).signature == smith_normal_form(A).signature

    @given(st.integers(0, 2**32), st.integers(1, 4), st.integers(1, 4))
    @settings(max_examples=60, deadline=None)
    def test_transpose(self, seed, n, m):
        A = haar_sample(n, m, 2, 5, RngStream(seed))
        assert smith_normal_form(A).signature == smith_normal_form(A.transpose()).signature

    @given(st.integers(0, 2**32), st.integers(1, 3))
    @settings(max_examples=40, deadline=None)
    def test_extra_precision_does_not_change_unflagged_results(self, seed, n):
        p, N, guard = 3, 12, 4
        big = haar_sample(n, n, p, N + 8, RngStream(seed))
        small = PadicMatrix(p, N, big.entries)
        coarse = smith_normal_form(small)
        if coarse.at_precision == 0 and not coarse.guard_hit(guard):
            assert smith_normal_form(big).signature == coarse.signature

    @given(st.integers(0, 2**32), st.integers(1, 3), st.integers(1, 3), st.sampled_from([2, 3]))
    @settings(max_examples=40, deadline=None)
    def test_batch_matches_scalar(self, seed, n, m, p):
        N = 8
        gen = RngStream(seed).generator()
        A = batch_haar(20, n, m, p, N, gen)
        # sprinkle in rank deficient samples
        A[::3, 0, :] = 0
        A[1::4] = (A[1::4] * p) % p**N
        res = batch_smith(A, p, N)
        for s in range(A.shape[0]):
            form = smith_normal_form(PadicMatrix.from_array(p, N, A[s]))
            assert parts_to_key(res.parts[s]) == form.signature
            assert bool(res.guard_hit[s]) == form.guard_hit()
            assert int(res.deep_count[s]) == form.at_precision


class TestSampling:
    def test_determinism(self):
        a = haar_sample(3, 2, 5, 4, RngStream(11, 3))
        b = haar_sample(3, 2, 5, 4, RngStream(11, 3))
        c = haar_sample(3, 2, 5, 4, RngStream(11, 4))
        assert a == b and a != c

    def test_entries_are_uniform_mod_p(self):
        p = 5
        digits = batch_haar(100_000, 1, 1, p, 1, RngStream(3).generator()).ravel()
        observed = np.bincount(digits, minlength=p)
        assert chisquare(observed).pvalue > 0.001

    def test_entry_valuation_law(self):
        p, N, S = 2, 10, 200_000
        vals = count_rows(batch_smith(batch_haar(S, 1, 1, p, N, RngStream(5).generator()), p, N, guard=0).parts)
        for j in range(5):
            expected = (1 - 1 / p) * p**-j
            assert abs(vals[(-j,)] / S - expected) < 5 * np.sqrt(expected / S)

    def test_gl_samples_are_invertible(self):
        U, draws = batch_gl(2000, 2, 2, 6, RngStream(1).generator())
        res = batch_smith(U, 2, 6)
        assert (res.parts == 0).all()
        assert draws >= 2000
        # acceptance rate (t;t)_2 = 3/8 at p = 2
        assert abs(2000 / draws - 3 / 8) < 0.05

    def test_orbit_recovers_its_label(self):
        p, N = 3, 12
        for n in (1, 2, 3):
            for m in (1, 2, 3):
                r = min(n, m)
                for lam in signatures_in_box(r, -4, 0):
                    A = batch_orbit(lam, 200, n, m, p, N, RngStream(7, n * 10 + m).generator())
                    res = batch_smith(A, p, N)
                    assert all(parts_to_key(row) == lam for row in res.parts)

    def test_scalar_orbit(self):
        A = sample_orbit((0, -2), 2, 3, 2, 12, RngStream(2))
        assert smith_normal_form(A).signature == (0, -2)
        with pytest.raises(ValueError):
            sample_orbit((1,), 1, 1, 2, 12, RngStream(2))
        with pytest.raises(ValueError):
            sample_orbit((-6,), 1, 1, 2, 12, RngStream(2))

    def test_drop_column_and_row(self):
        A = haar_sample(2, 3, 3, 5, RngStream(4))
        assert (drop_column(A).rows, drop_column(A).cols) == (2, 2)
        assert (drop_row(A).rows, drop_row(A).cols) == (1, 3)
        with pytest.raises(ValueError):
            drop_row(drop_row(A))

    @given(st.integers(0, 2**32))
    @settings(max_examples=30, deadline=None)
    def test_dropping_never_raises_rank(self, seed):
        A = sample_orbit((0, NEG_INF), 2, 3, 2, 10, RngStream(seed))
        finite = lambda M: sum(1 for x in smith_normal_form(M).signature if x is not NEG_INF)
        assert finite(drop_column(A)) <= finite(A)

    def test_product_chain_is_monotone(self):
        p, n = 2, 3
        for trial in range(200):
            chain = product_chain_sample(n, 3, p, 20, RngStream(9, trial))
            if chain.overflow:
                continue
            coks = [tuple(-x for x in reversed(sig)) for sig in chain.signatures]
            for before, after in zip(coks, coks[1:]):
                assert all(conjugate_count(after, x) >= conjugate_count(before, x) for x in range(1, 20))

    def test_one_by_one_chain_law(self):
        p, N, S = 3, 16, 50_000
        counts = {}
        for trial in range(S // 1000):
            A = batch_haar(1000, 1, 1, p, N, RngStream(13, trial).generator())
            for key, c in count_rows(batch_smith(A, p, N).parts).items():
                counts[key] = counts.get(key, 0) + c
        for j in range(4):
            expected = (1 - 1 / p) * p**-j
            assert abs(counts[(-j,)] / S - expected) < 5 * np.sqrt(expected / S)

    def test_rank_one_ensemble(self):
        mu = InfSignature((0,), NEG_INF)
        A = batch_E_mu(mu, 500, 3, 3, 3, 10, RngStream(2).generator())
        res = batch_smith(A, 3, 10)
        assert (res.deep_count >= 2).all()
        B = sample_E_mu(mu, 2, 3, 3, 10, RngStream(2))
        assert sum(1 for x in smith_normal_form(B).signature if x is not NEG_INF) <= 1

    def test_zero_tail_is_haar(self):
        mu = InfSignature((), 0)
        a = batch_E_mu(mu, 10, 2, 2, 3, 12, RngStream(8).generator())
        b = batch_haar(10, 2, 2, 3, 12, RngStream(8).generator())
        assert (a == b).all()

    def test_positive_parts_rejected(self):
        with pytest.raises(ValueError):
            sample_E_mu(InfSignature((1,), 0), 2, 2, 3, 10, RngStream(0))


class TestArithmetic:
    @given(st.integers(0, 3**24 - 1), st.integers(0, 3**24 - 1))
    @settings(max_examples=200)
    def test_mulmod_with_large_modulus(self, a, b):
        M = 3**24
        got = _mulmod(np.array([a], dtype=np.int64), np.array([b], dtype=np.int64), M)
        assert int(got[0]) == a * b % M

    def test_mulmod_at_the_width_limit(self):
        M = 2**60
        a = np.array([M - 1, 12345678901234567], dtype=np.int64)
        b = np.array([M - 3, M - 1], dtype=np.int64)
        assert [int(x) for x in _mulmod(a, b, M)] == [int(x) * int(y) % M for x, y in zip(a, b)]

    def test_batch_matmul_matches_scalar(self):
        gen = RngStream(6).generator()
        p, N = 3, 24
        A = batch_haar(5, 2, 3, p, N, gen)
        B = batch_haar(5, 3, 2, p, N, gen)
        C = batch_matmul(A, B, p**N)
        for s in range(5):
            ref = PadicMatrix.from_array(p, N, A[s]) @ PadicMatrix.from_array(p, N, B[s])
            assert PadicMatrix.from_array(p, N, C[s]) == ref

    def test_oversized_modulus_rejected(self):
        with pytest.raises(ValueError):
            haar_sample(1, 1, 2, 61, RngStream(0))


class TestEmpirical:
    def test_tv_of_a_measure_with_itself(self):
        m = Measure({(0,): F(1, 2), (1,): F(1, 2)})
        assert tv_distance(m, m) == 0

    def test_disjoint_supports(self):
        assert tv_distance({(0,): 1}, {(1,): 1}) == 1

    def test_fair_coin(self):
        flips = np.random.Generator(np.random.PCG64(0)).integers(0, 2, size=1_000_000)
        emp = empirical_measure(int(x) for x in flips)
        assert tv_distance(emp, {0: F(1, 2), 1: F(1, 2)}) <= 0.005

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            empirical_measure([])
