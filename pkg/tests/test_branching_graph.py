from fractions import Fraction as F

import pytest
from hypothesis import given, settings, strategies as st

from hlpadic.branching_graph import (
    boundary_measure,
    boundary_measure_2d,
    boundary_weight,
    finite_k_boundary_measure,
    gamma_inf,
    gamma_kernel,
    gamma_tail_bound,
    gamma_targets,
    link,
    link2d,
    link_by_definition,
    link_support,
    link_targets,
    push_measure_2d,
    verify_coherency,
    verify_commutation,
)
from hlpadic.signatures import NEG_INF, InfSignature, conjugate_count, signatures_in_box, translate

T = F(1, 3)


def sig(n, lo=-2, hi=3):
    return st.lists(st.integers(lo, hi), min_size=n, max_size=n).map(lambda xs: tuple(sorted(xs, reverse=True)))


class TestLinks:
    def test_two_to_one_examples(self):
        t = F(1, 2)
        assert link((1, 0), (1,), t) == 1 / (1 + t)
        assert link((1, 0), (0,), t) == t / (1 + t)

    def test_formula_matches_definition(self):
        for m in range(2, 5):
            for mu in signatures_in_box(m, -1, 2):
                for n in range(1, m):
                    for lam in signatures_in_box(n, -1, 2):
                        assert link(mu, lam, T) == link_by_definition(mu, lam, T)

    def test_rows_are_stochastic(self):
        for m in range(2, 5):
            for mu in signatures_in_box(m, -2, 3):
                for n in range(1, m):
                    assert sum((link(mu, lam, T) for lam in link_targets(mu, n)), F(0)) == 1

    def test_vanishes_when_a_conjugate_count_exceeds(self):
        for mu in signatures_in_box(3, -1, 2):
            for lam in signatures_in_box(2, -1, 2):
                if any(conjugate_count(lam, x) > conjugate_count(mu, x) for x in range(-1, 3)):
                    assert link(mu, lam, T) == 0
                assert (link(mu, lam, T) != 0) == link_support(mu, lam)

    @given(sig(3), sig(2), st.integers(-4, 4))
    @settings(max_examples=60, deadline=None)
    def test_translation_invariance(self, mu, lam, shift):
        assert link(translate(mu, shift), translate(lam, shift), T) == link(mu, lam, T)

    def test_bad_lengths_rejected(self):
        with pytest.raises(ValueError):
            link((1,), (1,), T)


class TestBoundary:
    def test_zero_signature_gives_delta(self):
        mu = InfSignature((), 0)
        for n in range(1, 4):
            meas = boundary_measure(mu, n, T)
            assert dict(meas.items()) == {(0,) * n: 1}

    def test_single_box(self):
        meas = boundary_measure(InfSignature((1,), 0), 1, T)
        assert meas[(1,)] == 1 - T and meas[(0,)] == T

    def test_masses_sum_to_one(self):
        for D in (-2, -1, 0):
            for length in range(0, 4):
                for prefix in signatures_in_box(length, D, 3):
                    mu = InfSignature(prefix, D)
                    for n in range(1, 4):
                        assert boundary_measure(mu, n, T).total() == 1

    def test_weight_outside_support_vanishes(self):
        mu = InfSignature((2, 1), 0)
        assert boundary_weight(mu, (3,), T) == 0
        assert boundary_weight(mu, (-1,), T) == 0
        assert boundary_weight(mu, (1, 1, 1), T) == 0

    @pytest.mark.parametrize("mu", [InfSignature((), 0), InfSignature((2, 1), 0), InfSignature((1, 1, 0), -2),
                                    InfSignature((3,), -1)])
    def test_coherency(self, mu):
        for n in range(1, 4):
            rep = verify_coherency(mu, n, T)
            assert rep.ok and rep.checked > 0

    def test_constant_tail_required(self):
        with pytest.raises(ValueError):
            boundary_measure(InfSignature((0,), NEG_INF), 1, T)


class TestFiniteRank:
    def test_one_part_masses(self):
        for a in (-1, 0, 2):
            meas = finite_k_boundary_measure((a,), 2, T, depth=40)
            assert all(lam[0] <= a for lam in meas.weights)
            assert meas.deficit < F(1, 10**15)

    def test_atom_grows_with_level(self):
        mu = (1, 0)
        atoms = [finite_k_boundary_measure(mu, level, T)[mu] for level in (1, 5, 10)]
        assert atoms[0] < atoms[1] < atoms[2] < 1

    def test_level_nonpositive_rejected(self):
        with pytest.raises(ValueError):
            finite_k_boundary_measure((0,), 0, T)


class TestCorners:
    def test_rank_one_row_kernel(self):
        a = 2
        assert link2d((-a,), (-a,), 1, 1, T) == 1 / (1 + T)
        for j in range(1, 6):
            assert link2d((-a,), (-a - j,), 1, 1, T) == (1 - T) * T**j / (1 + T)

    def test_full_rank_case_is_the_link(self):
        mu, lam = (1, 0, -1), (0, -1)
        assert link2d(mu, lam, 2, 3, T) == link(mu, lam, T)

    def test_row_axis_swaps_dimensions(self):
        assert link2d((0,), (0,), 2, 1, T, axis="row") == link2d((0,), (0,), 1, 2, T)
        with pytest.raises(ValueError):
            link2d((0,), (0,), 1, 1, T, axis="diagonal")

    def test_too_many_finite_parts_rejected(self):
        with pytest.raises(ValueError):
            link2d((0, 0, 0), (0,), 1, 1, T)

    @pytest.mark.parametrize("mu", [InfSignature((), 0), InfSignature((0,), -1), InfSignature((0, -1), NEG_INF),
                                    InfSignature((-1,), NEG_INF)])
    def test_corner_measures_are_probabilities(self, mu):
        for m in range(1, 4):
            for n in range(1, 4):
                meas = boundary_measure_2d(mu, m, n, T, depth=10)
                assert 0 <= meas.deficit < F(1, 10**4)
                assert all(w > 0 for w in meas.weights.values())

    def test_zero_signature_is_the_haar_corner(self):
        # all-zero label means a Haar matrix; its corner is unimodular exactly
        # when it has full rank mod p, which for 2 x 3 happens with chance (1 - t^2)(1 - t^3)
        meas = boundary_measure_2d(InfSignature((), 0), 3, 2, T)
        assert meas[(0, 0)] == (1 - T**2) * (1 - T**3)
        assert all(key[0] <= 0 for key in meas.weights)

    @pytest.mark.parametrize("mu", [InfSignature((1, 0), -1), InfSignature((0, -2), NEG_INF)])
    def test_pushing_a_column_gives_the_smaller_corner(self, mu):
        big = boundary_measure_2d(mu, 3, 2, T, depth=14)
        floor = min(x for x in (mu.prefix + ((mu.tail,) if mu.tail is not NEG_INF else ()))) - 14
        pushed = push_measure_2d(big, 2, 2, T, "column", floor)
        small = boundary_measure_2d(mu, 2, 2, T, depth=14)
        for key in set(pushed.weights) | set(small.weights):
            assert abs(float(pushed[key] - small[key])) < 1e-5


class TestDynamics:
    def test_one_part_kernel(self):
        alpha = F(1, 4)
        assert gamma_kernel((0,), (0,), alpha, T) == (1 - alpha) / (1 - T * alpha)
        for j in range(1, 5):
            assert gamma_kernel((0,), (j,), alpha, T) == (1 - T) * alpha**j * (1 - alpha) / (1 - T * alpha)

    def test_lazy_mass_is_positive(self):
        for lam in signatures_in_box(2, -1, 2):
            assert gamma_kernel(lam, lam, F(1, 3), T) > 0

    @pytest.mark.parametrize("lam", [(0,), (2, 0), (1, 1, -1)])
    def test_rows_sum_to_one_up_to_the_tail(self, lam):
        alpha = F(1, 3)
        cap = lam[0] + 1
        while gamma_tail_bound(lam, alpha, T, cap) > F(1, 10**10):
            cap += 1
        row = sum((gamma_kernel(lam, nu, alpha, T) for nu in gamma_targets(lam, cap)), F(0))
        assert 0 <= 1 - row <= gamma_tail_bound(lam, alpha, T, cap)

    def test_infinite_kernel_mismatched_tails(self):
        assert gamma_inf(InfSignature((1,), 0), InfSignature((1,), -1), F(1, 3), T) == 0

    def test_infinite_kernel_lazy_term(self):
        mu = InfSignature((2, 1), 0)
        assert gamma_inf(mu, mu, F(1, 3), T) > 0

    def test_commutation_example(self):
        rep = verify_commutation((1, 0), (1,), F(1, 3), F(1, 2), cap=20)
        assert rep.ok and rep.tail_bound <= 1e-8

    def test_commutation_small_alpha(self):
        rep = verify_commutation((2, 0, 0), (1, 0), F(1, 1000), F(1, 2), cap=8)
        assert rep.ok

    def test_commutation_rhs_is_stochastic(self):
        mu, alpha, t = (1, 0), F(1, 3), F(1, 2)
        total = sum((verify_commutation(mu, nu, alpha, t, cap=20).rhs for nu in signatures_in_box(1, 0, 25)), F(0))
        assert abs(1 - float(total)) <= 1e-8
