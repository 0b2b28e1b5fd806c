from fractions import Fraction as F

import pytest
from hypothesis import given, settings, strategies as st

from hlpadic.qseries import (
    EvalResult,
    as_fraction,
    negative_binomial_tail,
    pochhammer,
    pochhammer_inf,
    qbinomial,
    qhyp_bar,
    qmultinomial,
    rational_param,
)

params = st.fractions(min_value=F(1, 50), max_value=F(49, 50), max_denominator=50)


def test_empty_pochhammer_is_one():
    assert pochhammer(F(2, 3), F(1, 2), 0) == 1


def test_pochhammer_small_values():
    assert pochhammer(F(1, 2), F(1, 2), 2) == F(3, 8)
    t = F(2, 7)
    assert pochhammer(t, t, 1) == 1 - t


@given(a=st.fractions(min_value=-2, max_value=2, max_denominator=9), t=params, n=st.integers(0, 8))
def test_pochhammer_recurrence(a, t, n):
    assert pochhammer(a, t, n + 1) == pochhammer(a, t, n) * (1 - a * t**n)


def test_pochhammer_rejects_negative_length():
    with pytest.raises(ValueError):
        pochhammer(F(1, 2), F(1, 2), -1)


def test_floats_are_refused():
    with pytest.raises(TypeError):
        as_fraction(0.5)
    assert as_fraction("3/7") == F(3, 7)


def test_parameters_must_lie_in_unit_interval():
    for bad in (0, 1, F(3, 2), F(-1, 2)):
        with pytest.raises(ValueError):
            rational_param(bad)


class TestInfiniteProduct:
    def test_zero_argument_is_exactly_one(self):
        r = pochhammer_inf(0, F(1, 2))
        assert r.is_exact and r.value == 1

    def test_half_half(self):
        r = pochhammer_inf(F(1, 2), F(1, 2), 1e-12)
        assert not r.is_exact
        assert r.error_bound <= 1e-12
        assert abs(r.value - 0.2887880951) < 1e-10

    def test_against_deep_truncation(self):
        third = F(1, 3)
        r = pochhammer_inf(third, third, 1e-12)
        oracle = float(pochhammer(third, third, 60))
        assert abs(r.value - oracle) <= 1e-12

    @given(a=st.fractions(min_value=0, max_value=F(9, 10), max_denominator=20), t=params)
    @settings(max_examples=40)
    def test_tolerances_nest(self, a, t):
        tau = 1e-6
        coarse = pochhammer_inf(a, t, tau)
        fine = pochhammer_inf(a, t, tau / 10)
        assert abs(float(coarse) - float(fine)) <= tau

    @given(a=st.fractions(min_value=F(-9, 10), max_value=0, max_denominator=20),
           t=st.fractions(min_value=F(1, 20), max_value=F(1, 2), max_denominator=20))
    @settings(max_examples=40)
    def test_tolerances_nest_negative_argument(self, a, t):
        tau = 1e-6
        coarse = pochhammer_inf(a, t, tau)
        fine = pochhammer_inf(a, t, tau / 10)
        assert abs(float(coarse) - float(fine)) <= tau

    def test_unresolvable_tolerance_is_an_error(self):
        # the product is about e^45 here, far beyond what a double resolves to 1e-6
        with pytest.raises(ValueError):
            pochhammer_inf(F(-9, 10), F(49, 50), 1e-6)

    def test_rejects_divergent_argument(self):
        with pytest.raises(ValueError):
            pochhammer_inf(1, F(1, 2))

    def test_negative_error_bound_refused(self):
        with pytest.raises(ValueError):
            EvalResult.approx(1.0, -1e-3)


class TestGaussianBinomials:
    def test_edges(self):
        t = F(1, 3)
        assert qbinomial(5, 0, t) == 1
        assert qbinomial(2, 1, t) == 1 + t
        assert qbinomial(1, 2, t) == 0
        assert qbinomial(3, -1, t) == 0

    @given(a=st.integers(0, 9), b=st.integers(0, 9), t=params)
    def test_symmetry(self, a, b, t):
        assert qbinomial(a, b, t) == qbinomial(a, a - b, t)

    @given(a=st.integers(2, 9), data=st.data(), t=params)
    def test_pascal_rule(self, a, data, t):
        b = data.draw(st.integers(1, a - 1))
        assert qbinomial(a, b, t) == qbinomial(a - 1, b, t) + t ** (a - b) * qbinomial(a - 1, b - 1, t)

    def test_multinomials(self):
        t = F(2, 5)
        assert qmultinomial(3, (4, 4, 4), t) == 1
        assert qmultinomial(2, (1, 0), t) == 1 + t
        assert qmultinomial(3, (2, 1, 0), t) == (1 + t) * (1 + t + t * t)

    def test_multinomial_accepts_negative_parts(self):
        t = F(1, 2)
        assert qmultinomial(3, (1, -1, -1), t) == qmultinomial(3, (2, 0, 0), t)


class TestTerminatingHypergeometric:
    def test_zero_length_is_one(self):
        assert qhyp_bar(0, [F(1, 5)], [F(2, 7)], F(1, 2), F(3, 4)) == 1

    def test_single_term_q_gauss(self):
        t, b, c = F(1, 3), F(2, 5), F(1, 7)
        value = qhyp_bar(1, [b], [c], t, t) / pochhammer(c, t, 1)
        assert value == (b - c) / (1 - c)

    @pytest.mark.parametrize("t", [F(1, 2), F(1, 3)])
    def test_q_gauss_on_powers_of_t(self, t):
        for n in range(0, 6):
            for i in range(-4, 5):
                for j in range(-4, 5):
                    b, c = t**i, t**j
                    assert qhyp_bar(n, [b], [c], t, t) == pochhammer(c / b, t, n) * b**n

    def test_multiplicity_form(self):
        t = F(1, 3)
        for m_lam in range(5):
            for m_mu in range(5):
                for d in range(-3, 4):
                    lhs = qhyp_bar(m_lam, [t**-m_mu], [t ** (1 + d)], t, t)
                    rhs = pochhammer(t ** (1 + d + m_mu), t, m_lam) * t ** (-m_lam * m_mu)
                    assert lhs == rhs

    def test_zero_upper_parameters_allowed(self):
        t = F(1, 2)
        assert qhyp_bar(2, [0], [t], t, t) == sum(
            t**k * pochhammer(t**-2, t, k) / pochhammer(t, t, k) * pochhammer(t * t**k, t, 2 - k)
            for k in range(3)
        )


class TestNegativeBinomialTail:
    @given(z=st.fractions(min_value=F(1, 20), max_value=F(19, 20), max_denominator=20), start=st.integers(0, 30))
    @settings(max_examples=30)
    def test_geometric_case_is_exact(self, z, start):
        assert negative_binomial_tail(1, z, start) == z**start / (1 - z)

    @pytest.mark.parametrize("dim", [2, 3, 5])
    @pytest.mark.parametrize("z", [F(1, 2), F(1, 3), F(4, 5)])
    def test_bounds_the_exact_tail(self, dim, z):
        from math import comb

        # the full series sums to (1 - z)^(-dim)
        start = 7
        head = sum(comb(s + dim - 1, dim - 1) * z**s for s in range(start))
        exact = (1 - z) ** -dim - head
        bound = negative_binomial_tail(dim, z, start)
        assert exact <= bound <= 2 * exact
