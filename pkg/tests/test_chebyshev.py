import math
from decimal import Decimal
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from jade_density.chebyshev import (
    AffineDomainMap,
    ChebyshevExpectations,
    MomentVector,
    chebyshev_coefficient_matrix,
    chebyshev_series,
    chebyshev_trig,
    conditioning_digits,
    eval_chebyshev,
    moments_to_chebyshev,
    rescale_moments,
)
from jade_density.exceptions import (
    DomainError,
    MomentValidityWarning,
    NormalizationWarning,
    PrecisionWarning,
)


def uniform_moments(order):
    """Exact moments of the uniform law on [-1, 1]: 1/(n+1) for even n."""
    return MomentVector(tuple(Fraction(1, n + 1) if n % 2 == 0 else Fraction(0) for n in range(order + 1)))


# --- evaluation -------------------------------------------------------------


@pytest.mark.parametrize(
    "n, x, expected",
    [(0, 0.7, 1.0), (2, 0.5, -0.5), (5, math.cos(math.pi / 5), -1.0)],
)
def test_eval_chebyshev_examples(n, x, expected):
    assert eval_chebyshev(n, x) == pytest.approx(expected, abs=1e-15)


def test_eval_chebyshev_rejects_points_outside_interval():
    with pytest.raises(DomainError):
        eval_chebyshev(3, 1.0000001)
    with pytest.raises(DomainError):
        eval_chebyshev(3, np.array([0.0, -2.0]))


@settings(max_examples=200, deadline=None)
@given(n=st.integers(0, 200), x=st.floats(-1, 1))
def test_recurrence_matches_trig_form_and_stays_bounded(n, x):
    value = eval_chebyshev(n, x)
    assert abs(value) <= 1.0 + 1e-12
    assert value == pytest.approx(chebyshev_trig(n, x), abs=1e-11)


def test_clenshaw_and_naive_summation_agree():
    rng = np.random.default_rng(3)
    coeffs = rng.normal(size=101)
    x = np.linspace(-0.999, 0.999, 1000)
    diff = chebyshev_series(coeffs, x, "clenshaw") - chebyshev_series(coeffs, x, "naive")
    assert np.max(np.abs(diff)) < 1e-11


# --- coefficient matrix -------------------------------------------------------


def test_coefficient_matrix_rows_from_hand_recurrence():
    assert chebyshev_coefficient_matrix(0).row(0) == (1,)
    assert chebyshev_coefficient_matrix(2).row(2) == (-1, 0, 2)
    # T_4 = 2x T_3 - T_2 = 2x(4x^3 - 3x) - (2x^2 - 1)
    assert chebyshev_coefficient_matrix(4).row(4) == (1, 0, -8, 0, 8)


def test_coefficient_matrix_structure():
    m = chebyshev_coefficient_matrix(80)
    for n, row in enumerate(m.rows):
        assert len(row) == n + 1
        assert row[-1] == (1 if n == 0 else 2 ** (n - 1))
        assert all(c == 0 for k, c in enumerate(row) if (n - k) % 2)
        if n >= 2:
            shifted = [0] + [2 * c for c in m.rows[n - 1]]
            padded = list(m.rows[n - 2]) + [0, 0]
            assert list(row) == [s - p for s, p in zip(shifted, padded)]
    # beyond the range of fixed-width integers and still exact
    assert m.row(80)[-1] == 2**79


def test_coefficient_rows_evaluate_to_cos_n_theta():
    rng = np.random.default_rng(0)
    m = chebyshev_coefficient_matrix(64)
    for _ in range(1000):
        n = int(rng.integers(0, 65))
        theta = rng.uniform(0, math.pi)
        got = float(sum(Fraction(c) * Fraction(math.cos(theta)) ** k for k, c in enumerate(m.row(n))))
        want = math.cos(n * theta)
        assert abs(got - want) <= 1e-12 * max(1.0, abs(want))


def test_amplification_grows_like_one_plus_root_two():
    digits = conditioning_digits(100)
    assert digits == pytest.approx(100 * math.log10(1 + math.sqrt(2)), abs=1.0)
    assert 37 < digits < 39


# --- moments to Chebyshev expectations ---------------------------------------


def test_point_mass_at_zero():
    c = moments_to_chebyshev(MomentVector((1, 0, 0, 0, 0)))
    assert list(c.exact) == [1, 0, -1, 0, 1]


def test_point_mass_at_one():
    c = moments_to_chebyshev(MomentVector((1,) * 12))
    assert all(v == 1 for v in c.exact)


def test_uniform_second_expectation_against_quadrature():
    c = moments_to_chebyshev(uniform_moments(2))
    oracle, _ = integrate.quad(lambda x: (2 * x * x - 1) / 2, -1, 1)
    assert c.exact[2] == Fraction(-1, 3)
    assert float(c.exact[2]) == pytest.approx(oracle, abs=1e-14)


def test_rational_input_gives_exact_output():
    c = moments_to_chebyshev(uniform_moments(30))
    assert c.precision_used is None
    assert all(isinstance(v, Fraction) for v in c.exact)
    # <T_n> of the uniform law is -1/(n^2 - 1) for even n, 0 for odd n
    for n, v in enumerate(c.exact):
        assert v == (Fraction(-1, n * n - 1) if n % 2 == 0 else 0)


def test_float_and_exact_paths_agree_at_low_order():
    exact = moments_to_chebyshev(uniform_moments(15))
    low = moments_to_chebyshev(uniform_moments(15).to_float())
    assert np.max(np.abs(exact.values - low.values)) < 1e-8


def test_float_path_degrades_at_high_order(quiet):
    low = moments_to_chebyshev(uniform_moments(60).to_float())
    assert np.max(np.abs(low.values)) > 10


def test_decimal_path_uses_four_n_digits_by_default():
    m = MomentVector(tuple(Decimal(1) / Decimal(n + 1) if n % 2 == 0 else Decimal(0) for n in range(51)))
    c = moments_to_chebyshev(m, 50)
    assert c.precision_used == 200
    assert c.max_violation() <= 1e-9


def test_precision_shortfall_is_warned_and_attached():
    m = MomentVector(tuple(Decimal(1) / Decimal(n + 1) if n % 2 == 0 else Decimal(0) for n in range(41)),
                     precision_digits=10)
    with pytest.warns(PrecisionWarning):
        c = moments_to_chebyshev(m, 40)
    assert any("amplifies" in note for note in c.warnings)


def test_transform_requires_enough_moments_and_unit_domain():
    with pytest.raises(ValueError, match="insufficient"):
        moments_to_chebyshev(uniform_moments(3), 5)
    with pytest.raises(DomainError):
        moments_to_chebyshev(MomentVector((1, 1, 1), domain=(0, 2)))


def test_invalid_moments_are_warned_not_rejected():
    with pytest.warns(MomentValidityWarning):
        m = MomentVector((1.0, 0.0, 1.5))
    with pytest.warns(MomentValidityWarning):
        c = moments_to_chebyshev(m)
    assert c.values[2] == pytest.approx(2.0)


def test_unnormalized_moments_warn():
    with pytest.warns(NormalizationWarning):
        MomentVector((2, 0, 1))


def test_expectations_are_immutable():
    c = ChebyshevExpectations([1.0, 0.5])
    with pytest.raises(ValueError):
        c.values[0] = 2.0


# --- affine maps ------------------------------------------------------------


def test_affine_map_endpoints_and_round_trip():
    m = AffineDomainMap(-3, 5)
    assert m.forward(-3) == -1 and m.forward(5) == 1
    y = np.linspace(-1, 1, 11)
    assert np.allclose(m.forward(m.inverse(y)), y, atol=1e-15)
    assert m.jacobian == pytest.approx(0.25)
    with pytest.raises(DomainError):
        AffineDomainMap(1, 1)


def test_rescale_identity_map_leaves_moments_unchanged():
    m = uniform_moments(6)
    assert rescale_moments(m, AffineDomainMap(-1, 1)).values == m.values


def test_rescale_pure_scale():
    mu = MomentVector((1, Fraction(3, 2), Fraction(9, 4)), domain=(-3, 3))
    out = rescale_moments(mu, AffineDomainMap(-3, 3))
    assert out.values[1] == Fraction(1, 2)
    assert out.values[2] == Fraction(1, 4)


def test_rescale_pure_shift():
    # [c-1, c+1] -> [-1, 1] is the shift x -> x - c
    c = Fraction(5, 2)
    mu = MomentVector((1, Fraction(13, 5), Fraction(7)), domain=(c - 1, c + 1))
    out = rescale_moments(mu, AffineDomainMap(c - 1, c + 1))
    assert out.values[1] == Fraction(13, 5) - c


@settings(max_examples=50, deadline=None)
@given(
    a=st.fractions(min_value=-10, max_value=10, max_denominator=50),
    width=st.fractions(min_value=Fraction(1, 10), max_value=20, max_denominator=50),
    seed=st.integers(0, 10_000),
)
def test_rescale_round_trip_is_exact(a, width, seed):
    rng = np.random.default_rng(seed)
    pts = [Fraction(int(k), 97) for k in rng.integers(-97, 98, size=4)]
    mu = MomentVector(tuple(sum(p**n for p in pts) / 4 for n in range(9)))
    dmap = AffineDomainMap(a, a + width)
    there = rescale_moments(mu, dmap, inverse=True)
    back = rescale_moments(there, dmap)
    assert back.values == mu.values


def test_rescale_rejects_mismatched_domain():
    with pytest.raises(DomainError):
        rescale_moments(uniform_moments(3), AffineDomainMap(0, 2))
