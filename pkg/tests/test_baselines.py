import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate, stats

from jade_density.baselines import (
    CumulantVector,
    cumulants_to_moments,
    gram_charlier,
    kde_gaussian,
    moments_to_cumulants,
    silverman_bandwidth,
)
from jade_density.reference import get_corpus
from jade_density.sources import random_spectral_problem
from jade_density.workflows import spectral_convergence


def normal_moments(mu, s, order):
    return [float(stats.norm(mu, s).moment(n)) if n else 1.0 for n in range(order + 1)]


def test_point_mass_cumulants():
    c = 0.3
    k = moments_to_cumulants([Fraction(3, 10) ** n for n in range(7)])
    assert k.values == pytest.approx((c, 0, 0, 0, 0, 0), abs=1e-15)


def test_standard_normal_cumulants():
    mu = [1, 0, 1, 0, 3, 0, 15]
    assert moments_to_cumulants(mu).values == (0.0, 1.0, 0.0, 0.0, 0.0, 0.0)


def test_shift_changes_only_the_mean():
    base = moments_to_cumulants(normal_moments(0.0, 0.7, 8)).values
    shifted = moments_to_cumulants(normal_moments(0.4, 0.7, 8)).values
    assert shifted[0] == pytest.approx(base[0] + 0.4, abs=1e-14)
    assert np.allclose(shifted[1:], base[1:], atol=1e-12)


@given(
    st.lists(st.floats(-1, 1, allow_nan=False), min_size=2, max_size=6),
    st.integers(1, 12),
)
@settings(max_examples=60, deadline=None)
def test_cumulant_round_trip(atoms, order):
    # moments of a discrete uniform distribution on the atoms
    atoms = [Fraction(a) for a in atoms]
    mu = [sum(a**n for a in atoms) / len(atoms) for n in range(order + 1)]
    back = cumulants_to_moments(moments_to_cumulants(mu))
    assert np.allclose(back, [float(m) for m in mu], rtol=1e-10, atol=1e-10)


def test_insufficient_moments_error():
    with pytest.raises(ValueError, match="insufficient moments"):
        moments_to_cumulants([1, 0, 1], 4)
    with pytest.raises(ValueError, match="normalized"):
        moments_to_cumulants([2, 0, 1])


def test_gaussian_is_a_fixed_point():
    x = np.linspace(-4, 4, 41)
    assert gram_charlier(CumulantVector((0.0, 1.0), 2), 0.0) == pytest.approx(1 / math.sqrt(2 * math.pi), abs=1e-14)
    assert np.allclose(gram_charlier((0.5, 0.25, 0.0, 0.0), x), stats.norm(0.5, 0.5).pdf(x), rtol=0, atol=1e-14)


def test_series_matches_explicit_hermite_form():
    k = (0.1, 0.5, 0.05, -0.02, 0.01, 0.004)
    sd = math.sqrt(k[1])
    z = np.linspace(-3, 3, 31)
    g3, g4, g5, g6 = (k[r - 1] / sd**r for r in (3, 4, 5, 6))
    he = np.polynomial.hermite_e.hermeval
    poly = 1 + g3 / 6 * he(z, [0, 0, 0, 1]) + g4 / 24 * he(z, [0] * 4 + [1])
    poly += g5 / 120 * he(z, [0] * 5 + [1]) + (g6 + 10 * g3**2) / 720 * he(z, [0] * 6 + [1])
    expected = stats.norm.pdf(z) / sd * poly
    assert np.allclose(gram_charlier(k, k[0] + sd * z), expected, atol=1e-14)


def test_nonpositive_variance_error():
    with pytest.raises(ValueError, match="kappa_2"):
        gram_charlier((0.0, -1.0), 0.0)


def test_bimodal_series_goes_negative():
    # with five cumulants the series is positive on [-1, 1] itself; the
    # negative lobe sits just outside, on the real-line support of the series
    cumulants = moments_to_cumulants(get_corpus("bimodal-poly").moments(5))
    x = np.linspace(-3, 3, 6001)
    assert np.min(gram_charlier(cumulants, x)) < 0


def test_more_cumulants_oscillate_more_on_energy_distribution():
    report = spectral_convergence(random_spectral_problem(64, 7), orders=(20,))
    gc = report.gram_charlier
    assert gc[12]["max_oscillation"] > gc[6]["max_oscillation"]


def test_kde_single_sample():
    h = 0.2
    assert kde_gaussian([0.1], 0.3, bandwidth=h) == pytest.approx(stats.norm(0.1, h).pdf(0.3), rel=1e-15)


def test_kde_mass_and_sign():
    rng = np.random.default_rng(5)
    samples = rng.normal(size=200)
    value, _ = integrate.quad(lambda t: kde_gaussian(samples, t), -np.inf, np.inf, limit=200)
    assert value == pytest.approx(1.0, abs=1e-8)
    assert np.all(kde_gaussian(samples, np.linspace(-10, 10, 101)) >= 0)


def test_silverman_bandwidth_formula():
    rng = np.random.default_rng(0)
    x = rng.normal(size=1000)
    q75, q25 = np.percentile(x, [75, 25])
    expected = 0.9 * min(x.std(ddof=1), (q75 - q25) / 1.34) * 1000 ** -0.2
    assert silverman_bandwidth(x) == pytest.approx(expected, rel=1e-15)
    with pytest.raises(ValueError, match="zero spread"):
        silverman_bandwidth([1.0, 1.0, 1.0])


def test_kde_boundary_bias_on_uniform():
    samples = np.random.default_rng(11).uniform(-1, 1, 10_000)
    plateau = kde_gaussian(samples, 0.0)
    assert kde_gaussian(samples, 0.999) < 0.7 * plateau
