import math

import numpy as np
import pytest
import sympy
from scipy import integrate

from jade_density.chebyshev import AffineDomainMap
from jade_density.exceptions import DomainError, QuadratureError
from jade_density.jade import chebyshev_grid, jade_density_grid, weighted_l2_error
from jade_density.reference import (
    CORPUS_IDS,
    asym_uniform,
    bimodal_poly,
    exact_spectral_density,
    get_corpus,
    random_multimodal,
    sigmoid_density,
)
from jade_density.sources import SpectralProblem


def quad_mass(density):
    edges = [-1.0, *density.breakpoints, 1.0]
    return sum(
        integrate.quad(density, lo, hi, limit=400, epsabs=1e-13, epsrel=1e-13)[0] for lo, hi in zip(edges, edges[1:])
    )


def test_bimodal_vanishes_at_endpoints_and_integrates_to_one():
    assert bimodal_poly(1.0) == 0.0
    assert bimodal_poly(-1.0) == 0.0
    x = sympy.symbols("x")
    f = -sympy.Rational(21, 8) * (x - 1) * (x + 1) * (x**4 - x**3 + x**2)
    assert sympy.integrate(f, (x, -1, 1)) == 1


def test_sigmoid_values_and_symmetry():
    assert sigmoid_density(0.0) == 0.5
    x = np.linspace(-1, 1, 101)
    assert np.allclose(sigmoid_density(x) + sigmoid_density(-x), 1.0, atol=1e-15)


def test_asym_uniform_values():
    assert asym_uniform(0.0) == pytest.approx(1 / 1.4, rel=1e-15)
    assert asym_uniform(-0.9) == 0.0
    assert get_corpus("asym-uniform").breakpoints == (-0.6, 0.8)


def test_densities_reject_points_outside_interval():
    with pytest.raises(DomainError):
        bimodal_poly(1.5)


@pytest.mark.parametrize("cid", CORPUS_IDS)
def test_corpus_density_is_normalized_and_nonnegative(cid):
    density = get_corpus(cid)
    assert quad_mass(density) == pytest.approx(1.0, abs=1e-9)
    assert np.all(density(chebyshev_grid(2001)) >= 0)


@pytest.mark.parametrize("cid", CORPUS_IDS)
def test_float_and_mp_evaluators_agree(cid):
    import mpmath

    density = get_corpus(cid)
    ctx = mpmath.MPContext()
    ctx.dps = 30
    for x in (-0.95, -0.3, 0.1, 0.77):
        assert float(density.mp_evaluator(ctx.mpf(x))) == pytest.approx(float(density(x)), rel=1e-13, abs=1e-13)


def test_single_mode_mixture_is_normalized():
    density = random_multimodal(seed=3, modes=1, sigma=0.1)
    assert quad_mass(density) == pytest.approx(1.0, abs=1e-9)


def test_multimodal_is_deterministic():
    g = chebyshev_grid(2001)
    a = random_multimodal(seed=42, modes=6)(g)
    b = random_multimodal(seed=42, modes=6)(g)
    assert a.tobytes() == b.tobytes()


def test_well_separated_modes_are_local_maxima():
    sigma = 0.05
    found = 0
    g = np.linspace(-0.999, 0.999, 20001)
    for seed in range(20):
        density = random_multimodal(seed=seed, sigma=sigma)
        centers = np.array(density.params["centers"])
        values = density(g)
        peaks = g[1:-1][(values[1:-1] > values[:-2]) & (values[1:-1] > values[2:])]
        for c in centers:
            others = np.delete(centers, np.flatnonzero(centers == c)[0])
            if others.size and np.min(np.abs(others - c)) <= 4 * sigma:
                continue
            assert np.min(np.abs(peaks - c)) <= sigma / 2
            found += 1
    assert found > 10


def test_too_narrow_mixture_is_rejected():
    with pytest.raises(QuadratureError):
        random_multimodal(seed=1, sigma=1e-4)


def test_exact_spectral_density_two_level():
    p = SpectralProblem(np.diag([1.0, -1.0]), np.array([1.0, 1.0]) / math.sqrt(2))
    sigma = 0.05
    est = exact_spectral_density(p, AffineDomainMap(-1, 1), sigma, chebyshev_grid(2001))
    peak = 0.5 / (sigma * math.sqrt(2 * math.pi))
    assert est.values[-1] == pytest.approx(peak, rel=1e-3)
    assert est.values[0] == pytest.approx(peak, rel=1e-3)
    assert est.metadata["weight_sum"] == pytest.approx(1.0, abs=1e-12)
    assert est.metadata["mass_inside"] == pytest.approx(0.5, abs=1e-12)


def test_leakage_bound_with_five_sigma_margin():
    p = SpectralProblem(np.diag([1.0, -1.0]), np.array([1.0, 1.0]) / math.sqrt(2))
    sigma = 0.04
    # eigenvalues land at +-0.8, i.e. 5 sigma from the endpoints
    est = exact_spectral_density(p, AffineDomainMap(-1.25, 1.25), sigma)
    assert est.metadata["leakage"] < 1e-6
    assert est.integrate() == pytest.approx(1.0 - est.metadata["leakage"], abs=1e-9)


def test_wider_kernel_lowers_the_peak():
    from jade_density.sources import random_spectral_problem

    p = random_spectral_problem(16, seed=1)
    dmap = AffineDomainMap(-3, 3)
    peaks = [exact_spectral_density(p, dmap, s).values.max() for s in (0.02, 0.04, 0.08)]
    assert peaks[0] > peaks[1] > peaks[2]


@pytest.mark.parametrize("cid, order", [("bimodal-poly", 20), ("multimodal-gauss", 50), ("sigmoid", 50)])
def test_weighted_error_drops_when_order_doubles(cid, order):
    density = get_corpus(cid)
    c = density.expectations(2 * order)
    assert weighted_l2_error(density, c.truncate(2 * order)) < weighted_l2_error(density, c.truncate(order))


def test_discontinuous_case_converges_pointwise_but_keeps_overshoot():
    density = get_corpus("asym-uniform")
    c = density.expectations(200)
    x = np.array([-0.9, -0.2, 0.3, 0.95])
    errors = [np.abs(jade_density_grid(c.truncate(n), x).values - density(x)).max() for n in (50, 100, 200)]
    assert errors[0] > errors[1] > errors[2]
    g = chebyshev_grid(4001)
    overshoot = [jade_density_grid(c.truncate(n), g).values.max() / (1 / 1.4) for n in (50, 100, 200)]
    assert min(overshoot) > 1.05
