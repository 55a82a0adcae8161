import math
from decimal import Decimal
from fractions import Fraction

import mpmath
import numpy as np
import pytest
import sympy
from scipy import integrate

from jade_density.chebyshev import AffineDomainMap, moments_to_chebyshev, rescale_moments
from jade_density.exceptions import DomainError, QuadratureError, SpectrumEscapeError
from jade_density.reference import ASYM_HIGH, ASYM_LOW, get_corpus
from jade_density.sources import (
    SpectralProblem,
    broadened_chebyshev_expectations,
    estimate_spectral_bounds,
    gaussian_broadening_matrix,
    hamiltonian_chebyshev_expectations,
    hamiltonian_moments,
    moments_from_pdf,
    moments_from_samples,
    random_spectral_problem,
)


def pauli_z():
    return SpectralProblem(np.diag([1.0, -1.0]), np.array([1.0, 1.0]) / math.sqrt(2))


def exact_bimodal_moments(order):
    x = sympy.symbols("x")
    f = -sympy.Rational(21, 8) * (x - 1) * (x + 1) * (x**4 - x**3 + x**2)
    return [Fraction(str(sympy.integrate(x**n * f, (x, -1, 1)))) for n in range(order + 1)]


def close(decimal_value, fraction_value, digits):
    return abs(Fraction(decimal_value) - fraction_value) <= Fraction(1, 10**digits)


# --- moments from analytic densities ----------------------------------------------


def test_bimodal_moments_match_symbolic_integration():
    m = get_corpus("bimodal-poly").moments(30)
    exact = exact_bimodal_moments(30)
    assert exact[0] == 1
    assert all(close(v, e, m.precision_digits) for v, e in zip(m.values, exact))


def test_asym_uniform_moments_match_closed_form():
    m = get_corpus("asym-uniform").moments(40)
    lo, hi = Fraction(ASYM_LOW).limit_denominator(10), Fraction(ASYM_HIGH).limit_denominator(10)
    exact = [(hi ** (n + 1) - lo ** (n + 1)) / ((hi - lo) * (n + 1)) for n in range(41)]
    assert all(close(v, e, m.precision_digits) for v, e in zip(m.values, exact))


def test_sigmoid_moments_match_independent_quadrature():
    m = get_corpus("sigmoid").moments(12, precision_digits=40)
    mp = mpmath.mp.clone()
    mp.dps = 50
    for n in (0, 1, 5, 12):
        ref = mp.quad(lambda x: x**n / (1 + mp.exp(-5 * x)), [-1, 0, 1])
        assert abs(mp.mpf(str(m.values[n])) - ref) < mp.mpf(10) ** -38


def test_physical_domain_moments():
    # uniform on [2, 5]: mean 3.5
    m = moments_from_pdf(lambda x: x.context.mpf(1) / 3, (2, 5), 2, precision_digits=25)
    assert m.domain == (2, 5)
    assert close(m.values[1], Fraction(7, 2), 24)
    assert close(m.values[2], Fraction(13), 24)


def test_nonconvergent_quadrature_reports_the_panel():
    with pytest.raises(QuadratureError) as info:
        moments_from_pdf(lambda x: 1 / (4 * x.context.sqrt(abs(x))), order=2, precision_digits=30)
    lo, hi = info.value.interval
    assert lo <= 0 <= hi
    assert info.value.residual > 0


def test_dual_oracle_chebyshev_expectations():
    for cid in ("bimodal-poly", "sigmoid", "multimodal-gauss"):
        density = get_corpus(cid)
        c = density.expectations(30)
        for n in (0, 1, 7, 18, 30):
            direct, _ = integrate.quad(
                lambda th: density(math.cos(th)) * math.cos(n * th) * math.sin(th), 0, math.pi, limit=400,
                epsabs=1e-13,
            )
            assert c.values[n] == pytest.approx(direct, abs=1e-8)


def test_high_precision_expectations_are_bounded():
    for cid in ("bimodal-poly", "sigmoid", "asym-uniform"):
        c = get_corpus(cid).expectations(80)
        assert np.max(np.abs(c.values)) <= 1 + 1e-9


# --- sample moments ---------------------------------------------------------------


def test_sample_moments_and_standard_errors():
    rng = np.random.default_rng(1)
    x = rng.uniform(-1, 1, 4000)
    m = moments_from_samples(x, 4)
    assert m.values[0] == 1.0
    assert m.values[2] == pytest.approx(1 / 3, abs=4 * m.standard_errors[2])
    assert m.standard_errors[2] == pytest.approx(math.sqrt((1 / 5 - 1 / 9) / 4000), rel=0.1)


def test_sample_moments_list_offending_samples():
    with pytest.raises(DomainError, match="#1=1.5"):
        moments_from_samples([0.0, 1.5, -0.2], 3)


def test_sample_moments_use_exact_summation():
    x = np.array([1.0] + [1e-16] * 10)
    m = moments_from_samples(x, 1)
    assert m.values[1] == math.fsum(x) / x.size


def test_sample_second_moment_error_shrinks_with_sample_size():
    errors = {size: [] for size in (250, 500, 1000, 2000)}
    for seed in range(50):
        rng = np.random.default_rng(seed)
        for size in errors:
            m = moments_from_samples(rng.uniform(-1, 1, size), 2)
            errors[size].append(abs(m.values[2] - 1 / 3))
    medians = [np.median(errors[s]) for s in sorted(errors)]
    assert all(b <= a for a, b in zip(medians, medians[1:]))


# --- operators ------------------------------------------------------------------


def test_problem_validation():
    with pytest.raises(ValueError, match="Hermitian"):
        SpectralProblem(np.array([[0, 1], [0, 0]]), np.array([1.0, 0.0]))
    with pytest.raises(ValueError, match="normalized"):
        SpectralProblem(np.eye(2), np.array([1.0, 1.0]))
    with pytest.raises(ValueError, match="cap"):
        SpectralProblem(np.eye(3), np.array([1.0, 0, 0]), dimension_cap=2)


def test_pauli_z_moments_alternate():
    m = hamiltonian_moments(pauli_z(), 9, (-1, 1))
    assert np.allclose(m.values, [(1 + (-1) ** n) / 2 for n in range(10)], atol=1e-15, rtol=0)


def test_identity_moments_are_one():
    rng = np.random.default_rng(0)
    psi = rng.normal(size=5) + 1j * rng.normal(size=5)
    m = hamiltonian_moments(SpectralProblem(np.eye(5), psi / np.linalg.norm(psi)), 8, (-2, 2))
    assert np.allclose(m.values, 1.0, atol=1e-14)


def test_hamiltonian_moments_match_diagonalization():
    p = random_spectral_problem(8, seed=3)
    e, w = p.eigendecomposition()
    m = hamiltonian_moments(p, 20, (-5, 5))
    for n in range(21):
        assert m.values[n] == pytest.approx(float(np.sum(w * e**n)), abs=1e-9)


def test_recurrence_expectations_pauli_z_identity_map():
    c = hamiltonian_chebyshev_expectations(pauli_z(), AffineDomainMap(-1, 1), 10)
    assert np.allclose(c.values, [(1 + (-1) ** n) / 2 for n in range(11)], atol=1e-15)


def test_recurrence_expectations_zero_operator():
    p = SpectralProblem(np.zeros((3, 3)), np.array([1.0, 0, 0]))
    c = hamiltonian_chebyshev_expectations(p, AffineDomainMap(-1, 1), 6)
    assert np.allclose(c.values, [1, 0, -1, 0, 1, 0, -1], atol=1e-15)


def test_recurrence_and_monomial_paths_agree():
    p = random_spectral_problem(8, seed=5)
    dmap = estimate_spectral_bounds(p)
    c_rec = hamiltonian_chebyshev_expectations(p, dmap, 20)
    raw = hamiltonian_moments(p, 20, (dmap.a, dmap.b))
    c_mono = moments_to_chebyshev(rescale_moments(raw, dmap), 20)
    assert np.max(np.abs(c_rec.values - c_mono.values)) < 1e-6
    assert np.max(np.abs(c_rec.values)) <= 1 + 1e-9


def test_escape_is_detected():
    p = SpectralProblem(np.diag([2.0, -1.0]), np.array([1.0, 0.0]))
    with pytest.raises(SpectrumEscapeError, match="margin"):
        hamiltonian_chebyshev_expectations(p, AffineDomainMap(-1, 1), 10)


def test_gershgorin_bounds_for_diagonal_operators():
    dmap = estimate_spectral_bounds(pauli_z(), margin=0)
    assert dmap.a <= -1 and dmap.b >= 1
    d = SpectralProblem(np.diag([0.3, -2.0, 4.5]), np.array([1.0, 0, 0]))
    dmap = estimate_spectral_bounds(d, margin=0)
    assert (dmap.a, dmap.b) == (-2.0, 4.5)


def test_bounds_enclose_random_spectrum():
    p = random_spectral_problem(64, seed=7)
    e, _ = p.eigendecomposition()
    dmap = estimate_spectral_bounds(p)
    assert dmap.a < e.min() and e.max() < dmap.b


# --- broadening in Chebyshev space ------------------------------------------------


def test_broadened_expectations_match_quadrature_of_broadened_distribution():
    p = random_spectral_problem(16, seed=2)
    dmap = estimate_spectral_bounds(p)
    sigma = 0.05
    c = broadened_chebyshev_expectations(p, dmap, 60, sigma)
    e, w = p.eigendecomposition()
    centers = dmap.forward(e)

    def density(y):
        return float(np.sum(w * np.exp(-0.5 * ((y - centers) / sigma) ** 2))) / (sigma * math.sqrt(2 * math.pi))

    for n in (0, 1, 9, 33, 60):
        ref, _ = integrate.quad(
            lambda th: math.cos(n * th) * density(math.cos(th)) * math.sin(th), 0, math.pi, limit=500, epsabs=1e-14
        )
        assert c.values[n] == pytest.approx(ref, abs=1e-12)


def test_broadening_drops_leaked_mass():
    p = SpectralProblem(np.diag([1.0, -1.0]), np.array([1.0, 0.0]))
    c = broadened_chebyshev_expectations(p, AffineDomainMap(-1, 1), 10, 0.05)
    # half of the kernel centred at +1 lies outside the interval
    assert c.values[0] == pytest.approx(0.5, abs=1e-12)


def test_broadening_matrix_tail_check():
    with pytest.raises(ValueError, match="not converged"):
        gaussian_broadening_matrix(40, 0.02, extra=10)
