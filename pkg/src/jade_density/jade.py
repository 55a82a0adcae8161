"""Closed-form Jacobi-Anger density estimation and its characteristic function.

Given Chebyshev expectations <T_n(X)> of a variable supported in [-1, 1],
the truncated Jacobi-Anger series

    phi_N(t) = <T_0> J_0(t) + 2 sum_{n=1}^{N} i^n J_n(t) <T_n>

approximates the characteristic function, and its inverse Fourier
transform has the closed form

    f_N(x) = [<T_0> + 2 sum_{n=1}^{N} <T_n> T_n(x)] / (pi sqrt(1 - x^2)).

``f_N`` is the orthogonal projection of the true density onto
span{T_n / sqrt(1 - x^2)} in L2 with weight sqrt(1 - x^2).
"""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate

from .chebyshev import AffineDomainMap, ChebyshevExpectations, chebyshev_series, eval_chebyshev
from .exceptions import DomainError, QuadratureError

__all__ = [
    "DEFAULT_GRID_POINTS",
    "DensityEstimate",
    "bessel_j",
    "bessel_j_sequence",
    "characteristic_function",
    "chebyshev_grid",
    "gauss_chebyshev_integral",
    "inverse_ft_consistency",
    "inverse_ft_density",
    "jade_coefficients",
    "jade_density",
    "jade_density_grid",
    "projection_coefficients",
    "weighted_l2_error",
]

DEFAULT_GRID_POINTS = 2001

_SERIES_CUTOFF = 1.0
_RESCALE = 1e200


# --------------------------------------------------------------------------
# Bessel functions of the first kind
# --------------------------------------------------------------------------


def _bessel_series(n, t):
    """Ascending power series; used for |t| <= 1 where every term shrinks fast."""
    if t == 0.0:
        return 1.0 if n == 0 else 0.0
    half = t / 2.0
    term = math.exp(n * math.log(abs(half)) - math.lgamma(n + 1))
    if half < 0 and n % 2:
        term = -term
    total = term
    q = half * half
    m = 0
    while abs(term) > 1e-18 * abs(total) + 1e-300:
        m += 1
        term *= -q / (m * (m + n))
        total += term
    return total


def _miller_start(nmax, tmax):
    top = max(nmax, int(math.ceil(tmax)))
    start = top + 20 + int(math.sqrt(40.0 * top))
    return start + (start % 2)


def _bessel_miller(nmax, t):
    """J_0..J_nmax for positive t (1-d array) by normalized backward recurrence."""
    start = _miller_start(nmax, float(np.max(t)))
    out = np.zeros((t.size, nmax + 1))
    j_next = np.zeros_like(t)
    j_cur = np.full_like(t, 1e-30)
    norm = np.zeros_like(t)
    two_over_t = 2.0 / t
    for k in range(start, 0, -1):
        if k <= nmax:
            out[:, k] = j_cur
        if k % 2 == 0:
            norm += 2.0 * j_cur
        j_prev = k * two_over_t * j_cur - j_next
        j_next, j_cur = j_cur, j_prev
        big = np.abs(j_cur) > _RESCALE
        if np.any(big):
            j_cur[big] /= _RESCALE
            j_next[big] /= _RESCALE
            norm[big] /= _RESCALE
            out[big] /= _RESCALE
    out[:, 0] = j_cur
    norm += j_cur
    return out / norm[:, None]


def bessel_j_sequence(nmax, t):
    """Return ``J_0(t)..J_nmax(t)``.

    Parameters
    ----------
    nmax : int
        Highest order, ``>= 0``.
    t : float or array_like
        Real arguments.

    Returns
    -------
    ndarray
        Shape ``(nmax + 1,)`` for scalar t, otherwise ``t.shape + (nmax + 1,)``.
    """
    nmax = int(nmax)
    if nmax < 0:
        raise ValueError(f"order must be non-negative, got {nmax}")
    scalar = np.ndim(t) == 0
    t = np.asarray(t, dtype=float)
    flat = np.abs(t.ravel())
    out = np.empty((flat.size, nmax + 1))
    small = flat <= _SERIES_CUTOFF
    for i in np.flatnonzero(small):
        out[i] = [_bessel_series(n, flat[i]) for n in range(nmax + 1)]
    if np.any(~small):
        out[~small] = _bessel_miller(nmax, flat[~small])
    # J_n(-t) = (-1)^n J_n(t)
    negative = t.ravel() < 0
    if np.any(negative):
        out[negative, 1::2] *= -1.0
    out = out.reshape(t.shape + (nmax + 1,))
    return out.reshape(nmax + 1) if scalar else out


def bessel_j(n, t):
    """Bessel function of the first kind J_n(t) for integer ``n >= 0``."""
    n = int(n)
    if n < 0:
        raise ValueError(f"order must be non-negative, got {n}")
    values = bessel_j_sequence(n, t)
    return float(values[n]) if np.ndim(t) == 0 else values[..., n]


# --------------------------------------------------------------------------
# Characteristic function
# --------------------------------------------------------------------------


def _expectations_array(c):
    if isinstance(c, ChebyshevExpectations):
        return c.values
    return np.asarray(c, dtype=float)


def characteristic_function(c, t):
    """Truncated Jacobi-Anger characteristic function.

    ``<T_0> J_0(t) + 2 sum_{n>=1} i^n J_n(t) <T_n>``; equals the usual
    truncated series when ``<T_0> = 1``.
    """
    e = _expectations_array(c)
    order = e.size - 1
    weights = 2.0 * (1j ** np.arange(order + 1)) * e
    weights[0] = e[0]
    return bessel_j_sequence(order, t) @ weights


# --------------------------------------------------------------------------
# Closed-form density
# --------------------------------------------------------------------------


def chebyshev_grid(n_points=DEFAULT_GRID_POINTS):
    """Chebyshev-Gauss nodes ``cos(pi (j + 1/2) / M)`` in increasing order."""
    j = np.arange(n_points)
    return np.cos(np.pi * (j + 0.5) / n_points)[::-1].copy()


def _is_chebyshev_grid(grid):
    return grid.size > 0 and np.allclose(grid, chebyshev_grid(grid.size), rtol=0, atol=1e-14)


def gauss_chebyshev_integral(values, grid):
    """Integrate samples taken on :func:`chebyshev_grid` over (-1, 1).

    Uses ``int g dx = int g sqrt(1 - x^2) / sqrt(1 - x^2) dx``, exact when
    ``g sqrt(1 - x^2)`` is a polynomial of degree below ``2 M``.
    """
    grid = np.asarray(grid, dtype=float)
    return float(np.pi / grid.size * np.sum(np.asarray(values) * np.sqrt(1.0 - grid**2)))


def jade_coefficients(c):
    """Series coefficients ``a_n`` with ``f_N(x) = sum a_n T_n(x) / sqrt(1 - x^2)``."""
    e = _expectations_array(c)
    coeffs = 2.0 * e / np.pi
    coeffs[0] = e[0] / np.pi
    return coeffs


def jade_density(c, x):
    """Evaluate the closed-form estimate at a single interior point ``|x| < 1``."""
    x = float(x)
    if not abs(x) < 1.0:
        raise DomainError(f"the estimate is singular at the endpoints; need |x| < 1, got {x}")
    e = _expectations_array(c)
    total = e[0]
    for n in range(1, e.size):
        total += 2.0 * e[n] * eval_chebyshev(n, x)
    return total / (np.pi * math.sqrt(1.0 - x * x))


@dataclass(eq=False)
class DensityEstimate:
    """Density samples on a grid in (-1, 1), with the map back to physical units."""

    grid: np.ndarray
    values: np.ndarray
    method: str = "jade"
    expectations: ChebyshevExpectations = None
    domain_map: AffineDomainMap = field(default_factory=lambda: AffineDomainMap(-1, 1))
    warnings: tuple = ()
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        self.grid = np.asarray(self.grid, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if self.grid.shape != self.values.shape or self.grid.ndim != 1:
            raise ValueError("grid and values must be 1-d arrays of equal length")
        _check_grid(self.grid)

    @property
    def order(self):
        return None if self.expectations is None else self.expectations.order

    def integrate(self):
        """Mass over (-1, 1): Gauss-Chebyshev on a Chebyshev grid, trapezoid otherwise."""
        if _is_chebyshev_grid(self.grid):
            return gauss_chebyshev_integral(self.values, self.grid)
        return float(integrate.trapezoid(self.values, self.grid))

    def physical(self):
        """Return ``(y, density)`` in the physical units of ``domain_map``."""
        return self.domain_map.inverse(self.grid), self.values * self.domain_map.jacobian

    def clipped(self):
        """Negative values set to zero, then rescaled to unit mass."""
        values = np.clip(self.values, 0.0, None)
        clipped = DensityEstimate(
            self.grid, values, self.method, self.expectations, self.domain_map, self.warnings, dict(self.metadata)
        )
        mass = clipped.integrate()
        if mass <= 0:
            raise ValueError("clipped estimate has no positive mass to renormalize")
        clipped.values = values / mass
        return clipped


def _check_grid(grid):
    if grid.size and (np.any(np.abs(grid) >= 1.0)):
        raise DomainError("grid points must lie strictly inside (-1, 1)")
    if np.any(np.diff(grid) <= 0):
        raise ValueError("grid must be strictly increasing")


def jade_density_grid(c, grid=None, domain_map=None, method="clenshaw", clip=False):
    """Evaluate the closed-form estimate on a grid.

    Parameters
    ----------
    c : ChebyshevExpectations or array_like
    grid : array_like, optional
        Strictly increasing points in (-1, 1); defaults to the 2001-point
        Chebyshev grid.
    domain_map : AffineDomainMap, optional
        Carried along for reporting in physical units.
    method : {"clenshaw", "naive"}
        Chebyshev summation path.
    clip : bool
        Clip negative values to zero and renormalize.  Off by default: raw
        truncated series keep their Gibbs oscillations.
    """
    if not isinstance(c, ChebyshevExpectations):
        c = ChebyshevExpectations(c)
    grid = chebyshev_grid() if grid is None else np.asarray(grid, dtype=float)
    _check_grid(grid)
    series = chebyshev_series(np.pi * jade_coefficients(c), grid, method=method)
    values = series / (np.pi * np.sqrt(1.0 - grid**2))
    estimate = DensityEstimate(
        grid,
        values,
        method="jade",
        expectations=c,
        domain_map=domain_map or AffineDomainMap(-1, 1),
        warnings=c.warnings,
    )
    return estimate.clipped() if clip else estimate


# --------------------------------------------------------------------------
# Validation paths: numerical inverse Fourier transform and projection oracle
# --------------------------------------------------------------------------


def _legendre_panels(t_max, panel_width=1.0, nodes=16):
    n_panels = max(1, int(math.ceil(t_max / panel_width)))
    edges = np.linspace(0.0, t_max, n_panels + 1)
    x, w = np.polynomial.legendre.leggauss(nodes)
    half = np.diff(edges) / 2.0
    mid = (edges[:-1] + edges[1:]) / 2.0
    t = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    return t, weights


def inverse_ft_density(c, t_max, grid):
    """``(1 / 2 pi) int_{-t_max}^{t_max} exp(-i t x) phi_N(t) dt`` by quadrature.

    Conjugate symmetry folds the integral onto [0, t_max].
    """
    grid = np.asarray(grid, dtype=float)
    t, w = _legendre_panels(float(t_max))
    phi = characteristic_function(c, t)
    tx = np.outer(grid, t)
    integral = np.cos(tx) @ (w * phi.real) + np.sin(tx) @ (w * phi.imag)
    return integral / np.pi


def inverse_ft_consistency(c, t_max, grid):
    """Max-abs deviation between the numerical inverse transform and the closed form."""
    if t_max <= 0:
        raise ValueError("t_max must be positive")
    grid = np.asarray(grid, dtype=float)
    _check_grid(grid)
    closed = jade_density_grid(c, grid).values
    return float(np.max(np.abs(inverse_ft_density(c, t_max, grid) - closed)))


def projection_coefficients(f, order, breakpoints=(), tol=1e-11):
    """Optimal weighted-L2 coefficients ``t*_k = <f, B_k>_w / <B_k, B_k>_w``.

    ``B_k = T_k / sqrt(1 - x^2)`` and the weight is ``sqrt(1 - x^2)``, so the
    numerator reduces to ``int f T_k dx`` (adaptive quadrature, split at
    ``breakpoints``) and the denominator is computed by Gauss-Chebyshev
    quadrature.  This is an oracle independent of the moment pipeline.

    Raises
    ------
    QuadratureError
        When the error estimate of any numerator exceeds ``tol``.
    """
    edges = [-1.0] + sorted(float(b) for b in breakpoints if -1.0 < b < 1.0) + [1.0]
    nodes = chebyshev_grid(order + 2)
    out = np.empty(order + 1)
    for k in range(order + 1):
        num = 0.0
        for lo, hi in zip(edges[:-1], edges[1:]):
            value, err = integrate.quad(
                lambda x: f(x) * math.cos(k * math.acos(x)), lo, hi, limit=400, epsabs=tol / 10, epsrel=0.0
            )
            if err > tol:
                raise QuadratureError(f"projection quadrature for k={k} did not converge", (lo, hi), err)
            num += value
        norm = np.pi / nodes.size * np.sum(eval_chebyshev(k, nodes) ** 2)
        out[k] = num / norm
    return out


def weighted_l2_error(f, c, n_nodes=4001):
    """``||f - f_N||`` in L2 with weight sqrt(1 - x^2).

    With ``h = (f sqrt(1 - x^2) - sum a_n T_n)^2`` the squared error is
    ``int h / sqrt(1 - x^2) dx``, evaluated by Gauss-Chebyshev quadrature;
    this is spectrally accurate when ``f`` is smooth.
    """
    x = chebyshev_grid(n_nodes)
    target = np.asarray(f(x), dtype=float) * np.sqrt(1.0 - x**2)
    approx = chebyshev_series(jade_coefficients(c), x)
    return float(math.sqrt(np.pi / n_nodes * np.sum((target - approx) ** 2)))
