"""scikit-learn style wrappers around the functional core.

The estimators follow the ``KernelDensity`` convention: ``fit`` on samples,
``score_samples`` returns log-densities, ``score`` their sum.  ``pdf`` gives
densities directly, and ``fit_moments`` skips the sample stage for callers
that already hold moments.
"""

import math

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_array, check_is_fitted

from .baselines import gram_charlier, kde_gaussian, moments_to_cumulants, silverman_bandwidth
from .chebyshev import AffineDomainMap, MomentVector, chebyshev_series, moments_to_chebyshev, rescale_moments
from .jade import (
    DensityEstimate,
    chebyshev_grid,
    gauss_chebyshev_integral,
    jade_coefficients,
    jade_density_grid,
)
from .sources import moments_from_samples

__all__ = ["GaussianKDE", "GramCharlierDensity", "JADEDensity"]


def _as_samples(X):
    """Accept a 1-d array or a single-column 2-d array."""
    arr = check_array(X, ensure_2d=False, dtype=np.float64)
    if arr.ndim == 2:
        if arr.shape[1] != 1:
            raise ValueError(f"expected univariate data, got {arr.shape[1]} features")
        arr = arr[:, 0]
    return arr


def _as_points(x):
    arr = np.asarray(x, dtype=float)
    if arr.ndim == 2 and arr.shape[1] == 1:
        arr = arr[:, 0]
    return arr


def _log(values):
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(values > 0, np.log(np.where(values > 0, values, 1.0)), -np.inf)


class _DensityMixin:
    def score_samples(self, X):
        """Log-density at each point; ``-inf`` where the estimate is not positive."""
        return _log(self.pdf(X))

    def score(self, X, y=None):
        return float(np.sum(self.score_samples(X)))


class JADEDensity(_DensityMixin, BaseEstimator):
    """Closed-form Jacobi-Anger density estimate from the first ``n_moments`` moments.

    Parameters
    ----------
    n_moments : int
        Truncation order N.
    domain : tuple of float, optional
        Support [a, b].  Fitted from the sample range widened by ``margin``
        when omitted.
    precision_digits : int, optional
        Transform digits for decimal moments.
    margin : float
        Relative widening of the sample range when ``domain`` is not given.
    clip : bool
        Clip negative values and renormalize.

    Attributes
    ----------
    expectations_ : ChebyshevExpectations
    domain_map_ : AffineDomainMap
    moments_ : MomentVector
        Moments on the original domain.
    """

    def __init__(self, n_moments=20, domain=None, precision_digits=None, margin=0.05, clip=False):
        self.n_moments = n_moments
        self.domain = domain
        self.precision_digits = precision_digits
        self.margin = margin
        self.clip = clip

    def _domain_from(self, x):
        if self.domain is not None:
            return tuple(self.domain)
        lo, hi = float(np.min(x)), float(np.max(x))
        half = max(hi - lo, 1e-12) / 2.0 * (1.0 + self.margin)
        mid = (lo + hi) / 2.0
        return mid - half, mid + half

    def fit(self, X, y=None):
        x = _as_samples(X)
        moments = moments_from_samples(x, int(self.n_moments), self._domain_from(x))
        return self.fit_moments(moments)

    def fit_moments(self, moments):
        """Fit from a :class:`MomentVector` on any interval."""
        if not isinstance(moments, MomentVector):
            moments = MomentVector(tuple(moments), tuple(self.domain) if self.domain is not None else (-1, 1))
        dmap = AffineDomainMap(*moments.domain)
        mapped = moments if dmap.is_identity() else rescale_moments(moments, dmap)
        self.moments_ = moments
        self.domain_map_ = dmap
        self.expectations_ = moments_to_chebyshev(mapped, int(self.n_moments), self.precision_digits)
        self.n_features_in_ = 1
        return self

    def density_estimate(self, grid=None):
        """:class:`DensityEstimate` on a grid in mapped coordinates."""
        check_is_fitted(self, "expectations_")
        return jade_density_grid(self.expectations_, grid, self.domain_map_, clip=self.clip)

    def pdf(self, x):
        """Density in the units of the fitted domain; zero outside it."""
        check_is_fitted(self, "expectations_")
        pts = _as_points(x)
        y = self.domain_map_.forward(pts)
        inside = np.abs(y) < 1.0
        out = np.zeros(pts.shape)
        yi = y[inside]
        values = chebyshev_series(np.pi * jade_coefficients(self.expectations_), yi) / (np.pi * np.sqrt(1.0 - yi**2))
        if self.clip:
            grid = chebyshev_grid()
            raw = jade_density_grid(self.expectations_, grid).values
            values = np.clip(values, 0.0, None) / gauss_chebyshev_integral(np.clip(raw, 0.0, None), grid)
        out[inside] = values * self.domain_map_.jacobian
        return out


class GramCharlierDensity(_DensityMixin, BaseEstimator):
    """Gram-Charlier A series from the first ``n_cumulants`` cumulants."""

    def __init__(self, n_cumulants=10):
        self.n_cumulants = n_cumulants

    def fit(self, X, y=None):
        x = _as_samples(X)
        radius = float(np.max(np.abs(x))) or 1.0
        moments = moments_from_samples(x, int(self.n_cumulants), (-radius, radius))
        return self.fit_moments(moments)

    def fit_moments(self, moments):
        self.cumulants_ = moments_to_cumulants(moments, int(self.n_cumulants))
        self.n_features_in_ = 1
        return self

    def pdf(self, x):
        check_is_fitted(self, "cumulants_")
        return gram_charlier(self.cumulants_, _as_points(x))

    def density_estimate(self, grid=None):
        grid = chebyshev_grid() if grid is None else np.asarray(grid, dtype=float)
        return DensityEstimate(grid, self.pdf(grid), method="gram-charlier")


class GaussianKDE(_DensityMixin, BaseEstimator):
    """Gaussian kernel density estimate, Silverman bandwidth by default."""

    def __init__(self, bandwidth="silverman"):
        self.bandwidth = bandwidth

    def fit(self, X, y=None):
        x = _as_samples(X)
        self.bandwidth_ = silverman_bandwidth(x) if self.bandwidth == "silverman" else float(self.bandwidth)
        if not (self.bandwidth_ > 0 and math.isfinite(self.bandwidth_)):
            raise ValueError(f"bandwidth must be positive, got {self.bandwidth_}")
        self.samples_ = x
        self.n_features_in_ = 1
        return self

    def pdf(self, x):
        check_is_fitted(self, "samples_")
        return kde_gaussian(self.samples_, _as_points(x), self.bandwidth_)

    def sample(self, n_samples=1, random_state=None):
        check_is_fitted(self, "samples_")
        rng = np.random.default_rng(random_state)
        picks = rng.choice(self.samples_, size=n_samples)
        return picks + rng.normal(0.0, self.bandwidth_, n_samples)

    def density_estimate(self, grid=None):
        grid = chebyshev_grid() if grid is None else np.asarray(grid, dtype=float)
        return DensityEstimate(grid, self.pdf(grid), method="kde")
