"""Reference densities on [-1, 1] used as ground truth for benchmarks."""

import math
from dataclasses import dataclass, field
from decimal import Decimal

import mpmath
import numpy as np
from scipy import special

from .chebyshev import MomentVector, moments_to_chebyshev
from .exceptions import DomainError, QuadratureError
from .jade import DensityEstimate, chebyshev_grid
from .sources import default_pdf_digits, estimate_spectral_bounds, moments_from_pdf, random_spectral_problem

__all__ = [
    "CORPUS_IDS",
    "CorpusDensity",
    "asym_uniform",
    "bimodal_poly",
    "exact_spectral_density",
    "gaussian_mixture",
    "get_corpus",
    "random_multimodal",
    "sigmoid_density",
    "spectral_exact",
]

CORPUS_IDS = ("bimodal-poly", "multimodal-gauss", "asym-uniform", "sigmoid", "spectral-exact")

ASYM_LOW, ASYM_HIGH = -0.6, 0.8
ASYM_HEIGHT = 1.0 / (ASYM_HIGH - ASYM_LOW)

# Multimodal generator configuration; nothing is published for it.
MULTIMODAL_SEED = 42
MULTIMODAL_SIGMA = 0.08
MULTIMODAL_MODES = (4, 8)
MULTIMODAL_SPAN = 0.85

SPECTRAL_SEED = 7
SPECTRAL_DIM = 64
SPECTRAL_SIGMA_FRACTION = 0.02


def _check_domain(x):
    x = np.asarray(x, dtype=float)
    if np.any(np.abs(x) > 1.0):
        raise DomainError("corpus densities are defined on [-1, 1]")
    return x


def _scalar_or_array(x, out):
    return float(out) if np.ndim(x) == 0 else out


def bimodal_poly(x):
    """``-21/8 (x - 1)(x + 1)(x^4 - x^3 + x^2)`` on [-1, 1]."""
    xa = _check_domain(x)
    out = -21.0 / 8.0 * (xa - 1.0) * (xa + 1.0) * (xa**4 - xa**3 + xa**2)
    return _scalar_or_array(x, out)


def sigmoid_density(x):
    """Logistic ``1 / (1 + exp(-5x))``; unit mass on [-1, 1] by symmetry."""
    xa = _check_domain(x)
    return _scalar_or_array(x, special.expit(5.0 * xa))


def asym_uniform(x):
    """Single plateau of height 1/1.4 on [-0.6, 0.8], zero elsewhere."""
    xa = _check_domain(x)
    out = np.where((xa >= ASYM_LOW) & (xa <= ASYM_HIGH), ASYM_HEIGHT, 0.0)
    return _scalar_or_array(x, out)


def _mp_bimodal(x):
    ctx = x.context
    return -ctx.mpf(21) / 8 * (x - 1) * (x + 1) * (x**4 - x**3 + x**2)


def _mp_sigmoid(x):
    ctx = x.context
    return 1 / (1 + ctx.exp(-5 * x))


def _mp_asym(x):
    ctx = x.context
    lo, hi = ctx.mpf(-3) / 5, ctx.mpf(4) / 5
    if lo <= x <= hi:
        return 1 / (hi - lo)
    return ctx.zero


@dataclass(eq=False)
class CorpusDensity:
    """A benchmark density on [-1, 1].

    Attributes
    ----------
    id : str
    evaluator : callable
        Vectorized float evaluation.
    mp_evaluator : callable
        Evaluation at mpmath numbers, used for high-precision moments.
    breakpoints : tuple of float
        Interior discontinuities.
    seed : int or None
    params : dict
        Generating parameters (JSON-serializable).
    """

    id: str
    evaluator: object
    mp_evaluator: object
    breakpoints: tuple = ()
    seed: int = None
    params: dict = field(default_factory=dict)
    upper_bound: float = None
    sampler: object = None
    moment_function: object = None

    def __call__(self, x):
        return self.evaluator(x)

    @property
    def smooth(self):
        return not self.breakpoints

    def moments(self, order, precision_digits=None, method="auto"):
        """Raw moments on [-1, 1].

        ``method="auto"`` uses a closed-form moment routine when the density
        has one and adaptive quadrature otherwise; ``"quadrature"`` forces
        the latter.
        """
        if method == "auto" and self.moment_function is not None:
            return self.moment_function(order, precision_digits)
        if method not in ("auto", "quadrature"):
            raise ValueError(f"unknown moment method {method!r}")
        return moments_from_pdf(self.mp_evaluator, (-1, 1), order, precision_digits, self.breakpoints)

    def expectations(self, order, precision_digits=None, transform_digits=None):
        return moments_to_chebyshev(self.moments(order, precision_digits), order, transform_digits)

    def sample(self, size, seed=0):
        """Draw ``size`` samples with a seeded generator."""
        rng = np.random.default_rng(seed)
        if self.sampler is not None:
            return self.sampler(rng, size)
        if self.upper_bound is None:
            raise ValueError(f"corpus density {self.id!r} has no sampler")
        out = np.empty(0)
        while out.size < size:
            batch = max(2 * (size - out.size), 1024)
            x = rng.uniform(-1.0, 1.0, batch)
            keep = rng.uniform(0.0, self.upper_bound, batch) < self.evaluator(x)
            out = np.concatenate([out, x[keep]])
        return out[:size]

    def to_dict(self):
        return {"id": self.id, "breakpoints": list(self.breakpoints), "seed": self.seed, "params": self.params}


class _GaussianMixture:
    """Gaussian mixture truncated to [-1, 1] and renormalized there."""

    def __init__(self, centers, weights, sigma):
        self.centers = np.asarray(centers, dtype=float)
        self.weights = np.asarray(weights, dtype=float)
        self.sigma = float(sigma)
        inside = special.ndtr((1.0 - self.centers) / sigma) - special.ndtr((-1.0 - self.centers) / sigma)
        self.mass_inside = float(np.sum(self.weights * inside))

    def __call__(self, x):
        xa = _check_domain(x)
        z = (np.atleast_1d(xa)[:, None] - self.centers[None, :]) / self.sigma
        out = np.exp(-0.5 * z**2) @ self.weights / (self.sigma * math.sqrt(2.0 * math.pi) * self.mass_inside)
        return float(out[0]) if np.ndim(x) == 0 else out.reshape(xa.shape)

    def mp(self, x):
        ctx = x.context
        sigma = ctx.mpf(self.sigma)
        # terms below 10^-(2 dps) sit under the quadrature's absolute floor
        cutoff = math.sqrt(2.0 * (2 * ctx.dps + 20) * math.log(10.0))
        total = ctx.zero
        for m, w in zip(self.centers, self.weights):
            z = (x - ctx.mpf(m)) / sigma
            if abs(z) < cutoff:
                total += ctx.mpf(w) * ctx.exp(-z * z / 2)
        return total / (sigma * ctx.sqrt(2 * ctx.pi) * self._mp_mass(ctx))

    def _mp_mass(self, ctx):
        key = ctx.prec
        cache = self.__dict__.setdefault("_mass_cache", {})
        if key not in cache:
            sigma = ctx.mpf(self.sigma)
            root2 = ctx.sqrt(2)
            total = ctx.zero
            for m, w in zip(self.centers, self.weights):
                m = ctx.mpf(m)
                hi = ctx.erf((1 - m) / (sigma * root2))
                lo = ctx.erf((-1 - m) / (sigma * root2))
                total += ctx.mpf(w) * (hi - lo) / 2
            cache[key] = total
        return cache[key]

    def moments(self, order, precision_digits=None):
        """Exact moments of the truncated mixture by the truncated-normal recurrence.

        ``M_n = m M_{n-1} + s^2 (n-1) M_{n-2} - s^2 [x^{n-1} phi_s(x - m)]_{-1}^{1}``
        for each component; stable because the homogeneous solutions shrink
        like ``s^n sqrt(n!)``.
        """
        digits = default_pdf_digits(order) if precision_digits is None else int(precision_digits)
        ctx = mpmath.MPContext()
        ctx.dps = digits + 20
        sigma = ctx.mpf(self.sigma)
        s2 = sigma * sigma
        root2 = ctx.sqrt(2)
        norm = 1 / (sigma * ctx.sqrt(2 * ctx.pi))
        totals = [ctx.zero] * (order + 1)
        for m, w in zip(self.centers, self.weights):
            m, w = ctx.mpf(m), ctx.mpf(w)
            phi_hi = norm * ctx.exp(-((1 - m) ** 2) / (2 * s2))
            phi_lo = norm * ctx.exp(-((-1 - m) ** 2) / (2 * s2))
            prev2 = ctx.zero
            prev = (ctx.erf((1 - m) / (sigma * root2)) - ctx.erf((-1 - m) / (sigma * root2))) / 2
            totals[0] += w * prev
            for n in range(1, order + 1):
                # boundary term [x^{n-1} phi]_{-1}^{1}
                boundary = phi_hi - (-1) ** (n - 1) * phi_lo
                cur = m * prev + s2 * (n - 1) * prev2 - s2 * boundary
                totals[n] += w * cur
                prev2, prev = prev, cur
        mass = totals[0]
        values = tuple(Decimal(ctx.nstr(v / mass, digits + 5, strip_zeros=False)) for v in totals)
        return MomentVector(values, (-1, 1), digits)

    def sample(self, rng, size):
        out = np.empty(0)
        while out.size < size:
            k = rng.choice(self.centers.size, size=2 * (size - out.size) + 16, p=self.weights / self.weights.sum())
            x = rng.normal(self.centers[k], self.sigma)
            out = np.concatenate([out, x[np.abs(x) <= 1.0]])
        return out[:size]

    def check_resolution(self, panels=200, nodes=8):
        """Fixed-rule quadrature of the mixture must reproduce its analytic mass."""
        x, w = np.polynomial.legendre.leggauss(nodes)
        edges = np.linspace(-1.0, 1.0, panels + 1)
        half = np.diff(edges) / 2.0
        mid = (edges[:-1] + edges[1:]) / 2.0
        pts = (mid[:, None] + half[:, None] * x).ravel()
        wts = (half[:, None] * w).ravel()
        mass = float(wts @ self(pts))
        if abs(mass - 1.0) > 1e-9:
            worst = int(np.argmin(np.abs(self.centers[:, None] - mid[None, :]).min(axis=0)))
            raise QuadratureError(
                f"sigma={self.sigma} is too narrow for the quadrature rule: mass {mass!r} instead of 1",
                (float(edges[worst]), float(edges[worst + 1])),
                abs(mass - 1.0),
            )


def gaussian_mixture(centers, weights, sigma, id="gaussian-mixture", seed=None, params=None):
    """Wrap a Gaussian mixture, truncated and renormalized on [-1, 1], as a corpus density."""
    mix = _GaussianMixture(centers, weights, sigma)
    mix.check_resolution()
    params = dict(params or {})
    params.update(centers=mix.centers.tolist(), weights=mix.weights.tolist(), sigma=mix.sigma)
    return CorpusDensity(id, mix, mix.mp, (), seed, params, sampler=mix.sample, moment_function=mix.moments)


def random_multimodal(seed=MULTIMODAL_SEED, modes=None, sigma=MULTIMODAL_SIGMA):
    """Seeded Gaussian-kernel mixture with modes in [-0.85, 0.85] and flat-Dirichlet weights.

    ``modes=None`` draws the number of modes uniformly from 4..8.
    """
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    rng = np.random.default_rng(seed)
    k = int(rng.integers(MULTIMODAL_MODES[0], MULTIMODAL_MODES[1] + 1)) if modes is None else int(modes)
    if k < 1:
        raise ValueError("need at least one mode")
    centers = rng.uniform(-MULTIMODAL_SPAN, MULTIMODAL_SPAN, k)
    weights = rng.dirichlet(np.ones(k))
    return gaussian_mixture(centers, weights, sigma, id="multimodal-gauss", seed=seed, params={"modes": k})


def exact_spectral_density(problem, domain_map, sigma, grid=None):
    """Gaussian-broadened energy distribution from full diagonalization.

    ``P(y) = sum_k |gamma_k|^2 K_sigma(y - forward(e_k))`` in mapped
    coordinates, so ``sigma`` is measured on [-1, 1].  The mass falling
    outside the mapped interval is reported in ``metadata["leakage"]``;
    the density is not renormalized.
    """
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    energies, weights = problem.eigendecomposition()
    centers = domain_map.forward(energies)
    grid = chebyshev_grid() if grid is None else np.asarray(grid, dtype=float)
    z = (grid[:, None] - centers[None, :]) / sigma
    values = np.exp(-0.5 * z**2) @ weights / (sigma * math.sqrt(2.0 * math.pi))
    inside = special.ndtr((1.0 - centers) / sigma) - special.ndtr((-1.0 - centers) / sigma)
    mass = float(weights @ inside)
    meta = {
        "sigma": float(sigma),
        "weight_sum": float(np.sum(weights)),
        "mass_inside": mass,
        "leakage": float(np.sum(weights)) - mass,
        "energies": energies.tolist(),
        "weights": weights.tolist(),
    }
    return DensityEstimate(grid, values, method="exact-oracle", domain_map=domain_map, metadata=meta)


def spectral_exact(seed=SPECTRAL_SEED, dim=SPECTRAL_DIM, sigma=None, margin=0.05):
    """Broadened energy distribution of a seeded random problem as a corpus density."""
    problem = random_spectral_problem(dim, seed)
    dmap = estimate_spectral_bounds(problem, margin)
    sigma = 2.0 * SPECTRAL_SIGMA_FRACTION if sigma is None else float(sigma)
    energies, weights = problem.eigendecomposition()
    density = gaussian_mixture(
        dmap.forward(energies),
        weights,
        sigma,
        id="spectral-exact",
        seed=seed,
        params={"dim": dim, "margin": margin, "map": dmap.to_dict()},
    )
    density.problem = problem
    density.domain_map = dmap
    return density


def _bimodal_corpus():
    return CorpusDensity("bimodal-poly", bimodal_poly, _mp_bimodal, upper_bound=1.0)


def _sigmoid_corpus():
    return CorpusDensity("sigmoid", sigmoid_density, _mp_sigmoid, upper_bound=1.0)


def _asym_corpus():
    return CorpusDensity(
        "asym-uniform",
        asym_uniform,
        _mp_asym,
        breakpoints=(ASYM_LOW, ASYM_HIGH),
        params={"plateaus": [[ASYM_LOW, ASYM_HIGH, ASYM_HEIGHT]]},
        upper_bound=ASYM_HEIGHT,
    )


def get_corpus(id, seed=None, **kwargs):
    """Look up a corpus density by id; ``seed`` applies to the random cases."""
    if id == "bimodal-poly":
        return _bimodal_corpus()
    if id == "sigmoid":
        return _sigmoid_corpus()
    if id == "asym-uniform":
        return _asym_corpus()
    if id == "multimodal-gauss":
        return random_multimodal(MULTIMODAL_SEED if seed is None else seed, **kwargs)
    if id == "spectral-exact":
        return spectral_exact(SPECTRAL_SEED if seed is None else seed, **kwargs)
    raise KeyError(f"unknown corpus density {id!r}; choose from {', '.join(CORPUS_IDS)}")
