"""Moment sources: analytic densities, samples and Hermitian operator/state pairs."""

import math
import threading
from dataclasses import dataclass
from decimal import Decimal
from fractions import Fraction

import mpmath
import numpy as np
from mpmath.calculus.quadrature import GaussLegendre

from .chebyshev import AffineDomainMap, ChebyshevExpectations, MomentVector, conditioning_digits
from .exceptions import DomainError, QuadratureError, SpectrumEscapeError

__all__ = [
    "DIMENSION_CAP",
    "SpectralProblem",
    "broaden_expectations",
    "broadened_chebyshev_expectations",
    "estimate_spectral_bounds",
    "gaussian_broadening_matrix",
    "hamiltonian_chebyshev_expectations",
    "hamiltonian_moments",
    "moments_from_pdf",
    "moments_from_samples",
    "random_spectral_problem",
]

DIMENSION_CAP = 4096
DEFAULT_MARGIN = 0.05

# Gauss-Legendre rules with 3 * 2**(degree - 1) nodes; node sets are cached
# across calls as context-independent mpf tuples.
_MIN_DEGREE = 3
_MAX_DEGREE = 7
_MAX_DEPTH = 14
_node_cache = {}
_node_lock = threading.Lock()


def _standard_nodes(ctx, degree):
    key = (degree, ctx.prec)
    with _node_lock:
        cached = _node_cache.get(key)
    if cached is None:
        nodes = GaussLegendre(ctx).calc_nodes(degree, ctx.prec)
        cached = tuple((x._mpf_, w._mpf_) for x, w in nodes)
        with _node_lock:
            _node_cache[key] = cached
    return [(ctx.make_mpf(x), ctx.make_mpf(w)) for x, w in cached]


def default_pdf_digits(order):
    """Digits for quadrature moments: enough to survive the order-N transform with ~20 to spare."""
    return int(math.ceil(conditioning_digits(order))) + 20


def _decimal_fraction(v):
    # a float breakpoint such as 0.8 means the decimal 4/5, not its binary neighbour
    if isinstance(v, float):
        return Fraction(repr(v))
    return Fraction(v)


def _panel_moments(ctx, f, lo, hi, degree, order):
    half = (hi - lo) / 2
    mid = (hi + lo) / 2
    sums = [ctx.zero] * (order + 1)
    mags = [ctx.zero] * (order + 1)
    for x, w in _standard_nodes(ctx, degree):
        xi = mid + half * x
        p = half * w * f(xi)
        ap = abs(p)
        ax = abs(xi)
        for n in range(order + 1):
            sums[n] += p
            mags[n] += ap
            p *= xi
            ap *= ax
    return sums, mags


def moments_from_pdf(f, domain=(-1, 1), order=20, precision_digits=None, breakpoints=()):
    """Raw moments ``int x^n f(x) dx`` by adaptive Gauss-Legendre quadrature.

    Parameters
    ----------
    f : callable
        Density evaluated at :mod:`mpmath` numbers.  It receives an ``mpf``
        of a private context (``x.context``), so transcendental functions
        should be taken from there, e.g. ``x.context.exp``.
    domain : (a, b)
        Integration interval; also the domain recorded on the result.
    order : int
        Highest moment N.
    precision_digits : int, optional
        Relative accuracy target per moment (``10**-digits``).  Defaults to
        ``log10(amplification_N) + 20``.
    breakpoints : sequence of float
        Interior discontinuities.  The integrand is never evaluated there.

    Returns
    -------
    MomentVector
        Decimal values carrying ``precision_digits`` digits.

    Raises
    ------
    QuadratureError
        When a panel fails to converge after the maximum number of
        bisections; carries the worst subinterval.
    """
    order = int(order)
    digits = default_pdf_digits(order) if precision_digits is None else int(precision_digits)
    a, b = domain
    AffineDomainMap(a, b)
    ctx = mpmath.MPContext()
    ctx.dps = digits + 10
    tol = ctx.mpf(10) ** (-digits - 2)

    def to_mp(v):
        q = _decimal_fraction(v)
        return ctx.mpf(q.numerator) / q.denominator

    lo_q, hi_q = _decimal_fraction(a), _decimal_fraction(b)
    inner = sorted({_decimal_fraction(p) for p in breakpoints if lo_q < _decimal_fraction(p) < hi_q})
    edges = [to_mp(a)] + [to_mp(p) for p in inner] + [to_mp(b)]

    # coarse scale of int |x^n f|, so that panels where f is negligible are
    # judged against the whole integral rather than against themselves
    scale = [ctx.zero] * (order + 1)
    for lo, hi in zip(edges[:-1], edges[1:]):
        _, mags = _panel_moments(ctx, f, lo, hi, _MAX_DEGREE - 1, order)
        scale = [s + m for s, m in zip(scale, mags)]
    # relative target per moment, with an absolute floor far below mu_0
    floor = scale[0] * ctx.mpf(10) ** (-digits)
    scale = [g + floor for g in scale]
    length = edges[-1] - edges[0]
    tiny = ctx.mpf(10) ** (-2 * ctx.dps)

    totals = [ctx.zero] * (order + 1)
    stack = [(lo, hi, 0) for lo, hi in zip(edges[:-1], edges[1:])]
    while stack:
        lo, hi, depth = stack.pop()
        share = (hi - lo) / length
        prev = None
        converged = False
        for degree in range(_MIN_DEGREE, _MAX_DEGREE + 1):
            sums, mags = _panel_moments(ctx, f, lo, hi, degree, order)
            if prev is not None:
                resid = max(
                    abs(s - p) / (m + g * share + tiny) for s, p, m, g in zip(sums, prev, mags, scale)
                )
                if resid <= tol:
                    converged = True
                    break
            prev = sums
        if converged:
            for n in range(order + 1):
                totals[n] += sums[n]
            continue
        if depth >= _MAX_DEPTH:
            raise QuadratureError(
                f"moment quadrature did not converge on [{float(lo):.6g}, {float(hi):.6g}]",
                (float(lo), float(hi)),
                float(resid),
            )
        mid = (lo + hi) / 2
        stack.append((mid, hi, depth + 1))
        stack.append((lo, mid, depth + 1))

    values = tuple(Decimal(ctx.nstr(v, digits + 5, strip_zeros=False)) if v != 0 else Decimal(0) for v in totals)
    return MomentVector(values, (a, b), digits)


def _compensated_mean(values):
    # math.fsum is exactly rounded; high powers of near-unit samples lose digits otherwise
    return math.fsum(values) / len(values)


def moments_from_samples(samples, order, domain=(-1, 1)):
    """Empirical raw moments ``(1/M) sum x_i^n`` with exactly rounded summation.

    Returns a float :class:`MomentVector` whose ``standard_errors`` hold the
    standard error of each sample moment.
    """
    x = np.asarray(samples, dtype=float).ravel()
    if x.size == 0:
        raise ValueError("no samples given")
    a, b = float(domain[0]), float(domain[1])
    outside = np.flatnonzero((x < a) | (x > b) | ~np.isfinite(x))
    if outside.size:
        listing = ", ".join(f"#{i}={float(x[i])!r}" for i in outside[:10])
        more = "" if outside.size <= 10 else f" (+{outside.size - 10} more)"
        raise DomainError(f"{outside.size} samples outside [{a}, {b}]: {listing}{more}")
    values = [1.0]
    errors = [0.0]
    power = np.ones_like(x)
    for _ in range(order):
        power = power * x
        mean = _compensated_mean(power)
        values.append(mean)
        if x.size > 1:
            var = math.fsum((power - mean) ** 2) / (x.size - 1)
            errors.append(math.sqrt(var / x.size))
        else:
            errors.append(math.inf)
    return MomentVector(tuple(values), tuple(domain), standard_errors=tuple(errors))


@dataclass(frozen=True, eq=False)
class SpectralProblem:
    """Dense Hermitian operator and a normalized state vector."""

    operator: np.ndarray
    state: np.ndarray
    dimension_cap: int = DIMENSION_CAP

    def __post_init__(self):
        h = np.asarray(self.operator, dtype=complex)
        psi = np.asarray(self.state, dtype=complex).ravel()
        if h.ndim != 2 or h.shape[0] != h.shape[1]:
            raise ValueError(f"operator must be square, got shape {h.shape}")
        if h.shape[0] > self.dimension_cap:
            raise ValueError(f"dimension {h.shape[0]} exceeds the cap of {self.dimension_cap}")
        if psi.size != h.shape[0]:
            raise ValueError(f"state length {psi.size} does not match dimension {h.shape[0]}")
        asym = float(np.max(np.abs(h - h.conj().T))) if h.size else 0.0
        if asym >= 1e-12:
            raise ValueError(f"operator is not Hermitian (max |H - H^dagger| = {asym:.3g})")
        norm = float(np.linalg.norm(psi))
        if abs(norm - 1.0) >= 1e-12:
            raise ValueError(f"state is not normalized (norm = {norm!r})")
        object.__setattr__(self, "operator", h)
        object.__setattr__(self, "state", psi)

    @property
    def dim(self):
        return self.operator.shape[0]

    def eigendecomposition(self):
        """Eigenvalues and overlap weights ``|<phi_k|psi>|^2``."""
        energies, vectors = np.linalg.eigh(self.operator)
        weights = np.abs(vectors.conj().T @ self.state) ** 2
        return energies, weights


def random_spectral_problem(dim=64, seed=0):
    """Seeded GUE-like Hermitian matrix (unit-order spectrum) and random state."""
    rng = np.random.default_rng(seed)
    g = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    h = (g + g.conj().T) / (2.0 * math.sqrt(2.0 * dim))
    h = (h + h.conj().T) / 2.0
    psi = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    psi /= np.linalg.norm(psi)
    return SpectralProblem(h, psi)


def hamiltonian_moments(problem, order, domain=None):
    """``mu_n = <psi|H^n|psi>`` from repeated matrix-vector products.

    The moments are recorded on ``domain`` (default: Gershgorin bounds with
    the default margin) so they can be rescaled to [-1, 1].
    """
    if domain is None:
        dmap = estimate_spectral_bounds(problem)
        domain = (dmap.a, dmap.b)
    v = problem.state.copy()
    values = [1.0]
    for n in range(1, order + 1):
        v = problem.operator @ v
        mu = np.vdot(problem.state, v)
        if abs(mu.imag) >= 1e-10 * max(1.0, abs(mu.real)):
            raise ValueError(f"moment {n} has imaginary residue {mu.imag:.3g}; operator is not Hermitian")
        values.append(float(mu.real))
    values[0] = float(np.vdot(problem.state, problem.state).real)
    return MomentVector(tuple(values), tuple(domain))


def hamiltonian_chebyshev_expectations(problem, domain_map, order, escape_tol=1e-6):
    """``<psi|T_n(H')|psi>`` for the mapped operator ``H' = forward(H)``.

    Uses the vector recurrence ``v_{n+1} = 2 H' v_n - v_{n-1}``, which is
    stable and needs ``order`` matrix-vector products.

    Raises
    ------
    SpectrumEscapeError
        When some ``|<T_n>|`` exceeds ``1 + escape_tol``; the mapped
        spectrum is not inside [-1, 1].
    """
    a, b = float(domain_map.a), float(domain_map.b)
    h = (2.0 * problem.operator - (a + b) * np.eye(problem.dim)) / (b - a)
    psi = problem.state
    values = np.empty(order + 1)
    v_prev = psi
    values[0] = np.vdot(psi, psi).real
    if order >= 1:
        v_cur = h @ psi
        values[1] = np.vdot(psi, v_cur).real
        for n in range(2, order + 1):
            v_prev, v_cur = v_cur, 2.0 * (h @ v_cur) - v_prev
            values[n] = np.vdot(psi, v_cur).real
    worst = float(np.max(np.abs(values)))
    if worst > 1.0 + escape_tol:
        raise SpectrumEscapeError(
            f"|<T_n>| reaches {worst:.6g} > 1; the spectrum leaves the mapped interval "
            f"[{a:.6g}, {b:.6g}], use a larger margin"
        )
    return ChebyshevExpectations(values, precision_used=15)


def estimate_spectral_bounds(problem, margin=DEFAULT_MARGIN):
    """Gershgorin enclosure of the spectrum, widened by ``margin`` of its half-width.

    Returns
    -------
    AffineDomainMap
    """
    h = problem.operator
    centers = h.diagonal().real
    radii = np.sum(np.abs(h), axis=1) - np.abs(h.diagonal())
    lo = float(np.min(centers - radii))
    hi = float(np.max(centers + radii))
    half = (hi - lo) / 2.0
    mid = (lo + hi) / 2.0
    if half == 0.0:
        # scalar operator: the enclosure is a point, give it a nominal width
        half = max(abs(mid), 1.0) * 1e-3
    half *= 1.0 + margin
    return AffineDomainMap(mid - half, mid + half)


def _broadening_extra(sigma):
    # columns beyond order + 8/sigma fall below double-precision round-off
    return int(math.ceil(8.0 / sigma)) + 16


def gaussian_broadening_matrix(order, sigma, extra=None, tol=1e-13):
    """Matrix ``K`` with ``<T_n>_P = sum_m K[n, m] <T_m>`` for Gaussian broadening.

    ``G_n(x) = int_{-1}^{1} T_n(y) K_sigma(y - x) dy`` is bounded and
    analytic on [-1, 1]; row ``n`` holds its Chebyshev coefficients.  So if
    ``<T_m>`` are expectations of a distribution on [-1, 1], the product
    gives the expectations of that distribution convolved with a Gaussian
    of width ``sigma`` and truncated to [-1, 1] (mass leaking past the
    endpoints is dropped, not renormalized).

    Parameters
    ----------
    order : int
        Highest broadened order N.
    sigma : float
        Kernel width in mapped units.
    extra : int, optional
        Columns beyond ``order``; default ``ceil(8 / sigma) + 16``.
    tol : float
        Largest coefficient allowed in the last 16 columns.

    Returns
    -------
    numpy.ndarray
        Shape ``(order + 1, order + extra + 1)``.
    """
    if not sigma > 0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    order = int(order)
    extra = _broadening_extra(sigma) if extra is None else int(extra)
    cols = order + extra + 1
    # inner integral over y on composite Gauss-Legendre panels of width sigma / 4
    panels = max(64, int(math.ceil(8.0 / sigma)))
    gx, gw = np.polynomial.legendre.leggauss(16)
    edges = np.linspace(-1.0, 1.0, panels + 1)
    half = (edges[1:] - edges[:-1])[:, None] / 2.0
    y = ((edges[:-1, None] + edges[1:, None]) / 2.0 + half * gx).ravel()
    w = (half * gw).ravel()
    nodes = cols + 64
    x = np.cos(np.pi * (np.arange(nodes) + 0.5) / nodes)
    kernel = np.exp(-0.5 * ((y[:, None] - x[None, :]) / sigma) ** 2) / (sigma * math.sqrt(2.0 * math.pi))
    ty = np.cos(np.arange(order + 1)[:, None] * np.arccos(y)[None, :])
    g = (ty * w) @ kernel
    tx = np.cos(np.arange(cols)[:, None] * np.arccos(x)[None, :])
    k = g @ tx.T * (2.0 / nodes)
    k[:, 0] /= 2.0
    tail = float(np.max(np.abs(k[:, -16:])))
    if tail > tol:
        raise ValueError(f"broadening expansion not converged (tail {tail:.3g}); increase extra")
    return k


def broaden_expectations(c, sigma, order=None):
    """Gaussian-broadened expectations from unbroadened ones of higher order.

    ``c`` must reach order ``order + ceil(8 / sigma) + 16``.
    """
    values = np.asarray(getattr(c, "values", c), dtype=float)
    extra = _broadening_extra(sigma)
    order = values.size - 1 - extra if order is None else int(order)
    if order < 0 or values.size < order + extra + 1:
        raise ValueError(
            f"broadening to order {order} at sigma={sigma} needs {order + extra + 1} expectations, got {values.size}"
        )
    k = gaussian_broadening_matrix(order, sigma, extra)
    return ChebyshevExpectations(k @ values[: order + extra + 1], precision_used=15)


def broadened_chebyshev_expectations(problem, domain_map, order, sigma, escape_tol=1e-6):
    """Expectations ``<T_n>`` of the broadened energy distribution.

    ``P(y) = sum_k |gamma_k|^2 K_sigma(y - forward(e_k))`` restricted to
    [-1, 1], with ``sigma`` in mapped units.  Only the operator recurrence
    is used; no diagonalization.
    """
    raw = hamiltonian_chebyshev_expectations(problem, domain_map, int(order) + _broadening_extra(sigma), escape_tol)
    return broaden_expectations(raw, sigma, order)
