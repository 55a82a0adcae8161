"""Comparison methods: Gram-Charlier A series from cumulants and Gaussian KDE."""

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

__all__ = [
    "MAX_CUMULANTS",
    "CumulantVector",
    "cumulants_to_moments",
    "gram_charlier",
    "kde_gaussian",
    "moments_to_cumulants",
    "silverman_bandwidth",
]

MAX_CUMULANTS = 12


@dataclass(frozen=True)
class CumulantVector:
    """Cumulants kappa_1..kappa_M and the number of moments they came from."""

    values: tuple
    source_order: int

    @property
    def order(self):
        return len(self.values)

    @property
    def mean(self):
        return self.values[0]

    @property
    def variance(self):
        return self.values[1] if len(self.values) > 1 else None


def _moment_list(moments):
    values = getattr(moments, "values", moments)
    return [Fraction(v) if not isinstance(v, Fraction) else v for v in values]


def moments_to_cumulants(moments, order=None):
    """Cumulants from raw moments with mu'_0 = 1.

    ``kappa_n = mu'_n - sum_{k=1}^{n-1} C(n-1, k-1) kappa_k mu'_{n-k}``,
    evaluated in exact rational arithmetic on the (exactly converted) input.
    """
    mu = _moment_list(moments)
    order = len(mu) - 1 if order is None else int(order)
    if order < 1:
        raise ValueError("need at least one cumulant")
    if order > len(mu) - 1:
        raise ValueError(f"insufficient moments: {order} cumulants need {order + 1} moments, got {len(mu)}")
    if abs(mu[0] - 1) > Fraction(1, 10**12):
        raise ValueError(f"moments must be normalized (mu'_0 = {float(mu[0])!r})")
    kappa = [None]
    for n in range(1, order + 1):
        k = mu[n]
        for j in range(1, n):
            k -= math.comb(n - 1, j - 1) * kappa[j] * mu[n - j]
        kappa.append(k)
    return CumulantVector(tuple(float(k) for k in kappa[1:]), len(mu) - 1)


def cumulants_to_moments(cumulants):
    """Raw moments mu'_0..mu'_M from cumulants (inverse of :func:`moments_to_cumulants`)."""
    kappa = [None] + [Fraction(k) for k in getattr(cumulants, "values", cumulants)]
    mu = [Fraction(1)]
    for n in range(1, len(kappa)):
        mu.append(sum((math.comb(n - 1, k - 1) * kappa[k] * mu[n - k] for k in range(1, n + 1)), Fraction(0)))
    return tuple(float(m) for m in mu)


def _hermite_coefficients(cumulants):
    """Coefficients a_n of ``f(z) = phi(z) sum_n a_n He_n(z)`` for the standardized variable.

    They are the Taylor coefficients of ``exp(sum_{r>=3} kappa*_r s^r / r!)``,
    i.e. complete Bell polynomials in the standardized cumulants, truncated
    at the number of cumulants supplied.
    """
    kappa = cumulants.values
    order = len(kappa)
    var = kappa[1]
    g = [0.0] * (order + 1)
    for r in range(3, order + 1):
        g[r] = kappa[r - 1] / var ** (r / 2.0) / math.factorial(r)
    a = [1.0] + [0.0] * order
    for n in range(1, order + 1):
        a[n] = sum(r * g[r] * a[n - r] for r in range(3, n + 1)) / n
    return np.array(a)


def gram_charlier(cumulants, x):
    """Gram-Charlier A series density built from cumulants.

    Truncated at the number of cumulants available; the result can be
    negative and oscillate when the target is far from Gaussian.
    """
    if not isinstance(cumulants, CumulantVector):
        cumulants = CumulantVector(tuple(cumulants), len(cumulants))
    if cumulants.order < 2 or not cumulants.variance > 0:
        raise ValueError("Gram-Charlier needs kappa_2 > 0")
    scalar = np.ndim(x) == 0
    sd = math.sqrt(cumulants.variance)
    z = (np.asarray(x, dtype=float) - cumulants.mean) / sd
    a = _hermite_coefficients(cumulants)
    he_prev = np.ones_like(z)
    total = a[0] * he_prev
    if a.size > 1:
        he_cur = z.copy()
        total = total + a[1] * he_cur
        for n in range(1, a.size - 1):
            he_prev, he_cur = he_cur, z * he_cur - n * he_prev
            total = total + a[n + 1] * he_cur
    out = np.exp(-0.5 * z**2) / math.sqrt(2.0 * math.pi) / sd * total
    return float(out) if scalar else out


def silverman_bandwidth(samples):
    """``0.9 min(std, IQR / 1.34) M^(-1/5)``."""
    x = np.asarray(samples, dtype=float).ravel()
    if x.size < 2:
        raise ValueError("Silverman's rule needs at least two samples; pass an explicit bandwidth")
    q75, q25 = np.percentile(x, [75, 25])
    spread = min(float(np.std(x, ddof=1)), float(q75 - q25) / 1.34)
    if not spread > 0:
        raise ValueError("samples have zero spread under Silverman's rule; pass an explicit bandwidth")
    return 0.9 * spread * x.size ** (-0.2)


def kde_gaussian(samples, x, bandwidth="silverman", chunk=256):
    """Gaussian kernel density estimate ``(1 / M h) sum phi((x - x_i) / h)``.

    No boundary correction is applied.
    """
    data = np.asarray(samples, dtype=float).ravel()
    if data.size == 0:
        raise ValueError("no samples given")
    h = silverman_bandwidth(data) if bandwidth == "silverman" else float(bandwidth)
    if not h > 0:
        raise ValueError(f"bandwidth must be positive, got {h}")
    scalar = np.ndim(x) == 0
    pts = np.atleast_1d(np.asarray(x, dtype=float))
    out = np.empty(pts.size)
    norm = 1.0 / (data.size * h * math.sqrt(2.0 * math.pi))
    for start in range(0, pts.size, chunk):
        z = (pts[start : start + chunk, None] - data[None, :]) / h
        out[start : start + chunk] = np.exp(-0.5 * z**2).sum(axis=1) * norm
    return float(out[0]) if scalar else out.reshape(np.shape(x))
