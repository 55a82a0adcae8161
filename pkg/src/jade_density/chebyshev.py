"""Chebyshev polynomials, exact coefficient matrices and the moment transform.

The map from raw moments to Chebyshev expectations,

    <T_n(X)> = sum_m c[n, m] * mu'_m,

is exact in integer coefficients but badly conditioned: the row sums
``sum_m |c[n, m]|`` grow like ``(1 + sqrt(2))**n``.  Rational input is
therefore transformed in exact arithmetic, decimal input in
:mod:`decimal` arithmetic at a caller-controlled number of digits, and
binary floats in plain double precision (flagged, never silently).
"""

import math
import warnings
from dataclasses import dataclass, field
from decimal import Decimal, localcontext
from fractions import Fraction
from functools import lru_cache
from numbers import Rational

import numpy as np

from .exceptions import (
    DomainError,
    MomentValidityWarning,
    NormalizationWarning,
    PrecisionWarning,
)

__all__ = [
    "AffineDomainMap",
    "ChebCoeffMatrix",
    "ChebyshevExpectations",
    "MomentVector",
    "chebyshev_coefficient_matrix",
    "chebyshev_series",
    "chebyshev_trig",
    "chebyshev_vandermonde",
    "conditioning_digits",
    "default_precision_digits",
    "eval_chebyshev",
    "moments_to_chebyshev",
    "rescale_moments",
]

# Decimal digits carried by an IEEE double.
FLOAT_DIGITS = 15
EXPECTATION_TOL = 1e-9


def _check_unit_interval(x):
    x = np.asarray(x, dtype=float)
    if np.any(np.isnan(x)) or np.any(np.abs(x) > 1.0):
        raise DomainError("Chebyshev evaluation requires -1 <= x <= 1")
    return x


def eval_chebyshev(n, x):
    """Evaluate T_n(x) with the three-term recurrence.

    Parameters
    ----------
    n : int
        Degree, ``n >= 0``.
    x : float or array_like
        Points in [-1, 1].  No analytic continuation is provided.

    Returns
    -------
    float or ndarray
    """
    n = int(n)
    if n < 0:
        raise ValueError(f"degree must be non-negative, got {n}")
    scalar = np.ndim(x) == 0
    x = _check_unit_interval(x)
    t_prev = np.ones_like(x)
    if n == 0:
        out = t_prev
    else:
        t_cur = x.copy()
        for _ in range(n - 1):
            t_prev, t_cur = t_cur, 2.0 * x * t_cur - t_prev
        out = t_cur
    return float(out) if scalar else out


def chebyshev_trig(n, x):
    """Evaluate T_n(x) as cos(n arccos x); cross-check path for the recurrence."""
    scalar = np.ndim(x) == 0
    x = _check_unit_interval(x)
    out = np.cos(int(n) * np.arccos(x))
    return float(out) if scalar else out


def chebyshev_vandermonde(order, x):
    """Matrix ``V[j, n] = T_n(x_j)`` for ``n = 0..order``."""
    x = _check_unit_interval(np.atleast_1d(x))
    out = np.empty((x.size, order + 1))
    out[:, 0] = 1.0
    if order >= 1:
        out[:, 1] = x
    for n in range(2, order + 1):
        out[:, n] = 2.0 * x * out[:, n - 1] - out[:, n - 2]
    return out


def chebyshev_series(coeffs, x, method="clenshaw"):
    """Evaluate ``sum_n coeffs[n] * T_n(x)``.

    ``method="clenshaw"`` runs the backward recurrence; ``"naive"`` sums the
    terms of the forward recurrence and exists as a self-check path.  Both
    use a fixed summation order per point.
    """
    coeffs = np.asarray(coeffs, dtype=float)
    x = _check_unit_interval(x)
    if coeffs.size == 0:
        return np.zeros_like(x)
    if method == "clenshaw":
        b1 = np.zeros_like(x)
        b2 = np.zeros_like(x)
        for c in coeffs[:0:-1]:
            b1, b2 = 2.0 * x * b1 - b2 + c, b1
        return x * b1 - b2 + coeffs[0]
    if method == "naive":
        t_prev = np.ones_like(x)
        total = coeffs[0] * t_prev
        if coeffs.size > 1:
            t_cur = x.copy()
            total = total + coeffs[1] * t_cur
            for c in coeffs[2:]:
                t_prev, t_cur = t_cur, 2.0 * x * t_cur - t_prev
                total = total + c * t_cur
        return total
    raise ValueError(f"unknown summation method {method!r}")


@dataclass(frozen=True)
class ChebCoeffMatrix:
    """Lower-triangular integer matrix; ``rows[n][m]`` is the x**m coefficient of T_n."""

    order: int
    rows: tuple

    def row(self, n):
        return self.rows[n]

    def amplification(self, n=None):
        """Row sum ``sum_m |c[n, m]|``; bounds the error growth of row n."""
        n = self.order if n is None else n
        return sum(abs(c) for c in self.rows[n])

    def as_float_array(self):
        out = np.zeros((self.order + 1, self.order + 1))
        for n, row in enumerate(self.rows):
            out[n, : n + 1] = [float(c) for c in row]
        return out

    def evaluate_row(self, n, x):
        """Evaluate row n as a polynomial in x by Horner's rule."""
        x = np.asarray(x, dtype=float)
        acc = np.zeros_like(x)
        for c in reversed(self.rows[n]):
            acc = acc * x + float(c)
        return acc


@lru_cache(maxsize=16)
def chebyshev_coefficient_matrix(order):
    """Exact coefficients of T_0..T_order in the monomial basis.

    Rows follow ``row_n = 2 * shift(row_{n-1}) - row_{n-2}``; Python integers
    keep every entry exact (they pass 2**63 near n = 64).
    """
    order = int(order)
    if order < 0:
        raise ValueError(f"order must be non-negative, got {order}")
    rows = [(1,)]
    if order >= 1:
        rows.append((0, 1))
    for n in range(2, order + 1):
        prev, prev2 = rows[n - 1], rows[n - 2]
        row = [0] * (n + 1)
        for m, c in enumerate(prev):
            row[m + 1] += 2 * c
        for m, c in enumerate(prev2):
            row[m] -= c
        rows.append(tuple(row))
    return ChebCoeffMatrix(order=order, rows=tuple(rows))


def conditioning_digits(order):
    """Decimal digits lost by the monomial transform at ``order`` (log10 of the row sum)."""
    if order <= 0:
        return 0.0
    return math.log10(chebyshev_coefficient_matrix(order).amplification(order))


def default_precision_digits(order):
    """Working digits used for decimal input when none are requested: ``4 * order``."""
    return max(4 * int(order), 32)


def _as_fraction(v):
    if isinstance(v, Fraction):
        return v
    if isinstance(v, (int, Rational, Decimal, float)):
        return Fraction(v)
    return Fraction(str(v))


def _fraction_to_decimal(q):
    return Decimal(q.numerator) / Decimal(q.denominator)


@dataclass(frozen=True)
class AffineDomainMap:
    """Invertible affine map between a physical interval [a, b] and [-1, 1]."""

    a: object
    b: object

    def __post_init__(self):
        if not _as_fraction(self.a) < _as_fraction(self.b):
            raise DomainError(f"require a < b, got a={self.a}, b={self.b}")

    @property
    def width(self):
        return float(self.b) - float(self.a)

    @property
    def jacobian(self):
        """``d forward / dx = 2 / (b - a)``; multiplies densities reported in physical units."""
        return 2.0 / self.width

    def forward(self, x):
        a, b = float(self.a), float(self.b)
        return (2.0 * np.asarray(x, dtype=float) - (a + b)) / (b - a)

    def inverse(self, y):
        a, b = float(self.a), float(self.b)
        return ((b - a) * np.asarray(y, dtype=float) + (a + b)) / 2.0

    def exact_coefficients(self, inverse=False):
        """Exact ``(scale, offset)`` of the affine map as fractions."""
        a, b = _as_fraction(self.a), _as_fraction(self.b)
        if inverse:
            return (b - a) / 2, (a + b) / 2
        return 2 / (b - a), -(a + b) / (b - a)

    def is_identity(self):
        return _as_fraction(self.a) == -1 and _as_fraction(self.b) == 1

    def to_dict(self):
        return {"a": _number_to_json(self.a), "b": _number_to_json(self.b)}


def _number_to_json(v):
    if isinstance(v, (int, float)):
        return v
    if isinstance(v, Fraction) and v.denominator == 1:
        return v.numerator
    return float(v)


def _infer_kind(values):
    if any(isinstance(v, float) for v in values):
        return "float"
    if any(isinstance(v, Decimal) for v in values):
        return "decimal"
    return "rational"


def _significant_digits(d):
    sign, digits, exp = d.as_tuple()
    return len(digits)


@dataclass(frozen=True, eq=False)
class MomentVector:
    """Raw moments mu'_0..mu'_N of a random variable on ``domain``.

    ``values`` hold :class:`~fractions.Fraction` (exact), :class:`~decimal.Decimal`
    (decimal strings with ``precision_digits`` meaningful digits) or ``float``.
    Mixed input is coerced to the least exact kind present.
    """

    values: tuple
    domain: tuple = (-1, 1)
    precision_digits: int = None
    standard_errors: tuple = None
    warnings: tuple = field(default=())

    def __post_init__(self):
        raw = tuple(self.values)
        if not raw:
            raise ValueError("a moment vector needs at least mu'_0")
        kind = _infer_kind(raw)
        if kind == "float":
            values = tuple(float(v) for v in raw)
        elif kind == "decimal":
            values = tuple(v if isinstance(v, Decimal) else _fraction_to_decimal(_as_fraction(v)) for v in raw)
        else:
            values = tuple(_as_fraction(v) for v in raw)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "kind", kind)
        a, b = self.domain
        AffineDomainMap(a, b)
        object.__setattr__(self, "domain", (a, b))

        digits = self.precision_digits
        if digits is None:
            if kind == "float":
                digits = FLOAT_DIGITS
            elif kind == "decimal":
                digits = max(_significant_digits(v) for v in values)
        object.__setattr__(self, "precision_digits", digits)

        notes = list(self.warnings)
        mu0 = float(values[0])
        if abs(mu0 - 1.0) > 1e-12:
            notes.append(f"mu'_0 = {mu0!r} differs from 1; the distribution is not normalized")
            warnings.warn(notes[-1], NormalizationWarning, stacklevel=3)
        radius = max(abs(float(a)), abs(float(b)))
        mass = abs(mu0)
        bad = [n for n, v in enumerate(values) if n and abs(float(v)) > mass * radius**n * (1 + 1e-9) + 1e-12]
        if bad:
            notes.append(f"moments exceed the domain bound at orders {bad[:10]}; input is noisy or invalid")
            warnings.warn(notes[-1], MomentValidityWarning, stacklevel=3)
        object.__setattr__(self, "warnings", tuple(notes))

    @property
    def order(self):
        return len(self.values) - 1

    def __len__(self):
        return len(self.values)

    def as_float(self):
        return np.array([float(v) for v in self.values])

    def to_float(self):
        """Same moments rounded to binary doubles."""
        return MomentVector(tuple(float(v) for v in self.values), self.domain, FLOAT_DIGITS, self.standard_errors)

    def truncate(self, order):
        if order > self.order:
            raise ValueError(f"requested order {order} exceeds available order {self.order}")
        se = None if self.standard_errors is None else tuple(self.standard_errors[: order + 1])
        return MomentVector(self.values[: order + 1], self.domain, self.precision_digits, se)


@dataclass(frozen=True, eq=False)
class ChebyshevExpectations:
    """<T_0(X)>..<T_N(X)>; the only input the density estimator needs.

    Attributes
    ----------
    values : ndarray
        Expectations rounded to double precision.
    exact : tuple or None
        Full-precision values (Fraction or Decimal) when available.
    precision_used : int or None
        Digits carried through the transform; ``None`` for exact arithmetic.
    amplification : int or None
        ``sum_m |c[N, m]|`` of the top row used in the transform.
    """

    values: np.ndarray
    exact: tuple = None
    precision_used: int = None
    amplification: int = None
    warnings: tuple = ()

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        if values.ndim != 1 or values.size == 0:
            raise ValueError("expectations must be a non-empty 1-d sequence")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def order(self):
        return self.values.size - 1

    def __len__(self):
        return self.values.size

    def truncate(self, order):
        if order > self.order:
            raise ValueError(f"requested order {order} exceeds available order {self.order}")
        exact = None if self.exact is None else self.exact[: order + 1]
        amp = chebyshev_coefficient_matrix(order).amplification(order) if self.amplification is not None else None
        return ChebyshevExpectations(self.values[: order + 1], exact, self.precision_used, amp, self.warnings)

    def max_violation(self):
        """Largest ``|<T_n>| - 1``; positive values cannot come from a valid distribution."""
        return float(np.max(np.abs(self.values)) - 1.0)


def _check_expectations(values, notes, tol=EXPECTATION_TOL):
    bad = np.flatnonzero(np.abs(values) > 1.0 + tol)
    if bad.size:
        worst = float(np.max(np.abs(values)))
        notes.append(
            f"|<T_n>| exceeds 1 at {bad.size} orders (first n={int(bad[0])}, max {worst:.3g}); "
            "moments are noisy or the transform ran out of precision"
        )
        warnings.warn(notes[-1], MomentValidityWarning, stacklevel=3)


def moments_to_chebyshev(moments, order=None, precision_digits=None):
    """Transform raw moments on [-1, 1] into Chebyshev expectations.

    Parameters
    ----------
    moments : MomentVector
        Moments already mapped to [-1, 1] (see :func:`rescale_moments`).
    order : int, optional
        Truncation order N; defaults to all available moments.
    precision_digits : int, optional
        Working digits for decimal input.  Defaults to
        ``max(moments.precision_digits, 4 * N)``.

    Returns
    -------
    ChebyshevExpectations
        Exact fractions for rational input.  A :class:`PrecisionWarning` is
        attached (and emitted) when ``log10(amplification)`` exceeds the
        digits available in the input.
    """
    order = moments.order if order is None else int(order)
    if order < 0:
        raise ValueError(f"order must be non-negative, got {order}")
    if order > moments.order:
        raise ValueError(f"insufficient moments: order {order} needs {order + 1} moments, got {len(moments)}")
    if not AffineDomainMap(*moments.domain).is_identity():
        raise DomainError(f"moments live on {moments.domain}; rescale to [-1, 1] first")

    coeffs = chebyshev_coefficient_matrix(order)
    amp = coeffs.amplification(order)
    lost = math.log10(amp) if order > 0 else 0.0
    notes = []
    mu = moments.values[: order + 1]

    if moments.kind == "rational":
        exact = tuple(sum((c * mu[m] for m, c in enumerate(coeffs.rows[n]) if c), Fraction(0)) for n in range(order + 1))
        values = np.array([float(v) for v in exact])
        used = None
    elif moments.kind == "decimal":
        used = int(precision_digits) if precision_digits is not None else max(
            moments.precision_digits, default_precision_digits(order)
        )
        with localcontext() as ctx:
            ctx.prec = used
            exact = tuple(
                sum((Decimal(c) * mu[m] for m, c in enumerate(coeffs.rows[n]) if c), Decimal(0))
                for n in range(order + 1)
            )
        values = np.array([float(v) for v in exact])
        if lost > moments.precision_digits:
            notes.append(
                f"transform amplifies input errors by 10^{lost:.1f} but moments carry only "
                f"{moments.precision_digits} digits"
            )
    else:
        exact = None
        used = FLOAT_DIGITS
        values = coeffs.as_float_array() @ np.array(mu, dtype=float)
        notes.append("moments are binary floats; the transform runs in double precision")
        if lost > FLOAT_DIGITS:
            notes.append(
                f"transform amplifies rounding by 10^{lost:.1f}, beyond the {FLOAT_DIGITS} digits of a double"
            )
    for note in notes:
        if "amplifies" in note:
            warnings.warn(note, PrecisionWarning, stacklevel=2)
    _check_expectations(values, notes)
    return ChebyshevExpectations(values, exact, used, amp, tuple(notes))


def _affine_moments(values, scale, offset, kind, digits):
    """Moments of ``scale * X + offset`` by binomial expansion."""
    n_max = len(values) - 1
    if kind == "rational":
        spow = [scale**k for k in range(n_max + 1)]
        tpow = [offset**k for k in range(n_max + 1)]
        return tuple(
            sum((math.comb(n, k) * spow[k] * tpow[n - k] * values[k] for k in range(n + 1)), Fraction(0))
            for n in range(n_max + 1)
        )
    if kind == "decimal":
        growth = math.log10(abs(scale) + abs(offset)) if (abs(scale) + abs(offset)) > 1 else 0.0
        with localcontext() as ctx:
            ctx.prec = digits + 10 + int(math.ceil(n_max * growth))
            s, t = _fraction_to_decimal(scale), _fraction_to_decimal(offset)
            spow = [s**k for k in range(n_max + 1)]
            tpow = [t**k for k in range(n_max + 1)]
            out = tuple(
                sum((math.comb(n, k) * spow[k] * tpow[n - k] * values[k] for k in range(n + 1)), Decimal(0))
                for n in range(n_max + 1)
            )
        with localcontext() as ctx:
            ctx.prec = digits + 10
            return tuple(+v for v in out)
    s, t = float(scale), float(offset)
    return tuple(
        math.fsum(math.comb(n, k) * s**k * t ** (n - k) * values[k] for k in range(n + 1)) for n in range(n_max + 1)
    )


def rescale_moments(moments, domain_map, inverse=False):
    """Push moments through an affine domain map.

    Forward (default): moments of X on [a, b] become moments of
    ``Y = (2X - (a + b)) / (b - a)`` on [-1, 1].  ``inverse=True`` maps
    moments on [-1, 1] back to [a, b].  Rational input stays exact.
    """
    a, b = domain_map.a, domain_map.b
    source = (-1, 1) if inverse else (a, b)
    target = (a, b) if inverse else (-1, 1)
    got = tuple(_as_fraction(v) for v in moments.domain)
    if got != tuple(_as_fraction(v) for v in source):
        raise DomainError(f"moments live on {moments.domain}, map expects {source}")
    scale, offset = domain_map.exact_coefficients(inverse=inverse)
    values = _affine_moments(moments.values, scale, offset, moments.kind, moments.precision_digits or 0)
    se = None
    if moments.standard_errors is not None and moments.kind == "float":
        # first-order propagation, ignoring covariances
        se = tuple(
            math.sqrt(sum((math.comb(n, k) * float(scale) ** k * float(offset) ** (n - k) * moments.standard_errors[k]) ** 2
                          for k in range(n + 1)))
            for n in range(len(values))
        )
    return MomentVector(values, target, moments.precision_digits, se)
