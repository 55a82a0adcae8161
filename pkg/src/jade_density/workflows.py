"""End-to-end pipelines shared by the CLI, the acceptance suite and notebooks."""

import math
import time
from dataclasses import dataclass, field

import numpy as np

from .baselines import gram_charlier, kde_gaussian, moments_to_cumulants
from .chebyshev import moments_to_chebyshev, rescale_moments
from .jade import DEFAULT_GRID_POINTS, DensityEstimate, chebyshev_grid, jade_density_grid
from .metrics import ComparisonReport, MethodResult, density_metrics, grid_integral
from .reference import SPECTRAL_SIGMA_FRACTION, exact_spectral_density
from .sources import (
    DEFAULT_MARGIN,
    broadened_chebyshev_expectations,
    estimate_spectral_bounds,
    hamiltonian_chebyshev_expectations,
    hamiltonian_moments,
)

__all__ = [
    "COMPARE_METHODS",
    "DEFAULT_COUNTS",
    "JADE_COUNTS",
    "SpectralReport",
    "compare",
    "spectral_convergence",
]

COMPARE_METHODS = ("jade", "gram-charlier", "kde", "exact")

# moment counts at which each corpus case is reconstructed in the benchmark
JADE_COUNTS = {
    "bimodal-poly": 20,
    "multimodal-gauss": 50,
    "asym-uniform": 100,
    "sigmoid": 50,
    "spectral-exact": 100,
}
DEFAULT_COUNTS = {"gram-charlier": 10, "kde": 10_000}
SPECTRAL_ORDERS = (20, 50, 100)
GC_SPECTRAL_CUMULANTS = (6, 12)


def _jade_count(reference, counts):
    if counts and "jade" in counts:
        return int(counts["jade"])
    return JADE_COUNTS.get(reference.id, 50)


def compare(reference, methods=("jade", "gram-charlier", "kde"), counts=None, grid_points=DEFAULT_GRID_POINTS,
            precision_digits=None, seed=0, timings=False):
    """Evaluate estimators against a corpus density on one Chebyshev grid.

    Parameters
    ----------
    reference : CorpusDensity
    methods : sequence of str
        Any of ``jade``, ``gram-charlier``, ``kde`` and ``exact`` (the
        reference itself, useful as a zero check).
    counts : dict, optional
        Moments for ``jade``, cumulants for ``gram-charlier``, samples for
        ``kde``.  Defaults: the benchmark moment count of the reference,
        10 cumulants and 10,000 samples.
    precision_digits : int, optional
        Transform digits for the JADE path (default ``4 N``).
    seed : int
        Seed for KDE samples.
    timings : bool
        Record wall time per method.  Off by default so that reports are
        byte-reproducible.

    Returns
    -------
    report : ComparisonReport
    curves : dict
        Method name to grid values; includes ``"reference"``.
    grid : numpy.ndarray
    """
    if not methods:
        raise ValueError("no methods requested")
    unknown = [m for m in methods if m not in COMPARE_METHODS]
    if unknown:
        raise ValueError(f"unknown methods {unknown}; choose from {', '.join(COMPARE_METHODS)}")
    counts = dict(counts or {})
    grid = chebyshev_grid(grid_points)
    truth = reference(grid)
    curves = {"reference": truth}
    report = ComparisonReport(reference.id, {"kind": "chebyshev", "points": int(grid_points)})
    moment_cache = {}

    def moments(order):
        if order not in moment_cache:
            moment_cache[order] = reference.moments(order)
        return moment_cache[order]

    for method in methods:
        start = time.perf_counter()
        diagnostics = {}
        if method == "jade":
            count = _jade_count(reference, counts)
            c = moments_to_chebyshev(moments(count), count, precision_digits)
            values = jade_density_grid(c, grid).values
            diagnostics = {
                "amplification_log10": math.log10(c.amplification) if c.amplification else 0.0,
                "precision_digits": c.precision_used,
                "max_abs_expectation": float(np.max(np.abs(c.values))),
                "mass": grid_integral(values, grid),
                "warnings": list(c.warnings),
            }
            report.warnings.extend(c.warnings)
        elif method == "gram-charlier":
            count = int(counts.get(method, DEFAULT_COUNTS[method]))
            cumulants = moments_to_cumulants(moments(max(count, _jade_count(reference, counts))), count)
            values = gram_charlier(cumulants, grid)
            diagnostics = {"min_value": float(np.min(values)), "cumulants": list(cumulants.values)}
        elif method == "kde":
            count = int(counts.get(method, DEFAULT_COUNTS[method]))
            try:
                samples = reference.sample(count, seed)
            except ValueError as exc:
                report.results.append(MethodResult(method, count=count, skipped=str(exc)))
                continue
            values = kde_gaussian(samples, grid)
            diagnostics = {"seed": seed, "mass_inside": grid_integral(values, grid)}
        else:
            count = None
            values = truth
        curves[method] = values
        elapsed = time.perf_counter() - start if timings else None
        report.results.append(MethodResult(method, density_metrics(values, truth, grid), count, diagnostics, elapsed))
    return report, curves, grid


@dataclass
class SpectralReport:
    """Reconstructions of an energy distribution at several moment counts."""

    domain_map: object
    sigma: float
    oracle: DensityEstimate
    estimates: dict
    rows: list
    gram_charlier: dict = field(default_factory=dict)
    broadened: bool = True
    warnings: list = field(default_factory=list)

    def l1(self, order):
        for row in self.rows:
            if row["order"] == order:
                return row["metrics"]["L1"]
        raise KeyError(order)

    def to_dict(self):
        return {
            "map": self.domain_map.to_dict(),
            "sigma_mapped": self.sigma,
            "sigma_physical": self.sigma * self.domain_map.width / 2.0,
            "broadened_moments": self.broadened,
            "oracle": {k: v for k, v in self.oracle.metadata.items() if k in ("mass_inside", "leakage", "weight_sum")},
            "convergence": self.rows,
            "gram_charlier": self.gram_charlier,
            "warnings": list(self.warnings),
        }


def spectral_convergence(problem, orders=SPECTRAL_ORDERS, sigma_fraction=SPECTRAL_SIGMA_FRACTION, sigma=None,
                         margin=DEFAULT_MARGIN, grid_points=DEFAULT_GRID_POINTS, broaden=True,
                         gc_cumulants=GC_SPECTRAL_CUMULANTS):
    """JADE reconstructions of a state's energy distribution against the exact oracle.

    The operator is mapped into [-1, 1] with Gershgorin bounds widened by
    ``margin``.  The reference is the Gaussian-broadened distribution from
    full diagonalization.  With ``broaden=True`` the estimator receives the
    expectations of that same broadened distribution, obtained from the
    operator recurrence by applying the kernel in Chebyshev space.  With
    ``broaden=False`` it receives the raw ``<T_n(H')>``, i.e. the sharp
    spectrum, which converges to point masses instead.

    Parameters
    ----------
    problem : SpectralProblem
    orders : sequence of int
    sigma_fraction : float
        Kernel width as a fraction of the mapped interval [a, b].
    sigma : float, optional
        Kernel width in physical units; overrides ``sigma_fraction``.
    gc_cumulants : sequence of int
        Gram-Charlier orders evaluated from the Hamiltonian moments.
    """
    orders = sorted(int(n) for n in orders)
    dmap = estimate_spectral_bounds(problem, margin)
    sigma_mapped = 2.0 * sigma_fraction if sigma is None else float(sigma) * dmap.jacobian
    grid = chebyshev_grid(grid_points)
    oracle = exact_spectral_density(problem, dmap, sigma_mapped, grid)
    top = orders[-1]
    if broaden:
        c = broadened_chebyshev_expectations(problem, dmap, top, sigma_mapped)
    else:
        c = hamiltonian_chebyshev_expectations(problem, dmap, top)
    estimates, rows = {}, []
    for n in orders:
        est = jade_density_grid(c.truncate(n), grid, domain_map=dmap)
        estimates[n] = est
        rows.append({"order": n, "metrics": density_metrics(est.values, oracle.values, grid), "mass": est.integrate()})
    gc = {}
    if gc_cumulants:
        raw = rescale_moments(hamiltonian_moments(problem, max(gc_cumulants), (dmap.a, dmap.b)), dmap)
        for k in gc_cumulants:
            values = gram_charlier(moments_to_cumulants(raw, k), grid)
            metrics = density_metrics(values, oracle.values, grid)
            gc[k] = {"metrics": metrics, "min_value": float(np.min(values)), "max_oscillation": metrics["max_abs"]}
    notes = []
    if oracle.metadata["leakage"] > 1e-6:
        notes.append(
            f"broadened reference leaks {oracle.metadata['leakage']:.3g} of its mass outside the mapped interval; "
            "use a larger margin or smaller sigma"
        )
    return SpectralReport(dmap, sigma_mapped, oracle, estimates, rows, gc, broaden, notes)
