"""Grid error metrics and the comparison report."""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate

from .jade import _is_chebyshev_grid

__all__ = ["ComparisonReport", "MethodResult", "density_metrics", "grid_integral"]


def grid_integral(values, grid):
    """Integrate grid samples over (-1, 1).

    Gauss-Chebyshev weights ``pi sqrt(1 - x^2) / M`` on the Chebyshev grid,
    trapezoid rule on any other grid.
    """
    grid = np.asarray(grid, dtype=float)
    values = np.asarray(values, dtype=float)
    if _is_chebyshev_grid(grid):
        return float(np.pi / grid.size * np.sum(values * np.sqrt(1.0 - grid**2)))
    return float(integrate.trapezoid(values, grid))


def density_metrics(estimate, reference, grid):
    """L1, L2, weighted-L2 and max-abs distances between two sampled densities.

    The weighted-L2 distance uses the weight ``sqrt(1 - x^2)``, the inner
    product under which the closed-form estimate is optimal.
    """
    diff = np.asarray(estimate, dtype=float) - np.asarray(reference, dtype=float)
    grid = np.asarray(grid, dtype=float)
    return {
        "L1": grid_integral(np.abs(diff), grid),
        "L2": math.sqrt(grid_integral(diff**2, grid)),
        "weighted_L2": math.sqrt(grid_integral(diff**2 * np.sqrt(1.0 - grid**2), grid)),
        "max_abs": float(np.max(np.abs(diff))) if diff.size else 0.0,
    }


@dataclass
class MethodResult:
    """Metrics and provenance of one method in a comparison."""

    method: str
    metrics: dict = None
    count: int = None
    diagnostics: dict = field(default_factory=dict)
    wall_time: float = None
    skipped: str = None

    def to_dict(self):
        out = {"method": self.method, "count": self.count}
        if self.skipped is not None:
            out["skipped"] = self.skipped
        else:
            out["metrics"] = self.metrics
            out["diagnostics"] = self.diagnostics
        if self.wall_time is not None:
            out["wall_time"] = self.wall_time
        return out


@dataclass
class ComparisonReport:
    """Per-method metrics against one reference density on a shared grid."""

    reference: str
    grid: dict
    results: list = field(default_factory=list)
    warnings: list = field(default_factory=list)

    def result(self, method):
        for r in self.results:
            if r.method == method:
                return r
        raise KeyError(method)

    def to_dict(self):
        return {
            "reference": self.reference,
            "grid": self.grid,
            "methods": [r.to_dict() for r in self.results],
            "warnings": list(self.warnings),
        }
