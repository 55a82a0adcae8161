import numpy as np
import pytest

from jade_density.jade import chebyshev_grid
from jade_density.metrics import ComparisonReport, MethodResult, density_metrics, grid_integral


def test_grid_integral_on_both_grid_kinds():
    g = chebyshev_grid(2001)
    assert grid_integral(g**2, g) == pytest.approx(2 / 3, abs=1e-6)
    lin = np.linspace(-1, 1, 2001)
    assert grid_integral(lin**2, lin) == pytest.approx(2 / 3, abs=1e-6)


def test_metrics_of_identical_curves_vanish():
    g = chebyshev_grid(201)
    m = density_metrics(np.cos(g), np.cos(g), g)
    assert m == {"L1": 0.0, "L2": 0.0, "weighted_L2": 0.0, "max_abs": 0.0}


def test_metrics_of_constant_offset():
    g = chebyshev_grid(2001)
    m = density_metrics(np.full(g.size, 0.1), np.zeros(g.size), g)
    assert m["L1"] == pytest.approx(0.2, abs=1e-6)
    assert m["L2"] == pytest.approx(np.sqrt(0.02), abs=1e-6)
    assert m["weighted_L2"] == pytest.approx(np.sqrt(0.01 * np.pi / 2), abs=1e-6)
    assert m["max_abs"] == pytest.approx(0.1)


def test_report_lookup():
    r = ComparisonReport("x", {"points": 3}, [MethodResult("kde", skipped="no sampler")])
    assert r.result("kde").skipped == "no sampler"
    assert r.to_dict()["methods"][0]["method"] == "kde"
    with pytest.raises(KeyError):
        r.result("jade")
