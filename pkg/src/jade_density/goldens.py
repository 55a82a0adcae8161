"""Frozen regression values for the benchmark cases.

``compute_goldens`` recomputes every value from scratch; ``--golden-update``
writes the result to ``data/goldens.json``, which the test suite reads.
"""

import json
import os
import warnings

import numpy as np

from .chebyshev import moments_to_chebyshev
from .exceptions import PrecisionWarning
from .io import atomic_write
from .reference import SPECTRAL_DIM, SPECTRAL_SEED, get_corpus
from .sources import random_spectral_problem
from .workflows import JADE_COUNTS, SPECTRAL_ORDERS, compare, spectral_convergence

__all__ = ["GOLDEN_PATH", "compute_goldens", "load_goldens", "write_goldens"]

GOLDEN_PATH = os.path.join(os.path.dirname(__file__), "data", "goldens.json")
FIG3_CASES = ("bimodal-poly", "multimodal-gauss", "asym-uniform", "sigmoid")
SLACK = 0.10


def _round(x):
    return float(f"{x:.6g}")


def compute_goldens():
    """Recompute the frozen benchmark values (takes a few seconds)."""
    out = {
        "provenance": "regenerate with: jade-density --golden-update",
        "slack": SLACK,
        "compare": {},
        "spectral": {},
        "conditioning": {},
    }
    for cid in FIG3_CASES:
        report, _, _ = compare(get_corpus(cid), methods=("jade", "gram-charlier"))
        out["compare"][cid] = {
            "jade_moments": JADE_COUNTS[cid],
            "gc_cumulants": 10,
            "jade_L2": _round(report.result("jade").metrics["L2"]),
            "gc_L2": _round(report.result("gram-charlier").metrics["L2"]),
        }
    spec = spectral_convergence(random_spectral_problem(SPECTRAL_DIM, SPECTRAL_SEED), SPECTRAL_ORDERS)
    out["spectral"] = {
        "seed": SPECTRAL_SEED,
        "dim": SPECTRAL_DIM,
        "sigma_mapped": spec.sigma,
        "L1": {str(row["order"]): _round(row["metrics"]["L1"]) for row in spec.rows},
        "gc_max_oscillation": {str(k): _round(v["max_oscillation"]) for k, v in spec.gram_charlier.items()},
    }
    moments = get_corpus("asym-uniform").moments(100)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        low = moments_to_chebyshev(moments.to_float(), 100)
    high = moments_to_chebyshev(moments, 100)
    out["conditioning"] = {
        "order": 100,
        "float_max_abs": _round(float(np.max(np.abs(low.values)))),
        "high_precision_max_abs": _round(float(np.max(np.abs(high.values)))),
        "high_precision_digits": high.precision_used,
    }
    return out


def write_goldens(path=GOLDEN_PATH):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", PrecisionWarning)
        data = compute_goldens()
    atomic_write(path, json.dumps(data, indent=1, sort_keys=True) + "\n")
    return data


def load_goldens(path=GOLDEN_PATH):
    with open(path) as fh:
        return json.load(fh)
