"""Density reconstruction from moments with the Jacobi-Anger closed form.

The estimator needs only the Chebyshev expectations <T_n(X)> of a variable
mapped into [-1, 1]; they come from raw moments (through an exact or
high-precision transform), from samples, or from an operator/state pair.
"""

from .baselines import CumulantVector, gram_charlier, kde_gaussian, moments_to_cumulants, silverman_bandwidth
from .chebyshev import (
    AffineDomainMap,
    ChebCoeffMatrix,
    ChebyshevExpectations,
    MomentVector,
    chebyshev_coefficient_matrix,
    eval_chebyshev,
    moments_to_chebyshev,
    rescale_moments,
)
from .estimators import GaussianKDE, GramCharlierDensity, JADEDensity
from .exceptions import (
    DomainError,
    MomentValidityWarning,
    NormalizationWarning,
    PrecisionWarning,
    QuadratureError,
    SpectrumEscapeError,
)
from .jade import (
    DensityEstimate,
    bessel_j,
    characteristic_function,
    chebyshev_grid,
    inverse_ft_consistency,
    jade_density,
    jade_density_grid,
    projection_coefficients,
    weighted_l2_error,
)
from .metrics import ComparisonReport, density_metrics
from .reference import CORPUS_IDS, CorpusDensity, exact_spectral_density, get_corpus
from .sources import (
    SpectralProblem,
    broadened_chebyshev_expectations,
    estimate_spectral_bounds,
    hamiltonian_chebyshev_expectations,
    hamiltonian_moments,
    moments_from_pdf,
    moments_from_samples,
)
from .workflows import compare, spectral_convergence

__version__ = "0.1.0"

__all__ = [
    "AffineDomainMap",
    "CORPUS_IDS",
    "ChebCoeffMatrix",
    "ChebyshevExpectations",
    "ComparisonReport",
    "CorpusDensity",
    "CumulantVector",
    "DensityEstimate",
    "DomainError",
    "GaussianKDE",
    "GramCharlierDensity",
    "JADEDensity",
    "MomentValidityWarning",
    "MomentVector",
    "NormalizationWarning",
    "PrecisionWarning",
    "QuadratureError",
    "SpectralProblem",
    "SpectrumEscapeError",
    "bessel_j",
    "broadened_chebyshev_expectations",
    "characteristic_function",
    "chebyshev_coefficient_matrix",
    "chebyshev_grid",
    "compare",
    "density_metrics",
    "estimate_spectral_bounds",
    "eval_chebyshev",
    "exact_spectral_density",
    "get_corpus",
    "gram_charlier",
    "hamiltonian_chebyshev_expectations",
    "hamiltonian_moments",
    "inverse_ft_consistency",
    "jade_density",
    "jade_density_grid",
    "kde_gaussian",
    "moments_from_pdf",
    "moments_from_samples",
    "moments_to_chebyshev",
    "moments_to_cumulants",
    "projection_coefficients",
    "rescale_moments",
    "silverman_bandwidth",
    "spectral_convergence",
    "weighted_l2_error",
]
