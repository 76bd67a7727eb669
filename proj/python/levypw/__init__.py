"""Perturbative correlation functions of a lattice SPDE driven by Levy noise.

The compiled core exposes tree and graph enumeration, graph evaluation to
correlation-series coefficients, direct Euler simulation, and the noise-law
identification pipeline. Fields come back as one numpy value per torus site,
row-major over coordinates.
"""

from ._core import (
    ConfigurationError,
    Lattice,
    LatticeConfig,
    LevyParams,
    NumericFailure,
    SimConfig,
    classify_kurtosis,
    correlation_series,
    discretization_matched_kernels,
    estimate_increment_cumulants,
    first_order_kernels,
    fit_first_order,
    graphs,
    identify_noise,
    scale_jumps,
    simulate_correlation,
    trees,
)

__all__ = [
    "ConfigurationError",
    "Lattice",
    "LatticeConfig",
    "LevyParams",
    "NumericFailure",
    "SimConfig",
    "classify_kurtosis",
    "correlation_series",
    "discretization_matched_kernels",
    "estimate_increment_cumulants",
    "first_order_kernels",
    "fit_first_order",
    "graphs",
    "identify_noise",
    "scale_jumps",
    "simulate_correlation",
    "trees",
]
