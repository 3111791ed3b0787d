"""Exponent regions for binary quantum and classical hypothesis tests that may abstain."""

__version__ = "0.1.0"

from .divergences import (  # noqa: E402
    DivergenceFamily,
    RenyiPair,
    chernoff,
    d_star,
    fidelity,
    max_relative_entropy,
    measured_relative_entropy,
    min_relative_entropy_zero,
    projective_metrics,
    relative_entropy,
    renyi,
)
from .errors import *  # noqa: E402,F401,F403
from .linalg import HermitianSpectrum, eig, matrix_function  # noqa: E402
from .regions import (  # noqa: E402
    ExponentRegions,
    RegionBoundary,
    boundary_scan,
    classical_reject_region,
    conclusive_region,
    d_plus,
    d_plus_simplification,
    han_kobayashi,
    hoeffding,
    min_conclusiveness_exponent,
    onesided_boundary,
    quantum_reject_region,
    symmetric_boundary,
)
from .states import (  # noqa: E402
    ClassicalDistribution,
    DensityMatrix,
    as_state,
    bernoulli,
    validate_distribution,
    validate_state,
)
