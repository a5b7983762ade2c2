"""Planar elephant random walk with random rotations: simulation, exact
moment computations, Yule-embedded branching construction, and statistical
verification of the three scaling regimes."""

from spiral_erw.angle import (
    AngleLaw,
    DegenerateLawError,
    FourierCoefficient,
    RegimeClassification,
    classify_regime,
    fourier_coefficient,
    sample_angle,
    validate_nondegenerate,
)
from spiral_erw.walk import (
    ErwPath,
    LatticePath,
    QuadraticVariationTrace,
    lattice_simulate,
    quadratic_variations,
    simulate_path,
    step_powers,
)
from spiral_erw.branching import (
    BranchingRun,
    LimitEstimates,
    Residual,
    additive_functional,
    embedded_walk,
    estimate_limits,
    residual,
    simulate_branching,
)
from spiral_erw.oracle import (
    ExactDistribution,
    MomentTable,
    WMoments,
    abs_square_recursion,
    build_moment_table,
    enumerate_exact,
    normalizer_a,
    square_recursion,
    w_moments,
)
from spiral_erw.stats import (
    CampaignConfig,
    CampaignResult,
    GaussianFitReport,
    VerificationReport,
    gaussian_fit,
    run_campaign,
    spiral_fit,
    verify_critical,
    verify_diffusive,
    verify_superdiffusive,
)

__all__ = [
    "AngleLaw",
    "BranchingRun",
    "CampaignConfig",
    "CampaignResult",
    "DegenerateLawError",
    "ErwPath",
    "ExactDistribution",
    "FourierCoefficient",
    "GaussianFitReport",
    "LatticePath",
    "LimitEstimates",
    "MomentTable",
    "QuadraticVariationTrace",
    "RegimeClassification",
    "Residual",
    "VerificationReport",
    "WMoments",
    "abs_square_recursion",
    "additive_functional",
    "build_moment_table",
    "classify_regime",
    "embedded_walk",
    "enumerate_exact",
    "estimate_limits",
    "fourier_coefficient",
    "gaussian_fit",
    "lattice_simulate",
    "normalizer_a",
    "quadratic_variations",
    "residual",
    "run_campaign",
    "sample_angle",
    "simulate_branching",
    "simulate_path",
    "spiral_fit",
    "square_recursion",
    "step_powers",
    "validate_nondegenerate",
    "verify_critical",
    "verify_diffusive",
    "verify_superdiffusive",
    "w_moments",
]

__version__ = "0.1.0"
