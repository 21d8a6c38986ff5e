"""Random polynomial lemniscates: sampling, geometry, and closed forms.

The package measures the level set {|p(z)| = 1} of random Gaussian
polynomials two independent ways: empirically, by extracting the curve and
summing polyline lengths / counting components, and analytically, through
the expected-length integral built from the ensemble's covariance kernel.
The Monte Carlo layer cross-validates the two at desk scale.
"""

from .ensembles import (
    ComplexPolynomial,
    EnsembleError,
    EnsembleSpec,
    KernelEntries,
    conditional_variance,
    evaluate,
    kernel_entries,
    rotate_coefficients,
    sample,
    variance_weights,
)
from .geometry import (
    CertificateParameterError,
    DegeneratePolynomialError,
    GiantOutcome,
    GridConfig,
    LevelSetCurve,
    RootConvergenceError,
    arc_length,
    betti0,
    bounding_radius,
    component_enclosing,
    extract_in_window,
    extract_lemniscate,
    giant_event,
    points_in_polygon,
    roots,
    taylor_certificate,
)
from .montecarlo import (
    ExperimentConfig,
    ExperimentError,
    SummaryStats,
    TrialRecord,
    derive_trial_seed,
    outlier_tail_estimate,
    run_components_experiment,
    run_giant_experiment,
    run_length_experiment,
    wilson_interval,
)
from .theory import (
    LengthEstimate,
    QuadratureConfig,
    abs_real_moment,
    annulus_zero_count_reference,
    erf,
    expected_length,
    kac_limit_constant,
    kostlan_limit_constant,
    length_integrand,
    weyl_limit_constant,
)

__version__ = "0.1.0"

__all__ = [
    "ComplexPolynomial",
    "EnsembleError",
    "EnsembleSpec",
    "KernelEntries",
    "conditional_variance",
    "evaluate",
    "kernel_entries",
    "rotate_coefficients",
    "sample",
    "variance_weights",
    "CertificateParameterError",
    "DegeneratePolynomialError",
    "GiantOutcome",
    "GridConfig",
    "LevelSetCurve",
    "RootConvergenceError",
    "arc_length",
    "betti0",
    "bounding_radius",
    "component_enclosing",
    "extract_in_window",
    "extract_lemniscate",
    "giant_event",
    "points_in_polygon",
    "roots",
    "taylor_certificate",
    "ExperimentConfig",
    "ExperimentError",
    "SummaryStats",
    "TrialRecord",
    "derive_trial_seed",
    "outlier_tail_estimate",
    "run_components_experiment",
    "run_giant_experiment",
    "run_length_experiment",
    "wilson_interval",
    "LengthEstimate",
    "QuadratureConfig",
    "abs_real_moment",
    "annulus_zero_count_reference",
    "erf",
    "expected_length",
    "kac_limit_constant",
    "kostlan_limit_constant",
    "length_integrand",
    "weyl_limit_constant",
    "__version__",
]
