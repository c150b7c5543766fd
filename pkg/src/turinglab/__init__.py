"""Turing instability analysis for two-component reaction-diffusion systems.

Linear stability and instability windows, critical diffusion parameters,
center-manifold reduction with transition classification, and a
finite-difference simulator for validation.
"""

from .errors import (
    BracketFailureError,
    ConvergenceError,
    CrossingNotBracketedError,
    DegeneratePairingError,
    FixedPointSearchError,
    InputError,
    InvalidParameterError,
    KineticsUnstableError,
    ModelFileError,
    NoCriticalValueError,
    NonlinearContaminationError,
    NotSaturatedError,
    NumericalError,
    PesViolationError,
    SingularModeMatrixError,
    TuringLabError,
)
from .kinetics import (
    KineticModel,
    SchnakenbergParams,
    custom_model,
    evaluate_kinetics,
    schnakenberg_model,
)
from .reduction import (
    BifurcatedState,
    Classification,
    CriticalModeData,
    CubicResult,
    PlanarCoefficients,
    ReducedSystem,
    bifurcated_state,
    classify_transition,
    critical_eigendata,
    cubic_coefficient_Q,
    planar_coefficients,
    quadratic_coefficient_P,
    reduce_at_criticality,
)
from .simulator import (
    AmplitudeFit,
    RunResult,
    SimulationConfig,
    amplitude_fit,
    growth_rate_probe,
    run,
)
from .spectrum import (
    DomainSpec,
    ModeMatrix,
    SpectralMode,
    critical_vectors,
    eigenfunction,
    eigenpairs,
    mode_for_indices,
    mode_matrix,
    product_integral,
)
from .stability import (
    CriticalParams,
    PesCertificate,
    ReferenceAudit,
    StabilityReport,
    check_pes,
    critical_dv,
    dispersion,
    h_profile,
    instability_window,
    per_mode_threshold,
    schnakenberg_critical_d,
    schnakenberg_reference_audit,
    turing_verdict,
)

__version__ = "0.1.0"

__all__ = [
    "AmplitudeFit",
    "BifurcatedState",
    "BracketFailureError",
    "Classification",
    "ConvergenceError",
    "CriticalModeData",
    "CriticalParams",
    "CrossingNotBracketedError",
    "CubicResult",
    "DegeneratePairingError",
    "DomainSpec",
    "FixedPointSearchError",
    "InputError",
    "InvalidParameterError",
    "KineticModel",
    "KineticsUnstableError",
    "ModeMatrix",
    "ModelFileError",
    "NoCriticalValueError",
    "NonlinearContaminationError",
    "NotSaturatedError",
    "NumericalError",
    "PesCertificate",
    "PesViolationError",
    "PlanarCoefficients",
    "ReducedSystem",
    "ReferenceAudit",
    "RunResult",
    "SchnakenbergParams",
    "SimulationConfig",
    "SingularModeMatrixError",
    "SpectralMode",
    "StabilityReport",
    "TuringLabError",
    "amplitude_fit",
    "bifurcated_state",
    "check_pes",
    "classify_transition",
    "critical_dv",
    "critical_eigendata",
    "critical_vectors",
    "cubic_coefficient_Q",
    "custom_model",
    "dispersion",
    "eigenfunction",
    "eigenpairs",
    "evaluate_kinetics",
    "growth_rate_probe",
    "h_profile",
    "instability_window",
    "mode_for_indices",
    "mode_matrix",
    "per_mode_threshold",
    "planar_coefficients",
    "product_integral",
    "quadratic_coefficient_P",
    "reduce_at_criticality",
    "run",
    "schnakenberg_critical_d",
    "schnakenberg_model",
    "schnakenberg_reference_audit",
    "turing_verdict",
]
