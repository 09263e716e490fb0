"""mustab: exact stability workbench for self-maps of finite metric spaces.

Distances, weights and thresholds are exact rationals; every notion of
stability, shadowing and expansivity here is decided, not approximated.
"""

from .core import (
    DEFAULT_BUDGET,
    EndoMap,
    FiniteMetricSpace,
    Measure,
    ThresholdGrid,
    abs_continuity_witness,
    ac_threshold,
    atoms,
    c0_distance,
    convex_combine,
    enumerate_perturbations,
    exact,
    is_abs_continuous,
    perturbation_count,
    pushforward,
    render_rational,
    sample_perturbations,
    subset_masses,
    validate_space,
)
from .conjugacy import (
    Lasso,
    PartialMap,
    SemiconjugacyCertificate,
    VerificationResult,
    build_semiconjugacy,
    orbit_closure,
    orbit_lasso,
    shadow_point,
    verify_semiconjugacy,
)
from .expansivity import (
    SeparationMatrix,
    default_expansivity_constant,
    expansivity_threshold,
    is_measure_expansive,
    measure_expansivity_witness,
    separation_matrix,
    uniform_expansivity_steps,
)
from .shadowing import (
    MODE_ALL,
    MODE_FULL,
    MODE_WEAK,
    SHADOWING_MODES,
    exact_oracle_bound,
    lasso_oracle,
    shadowable_start_set,
    shadowing_delta,
)
from .stability import (
    MeasureTarget,
    PointTarget,
    ProfileRow,
    SetValuedMap,
    SetValuedTarget,
    StabilityDelta,
    StabilityProfile,
    THEOREM_ITEMS,
    TheoremReport,
    isolated_point_system,
    setvalued_from_partial,
    stability_delta,
    stability_profile,
    theorem_check,
)
from .systems import (
    GeneratorSpec,
    SystemFile,
    generate_system,
    load_system,
    parse_system,
    render_system,
    save_system,
)
from . import errors

__version__ = "0.1.0"

__all__ = [
    "DEFAULT_BUDGET",
    "EndoMap",
    "FiniteMetricSpace",
    "GeneratorSpec",
    "Lasso",
    "MODE_ALL",
    "MODE_FULL",
    "MODE_WEAK",
    "Measure",
    "MeasureTarget",
    "PartialMap",
    "PointTarget",
    "ProfileRow",
    "SHADOWING_MODES",
    "SemiconjugacyCertificate",
    "SeparationMatrix",
    "SetValuedMap",
    "SetValuedTarget",
    "StabilityDelta",
    "StabilityProfile",
    "SystemFile",
    "THEOREM_ITEMS",
    "TheoremReport",
    "ThresholdGrid",
    "VerificationResult",
    "abs_continuity_witness",
    "ac_threshold",
    "atoms",
    "build_semiconjugacy",
    "c0_distance",
    "convex_combine",
    "default_expansivity_constant",
    "enumerate_perturbations",
    "errors",
    "exact",
    "exact_oracle_bound",
    "expansivity_threshold",
    "generate_system",
    "is_abs_continuous",
    "is_measure_expansive",
    "isolated_point_system",
    "lasso_oracle",
    "load_system",
    "measure_expansivity_witness",
    "orbit_closure",
    "orbit_lasso",
    "parse_system",
    "perturbation_count",
    "pushforward",
    "render_rational",
    "render_system",
    "sample_perturbations",
    "save_system",
    "separation_matrix",
    "setvalued_from_partial",
    "shadow_point",
    "shadowable_start_set",
    "shadowing_delta",
    "stability_delta",
    "stability_profile",
    "subset_masses",
    "theorem_check",
    "uniform_expansivity_steps",
    "validate_space",
    "verify_semiconjugacy",
]
