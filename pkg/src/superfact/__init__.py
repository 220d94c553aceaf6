"""superfact: factorized classical superintegrable oscillators.

Three Hamiltonian families (anisotropic oscillator on the plane and on the
sphere, and the TTW system) share one construction: each separated sector
factorizes through conjugate ladder/shift pairs whose products assemble, for
a rational frequency ratio, into higher-order constants of motion.  This
package evaluates those factor functions with exact dual-number derivatives,
certifies every bracket and factorization identity numerically on random
phase points, integrates trajectories with conservation monitoring, and
detects the closed orbits that rational ratios produce.
"""

from .errors import (
    DomainBreach,
    DomainError,
    InsufficientSpan,
    NoSolution,
    PositivityError,
    SamplerExhausted,
    StepFailure,
    SuperfactError,
    UnsupportedError,
)
from .scalars import DualComplex
from .phase import (
    COORDS,
    RANK_TOL,
    Observable,
    PhaseBatch,
    PhasePoint,
    bracket_batch,
    bracket_observable,
    eval_batch,
    gradient,
    gradient_batch,
    jacobian_rank,
    partial_derivative,
    poisson_bracket,
)
from .systems import (
    DELTA_MARGIN,
    DELTA_POS,
    DomainBox,
    DomainVerdict,
    Family,
    RationalGamma,
    SystemSpec,
    characteristic_period,
    default_box,
    domain_check,
    epsilon,
    epsilon_observable,
    euclid_y_sector_observable,
    geodesic_polar,
    hamiltonian,
    hamiltonian_observable,
    higgs_potential_identity,
    second_integral,
    second_integral_observable,
    to_external,
    to_internal,
)
from .factorization import (
    FactorValue,
    IntegralPair,
    TtwShift,
    higher_integral,
    higher_integral_observables,
    ladder,
    ladder_observables,
    shift,
    shift_observables,
    shift_ttw,
    sphere_ladder_target_observable,
    ttw_shift_observables,
)
from .dynamics import (
    ClosureResult,
    DriftEntry,
    DriftReport,
    IntegratorControls,
    Trajectory,
    detect_closure,
    drift_report,
    hamilton_rhs,
    integrate,
)
from .verification import (
    REPORT_SCHEMA,
    TOL_CHAIN,
    TOL_HIGH_ORDER,
    TOL_POLY,
    TOL_ROOT,
    BracketReport,
    IdentityResult,
    IdentitySpec,
    build_suite,
    independence_report,
    run_identity,
    run_suite,
    sample_points,
    symmetry_tolerance,
    verify_system,
)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    # errors
    "SuperfactError",
    "DomainError",
    "PositivityError",
    "UnsupportedError",
    "SamplerExhausted",
    "DomainBreach",
    "StepFailure",
    "InsufficientSpan",
    "NoSolution",
    # scalars and phase-space core
    "DualComplex",
    "COORDS",
    "RANK_TOL",
    "PhasePoint",
    "PhaseBatch",
    "Observable",
    "partial_derivative",
    "poisson_bracket",
    "bracket_observable",
    "gradient",
    "eval_batch",
    "gradient_batch",
    "bracket_batch",
    "jacobian_rank",
    # systems
    "Family",
    "RationalGamma",
    "SystemSpec",
    "DomainBox",
    "DomainVerdict",
    "DELTA_MARGIN",
    "DELTA_POS",
    "domain_check",
    "to_internal",
    "to_external",
    "geodesic_polar",
    "hamiltonian",
    "hamiltonian_observable",
    "second_integral",
    "second_integral_observable",
    "euclid_y_sector_observable",
    "epsilon",
    "epsilon_observable",
    "higgs_potential_identity",
    "characteristic_period",
    "default_box",
    # factorization
    "FactorValue",
    "TtwShift",
    "IntegralPair",
    "ladder",
    "ladder_observables",
    "shift",
    "shift_observables",
    "shift_ttw",
    "ttw_shift_observables",
    "sphere_ladder_target_observable",
    "higher_integral",
    "higher_integral_observables",
    # dynamics
    "IntegratorControls",
    "Trajectory",
    "DriftEntry",
    "DriftReport",
    "ClosureResult",
    "hamilton_rhs",
    "integrate",
    "drift_report",
    "detect_closure",
    # verification
    "IdentitySpec",
    "IdentityResult",
    "BracketReport",
    "REPORT_SCHEMA",
    "TOL_POLY",
    "TOL_ROOT",
    "TOL_CHAIN",
    "TOL_HIGH_ORDER",
    "symmetry_tolerance",
    "build_suite",
    "run_identity",
    "run_suite",
    "sample_points",
    "verify_system",
    "independence_report",
]
