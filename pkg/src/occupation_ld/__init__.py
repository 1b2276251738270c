"""Occupation-time large deviations for finite-state Markov models."""
from .chain import (
    ChainModel,
    IrreducibilityReport,
    ModelError,
    ProbMeasure,
    StateSet,
    build_model,
    check_condition_114,
    check_invariance,
    check_mutual_reachability,
    check_reversibility,
    is_abs_continuous,
    resolvent,
    semigroup,
)
from .entropy import MarkovSource, contraction_rate, entropy_rate, verify_optimal_kernel
from .feynman_kac import (
    TiltSpec,
    build_tilt,
    construct_D1_element,
    fk_identity_check,
    tilted_contraction_check,
    tilted_invariance_check,
    tilted_semigroup,
)
from .rate import (
    OptimizerOptions,
    RateResult,
    RouteError,
    dirichlet_form,
    dv_rate_continuous,
    dv_rate_discrete,
    lemma57_check,
    limit_check,
    rate_h,
    rate_hat,
    rate_I,
    skeleton_dirichlet_check,
    spectral_rate,
)
from .simulate import (
    EventError,
    OccupationLaw,
    PathSample,
    TauNeighborhood,
    ThresholdEvent,
    bound_audit,
    decay_slope,
    empirical_measure,
    in_neighborhood,
    mc_probability,
    occupation_law_exact,
    sample_path,
    threshold_audit,
    threshold_rate,
    tilted_importance_sampler,
)
from .thinset import (
    example35_scenario,
    isolated_point_model,
    isolated_point_scenario,
    null_states,
    thin_closure,
    thin_set,
)

__version__ = "0.1.0"
