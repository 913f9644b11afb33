"""Sparse rank-based choice models fitted by distance minimization.

A choice model here is a probability distribution over full preference
rankings of ``n`` items (item 1 is the no-buy option).  Given observed
choice frequencies on a collection of assortments, the fitting routines
find a sparse distribution whose predicted frequencies are close in a
chosen distance: :func:`fw_run` runs projection-free conditional-gradient
steps for the smooth squared-Euclidean objective, and :func:`dual_run`
runs a regret-minimizing dual ascent for the norm objectives, returning a
computable optimality certificate.  Both rely on an exact combinatorial
oracle (:func:`solve_bnb`) for the linear subproblem over rankings.
"""

from .distances import (
    DISTANCE_KINDS,
    Distance,
    L1Distance,
    L2Distance,
    LinfDistance,
    SquaredL2Distance,
    WeightedKLDivergence,
    curvature_probe,
    make_distance,
    project_l1_ball,
)
from .estimators import FrankWolfeEstimator, MirrorDescentEstimator
from .fitting import FitResult, static_source
from .frank_wolfe import fw_run, fw_step
from .instance import (
    NO_BUY,
    EmpiricalStats,
    Instance,
    SparseModel,
    build_instance,
    check_choice_vector,
    empirical_probs,
    mae,
    predict,
    record_observations,
    validate_ranking,
    vertex,
)
from .io import (
    load_choice_vector,
    load_cost_vector,
    load_instance,
    load_mixed_mnl,
    load_model,
    load_observations,
    save_choice_vector,
    save_cost_vector,
    save_instance,
    save_mixed_mnl,
    save_model,
    save_observations,
    write_csv,
)
from .mirror_descent import (
    DualCertificate,
    DualState,
    default_grad_bound,
    dual_run,
    dual_step,
    new_state,
    regret_certificate,
)
from .oracle import OracleResult, export_ip, solve, solve_bnb, solve_enum
from .simulate import (
    MixedMNL,
    StreamConfig,
    draw_observation,
    exact_choice_vector,
    gen_mmnl,
    make_data_source,
    mmnl_probs,
    replayed_source,
    sample_assortments,
)

__version__ = "0.1.0"

__all__ = [
    "DISTANCE_KINDS",
    "Distance",
    "DualCertificate",
    "DualState",
    "EmpiricalStats",
    "FitResult",
    "FrankWolfeEstimator",
    "Instance",
    "L1Distance",
    "L2Distance",
    "LinfDistance",
    "MirrorDescentEstimator",
    "MixedMNL",
    "NO_BUY",
    "OracleResult",
    "SparseModel",
    "SquaredL2Distance",
    "StreamConfig",
    "WeightedKLDivergence",
    "build_instance",
    "check_choice_vector",
    "curvature_probe",
    "draw_observation",
    "default_grad_bound",
    "dual_run",
    "dual_step",
    "empirical_probs",
    "exact_choice_vector",
    "export_ip",
    "fw_run",
    "fw_step",
    "gen_mmnl",
    "load_choice_vector",
    "load_cost_vector",
    "load_instance",
    "load_mixed_mnl",
    "load_model",
    "load_observations",
    "make_data_source",
    "make_distance",
    "mae",
    "mmnl_probs",
    "new_state",
    "predict",
    "project_l1_ball",
    "record_observations",
    "regret_certificate",
    "replayed_source",
    "sample_assortments",
    "save_choice_vector",
    "save_cost_vector",
    "save_instance",
    "save_mixed_mnl",
    "save_model",
    "save_observations",
    "solve",
    "solve_bnb",
    "solve_enum",
    "static_source",
    "validate_ranking",
    "vertex",
    "write_csv",
    "__version__",
]
