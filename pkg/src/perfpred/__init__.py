"""Performative prediction: distribution maps that react to deployed model
parameters, the retraining dynamics that chase them, and diagnostics that
certify sensitivity, contraction rates, and stable-vs-optimal closeness."""

__version__ = "0.1.0"

from .core import (
    ClosedForms,
    DimensionMismatchError,
    DistributionMap,
    Instance,
    LossConstants,
    LossSpec,
    NonFiniteLossError,
    ParameterSpace,
    PerfpredError,
    RegimeError,
    RiskEstimate,
    decoupled_risk,
    joint_smoothness_violation,
    performative_risk,
    project,
    risk_gradient,
    strong_convexity_violation,
)
from .diagnostics import (
    BruteForceResult,
    GapReport,
    SensitivityReport,
    StackelbergReport,
    brute_force_optimum,
    closeness_check,
    estimate_lipschitz_theta,
    estimate_lipschitz_z,
    estimate_sensitivity,
    stackelberg_gap,
    w1_1d,
)
from .dist_maps import MAP_CATALOG, BiasedCoinMap, GaussianFamilyMap, PointMassMap, coin_closed_forms, make_map
from .dynamics import (
    InnerSolverError,
    NoConvergenceGuarantee,
    SampleSchedule,
    SolverConfig,
    Trajectory,
    regd,
    rerm,
    retrain_once,
    rgd,
    rrm,
    save_trajectory_csv,
    save_trajectory_sidecar,
    stability_residual,
    theoretical_iteration_bound,
)
from .losses import (
    LOSS_CATALOG,
    LossCatalogEntry,
    default_hinge_scale,
    hinge_reg_loss,
    linear_loss,
    logistic_l2_loss,
    logistic_smoothness,
    make_loss,
    regularize,
    squared_loss_affine,
    squared_loss_location,
)
from .strategic import (
    CreditExperimentResult,
    InducedSample,
    StrategicDataset,
    StrategicMap,
    StrategicMapConfig,
    best_response,
    induced_distribution,
    load_dataset,
    run_credit_experiment,
    strategic_map,
    synthesize_credit_data,
)
