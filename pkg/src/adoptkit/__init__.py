"""adoptkit: two-component adoption-curve analysis.

Phase analysis and closed-form sensitivities, nonlinear least-squares fitting
with delta-method / profile / bootstrap uncertainty, Fisher information and
profiled CRLBs under four observation models, residual diagnostics and
non-nested model comparison, task-level adoption economics, and a seeded
Monte-Carlo benchmark.
"""

from .curves import (
    ComparatorParams,
    Family,
    PhaseKind,
    PhaseReport,
    ThetaTwoComp,
    classify_phase,
    critical_time,
    eval_curve,
    gradient_theta,
    monotone_condition,
    tstar_sensitivities,
)
from .estimate import (
    FitReport,
    TimeSeries,
    WindowSpec,
    delta_ci_tstar,
    embedding_gradient,
    estimate_hprime0,
    fit_nls,
    identify_from_moments,
    prepost_delta_beta,
    profile_ci_tstar,
)
from .fisher import (
    BinomialCounts,
    CrlbCheck,
    GaussianAr1,
    GaussianIid,
    InfoReport,
    PoissonCounts,
    crlb_check,
    design_compare,
    gradient_matrix,
    info_matrix,
)
from .infer import (
    TestResult,
    breusch_pagan,
    constrained_lr,
    durbin_watson,
    shape_test,
    vuong,
)
from .econ import (
    Task,
    TaskEconomy,
    ThresholdReport,
    agency_threshold,
    beta_from_hazard,
    friction_calibration,
    friction_expectation,
    hazard_hprime0,
    micro_n0,
    micro_umax,
    preference_probability,
    task_utility,
    threshold_uncertainty,
    utility_reliability_gradient,
)
from .simgen import (
    BenchmarkReport,
    PilotConfig,
    ScenarioGrid,
    gen_series,
    pilot_sim,
    run_benchmark,
    theta_for_depth,
    trough_depth,
)

__version__ = "0.1.0"
