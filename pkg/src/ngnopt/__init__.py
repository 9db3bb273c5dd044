"""NGN step-size optimizers, test objectives, theory bounds, audits, and
a sweep harness for desk-scale stability studies."""

from .problems import (
    KIND_LEAST_SQUARES,
    KIND_MULTIMODAL,
    KIND_POLYNOMIAL,
    KIND_REGRESSION,
    KIND_RIDGE,
    KIND_ROSENBROCK,
    PROBLEM_KINDS,
    Batch,
    ObjectiveMetadata,
    ProblemSpec,
    StepSample,
    StochasticObjective,
    build_problem,
    evaluate,
    finite_diff_grad,
    least_squares_problem,
    sample_batch,
)
from .optimizers import (
    ADAM,
    DEC_NGN_MDV1,
    NGN,
    NGN_D,
    NGN_M_V1,
    NGN_M_V2,
    NGN_MD_V1,
    NGN_MD_V2,
    NGN_MDV1W,
    OPTIMIZER_KINDS,
    SCHEDULE_CONSTANT,
    SCHEDULE_INV_SQRT_K,
    SCHEDULE_INV_SQRT_STEP,
    SCHEDULES,
    SGDM,
    OptimizerSpec,
    OptimizerState,
    StepReport,
    apply_step,
    init_state,
    ngn_gamma,
    precond_update,
    schedule_c,
)
from .theory import (
    MODE_NONCONVEX,
    MODE_PL,
    TheoryInputs,
    decaying_weights,
    estimate_sigmas,
    gammahat_range,
    ngn_d_bound,
    ngn_m_bound,
    ngn_m_bound_decaying,
    ngn_m_params,
)
from .harness import (
    STATUS_BUDGET,
    STATUS_CONVERGED,
    STATUS_DIVERGED,
    STATUS_ERROR,
    ConfigError,
    RunBudget,
    RunRecord,
    SweepResult,
    SweepSpec,
    cli,
    emit_csv,
    main,
    make_optimizer_spec,
    parse_config,
    parse_summary_csv,
    parse_trajectory_csv,
    resolve_out_path,
    run_once,
    run_sweep,
)
from .verify import (
    AuditReport,
    audit_fundamental_equality,
    audit_ima_equivalence,
    audit_reductions,
    audit_stepsize_bounds,
    audit_theorem_bound,
    audits_to_csv,
    multimodal_global_basin,
    run_default_audits,
)

__version__ = "0.1.0"

__all__ = [
    "ADAM", "AuditReport", "Batch", "ConfigError", "DEC_NGN_MDV1",
    "KIND_LEAST_SQUARES", "KIND_MULTIMODAL", "KIND_POLYNOMIAL",
    "KIND_REGRESSION", "KIND_RIDGE", "KIND_ROSENBROCK", "MODE_NONCONVEX",
    "MODE_PL", "NGN", "NGN_D", "NGN_M_V1", "NGN_M_V2", "NGN_MD_V1",
    "NGN_MD_V2", "NGN_MDV1W", "OPTIMIZER_KINDS", "ObjectiveMetadata",
    "OptimizerSpec", "OptimizerState", "PROBLEM_KINDS", "ProblemSpec",
    "RunBudget", "RunRecord", "SCHEDULES", "SCHEDULE_CONSTANT",
    "SCHEDULE_INV_SQRT_K", "SCHEDULE_INV_SQRT_STEP", "SGDM",
    "STATUS_BUDGET", "STATUS_CONVERGED", "STATUS_DIVERGED", "STATUS_ERROR",
    "StepReport", "StepSample", "StochasticObjective", "SweepResult",
    "SweepSpec", "TheoryInputs", "apply_step", "audit_fundamental_equality",
    "audit_ima_equivalence", "audit_reductions", "audit_stepsize_bounds",
    "audit_theorem_bound", "audits_to_csv", "build_problem", "cli",
    "decaying_weights", "emit_csv", "estimate_sigmas", "evaluate",
    "finite_diff_grad", "gammahat_range", "init_state",
    "least_squares_problem", "main", "make_optimizer_spec",
    "multimodal_global_basin", "ngn_d_bound", "ngn_gamma", "ngn_m_bound",
    "ngn_m_bound_decaying", "ngn_m_params", "parse_config",
    "parse_summary_csv", "parse_trajectory_csv", "precond_update",
    "resolve_out_path", "run_default_audits", "run_once", "run_sweep",
    "sample_batch", "schedule_c",
]
