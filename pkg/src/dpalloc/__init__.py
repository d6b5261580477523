"""Privacy-aware multi-party shared-resource allocation via dual decomposition."""

from .bounds import BoundInputs, approx_bound, bound_inputs_from_instance, pure_bound
from .coordinator import (
    AllotmentMessage,
    Constant,
    Diminishing,
    DualState,
    IterateRecord,
    Mode,
    PartyAgent,
    PriceMessage,
    RunSummary,
    RunTrace,
    TheoremConstant,
    dual_update,
    run,
    step_length,
    summarize,
    theorem_B,
    theorem_step,
    trace_csv_text,
    write_message_log,
    write_summary_json,
    write_trace_csv,
)
from .lp import (
    LpError,
    LpNumericalError,
    LpProblem,
    LpSolution,
    LpStatus,
    PreparedLp,
    extract_duals,
    solve_lp,
)
from .model import (
    AllotmentBundle,
    Instance,
    PartyData,
    ValidationReport,
    instance_from_json,
    instance_to_json,
    load_instance,
    save_instance,
    sensitivity,
    total_utility,
    validate_instance,
)
from .oracle import (
    CentralizedSolution,
    DualLpSolution,
    InfeasibleInstanceError,
    UnboundedInstanceError,
    distance_M,
    solve_centralized,
    solve_dual_lp,
    solve_original,
)
from .privacy import (
    BudgetLedger,
    NoiseStream,
    PrivacyBudgetExhausted,
    PrivacyConfig,
    Regime,
    approx_scale,
    party_noise_scale,
    privacy_spent,
    pure_scale,
    sample_laplace,
)
from .subproblem import (
    PartyInfeasibleError,
    PartySolver,
    PartyUnboundedError,
    SubproblemResult,
    build_subproblem,
    perturb_allotment,
    solve_subproblem,
)
from .synthgen import GenParams, attach_demands, generate, scenario_bounds

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
