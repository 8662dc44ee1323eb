"""Distributed energy-sharing simulator: bandit convex optimization on prosumer networks.

Prosumer nodes share renewable generation with their neighbors while only ever
observing scalar satisfaction feedback. The library provides the network and
environment model, the primal-dual bandit learner with feasibility adjustment,
its step-size-ensemble variant for drifting workloads, a constant-parameter
baseline, full-information comparator oracles, and a deterministic simulation
harness with CSV/JSON output.
"""

from .drs import (
    AgentState,
    Box,
    ConstantSchedule,
    DrsAgent,
    DrsSchedule,
    EnsembleSchedule,
    ScheduleConstants,
    ScheduleValues,
    adjust_allocation,
    drs_round,
    estimate_direction,
    freeze_schedule,
    init_state,
    project_shrunk,
    sample_unit_vector,
    update_dual,
    update_primal,
)
from .ensemble import (
    ExpertPool,
    MansdrsAgent,
    SurrogateLoss,
    build_pool,
    combine,
    expert_step,
    initial_weights,
    mansdrs_round,
    meta_rate,
    pool_size,
    update_weights,
)
from .environment import (
    AllocationVector,
    DemandModel,
    Environment,
    GenerationProcess,
    constraint,
    loss,
    loss_discounted,
    received_totals,
    satisfaction,
)
from .harness import (
    ConfigError,
    RoundRecords,
    RunConfig,
    RunResult,
    build_dynamic_comparators,
    build_static_comparators,
    dynamic_regret,
    export_comparators_csv,
    load_config,
    run,
    satisfaction_report,
    static_regret,
    violation_total,
    write_outputs,
)
from .network import NetworkGraph, Neighborhood, build_from_edges, build_from_positions, load_edge_list, load_positions_csv
from .oracles import (
    BansapAgent,
    ComparatorSequence,
    NeighborhoodShortfall,
    NeighborhoodShortfallSum,
    best_fixed_action,
    minimize_on_box,
    path_length,
    per_round_minimizer,
)

__version__ = "0.1.0"
