"""IEEE 802.11 DCF backoff strategies, a slotted simulator and sweep tooling."""
from .analytic import (
    Equilibrium,
    EquilibriumNotConverged,
    StageProfile,
    analytic_saturation_throughput,
    r_heavy,
    r_light,
    solve_equilibrium,
    stage_profile,
)
from .backoff import (
    BackoffParams,
    BackoffState,
    ContractViolation,
    StrategyKind,
    on_collision,
    on_success,
    sample_backoff,
    stage_cw_table,
)
from .metrics import (
    DelayLedger,
    RunMetrics,
    UndefinedMetric,
    avg_transmission_delay_us,
    normalized_throughput,
    total_delay_us,
)
from .phy import PhyParams, tx_time_collision_us, tx_time_success_us
from .sim import SimConfig, SlotKind, SlotOutcome, Station, TrafficModel, World, run, step
from .sweep import ResultRow, SweepSpec, emit, load_config, preset, run_sweep

__version__ = "0.1.0"
