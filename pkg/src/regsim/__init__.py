"""regsim: randomized shared-memory consensus over weak registers, simulated
deterministically and checked mechanically.

The package provides faithful operational models of atomic, regular, and
linearizable single-writer registers, the consensus protocol as a fine-grained
state machine, strong-adversary schedulers, a monitor suite that checks every
claimed trace property, a bounded exhaustive explorer, and a seeded Monte
Carlo harness.
"""

from .core import (
    BOT,
    INITIAL_VALUE,
    PENDING,
    EventKind,
    OpInterval,
    RegisterValue,
    SystemConfig,
    Trace,
    TraceEvent,
    Verdict,
    complement,
    concurrent,
    parse_trace,
    precedes,
    serialize_trace,
)
from .registers import (
    IllegalChoiceError,
    LinearizationOrder,
    OrderViolationError,
    RegisterState,
    WriteRecord,
    check_regular,
    legal_read_values,
    linearize_next,
    respond_read,
)
from .protocol import (
    Action,
    Phase,
    ProcessState,
    evaluate,
    init_process,
    leaders,
    leaders_agree,
    next_pending_read_target,
)
from .system import FairCoin, ScheduleChoice, SystemState
from .adversary import (
    ADVERSARIES,
    GENERIC_ADVERSARIES,
    AdversaryContext,
    AdversaryFaultError,
    ScenarioBrokenError,
    crash_policy,
    make_adversary,
)
from .monitors import run_standard_monitors, violations
from .explorer import BoundTooLargeError, ExplorationConfig, ExplorationReport, explore
from .harness import (
    AttackReport,
    ForcedCoinSummary,
    OracleCoin,
    RunStats,
    attack_demo,
    clopper_pearson_lower,
    forced_coin_experiment,
    run_campaign,
    run_once,
)

__version__ = "0.1.0"

__all__ = [
    "ADVERSARIES",
    "AttackReport",
    "Action",
    "AdversaryContext",
    "AdversaryFaultError",
    "BOT",
    "BoundTooLargeError",
    "EventKind",
    "ExplorationConfig",
    "ExplorationReport",
    "FairCoin",
    "ForcedCoinSummary",
    "GENERIC_ADVERSARIES",
    "INITIAL_VALUE",
    "IllegalChoiceError",
    "LinearizationOrder",
    "OpInterval",
    "OracleCoin",
    "OrderViolationError",
    "PENDING",
    "Phase",
    "ProcessState",
    "RegisterState",
    "RegisterValue",
    "RunStats",
    "ScenarioBrokenError",
    "ScheduleChoice",
    "SystemConfig",
    "SystemState",
    "Trace",
    "TraceEvent",
    "Verdict",
    "WriteRecord",
    "attack_demo",
    "check_regular",
    "clopper_pearson_lower",
    "complement",
    "concurrent",
    "crash_policy",
    "evaluate",
    "explore",
    "forced_coin_experiment",
    "init_process",
    "leaders",
    "leaders_agree",
    "legal_read_values",
    "linearize_next",
    "make_adversary",
    "next_pending_read_target",
    "parse_trace",
    "precedes",
    "respond_read",
    "run_campaign",
    "run_once",
    "run_standard_monitors",
    "serialize_trace",
    "violations",
]
