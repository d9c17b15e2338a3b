"""Bounded exhaustive exploration of adversary choices and coin outcomes.

Depth-first enumeration of the schedule-choice tree for small systems: at
every reachable state the explorer branches over each enabled fire/commit/
crash choice, over every legal value of a regular read response, and over both
outcomes of every coin flip. Safety (validity, agreement, and the decided
round being uncontested) is evaluated as a state predicate at every node, so
memoization on a canonicalized state hash prunes re-visits without losing
violations; with memoization off, every complete execution additionally runs
the full monitor suite over its trace.

The line-3 read order is fixed to ascending pid here: read-order permutations
are an adversary-interface input rather than a schedule choice, and the
branch points enumerated are exactly the schedule choices, legal read values,
linearization commitments, and coin outcomes.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .core import SystemConfig, Trace, complement
from .monitors import run_standard_monitors, violations
from .system import FIRE_INVOKE, ScheduleChoice, SystemState, ascending_read_order
from .protocol import Phase

GOALS = ("new_old_inversion",)


class BoundTooLargeError(RuntimeError):
    """The exploration exceeded its configured node budget."""


@dataclass(frozen=True, slots=True)
class ExplorationConfig:
    n: int
    proposals: tuple[int, ...]
    model: str = "regular"
    max_events: int = 200
    round_cap: int = 4
    crash_budget: int = 0
    search_goal: str | None = None
    memoize: bool = True
    stop_on_witness: bool = True
    node_budget: int = 5_000_000
    keep_traces: int = 10
    collect_complete: bool = False

    def __post_init__(self) -> None:
        if self.n < 1 or self.max_events < 1:
            raise ValueError("n and max_events must be at least 1")
        if self.search_goal is not None and self.search_goal not in GOALS:
            raise ValueError(f"unknown search goal {self.search_goal!r}")

    def system_config(self) -> SystemConfig:
        return SystemConfig(
            n=self.n,
            proposals=self.proposals,
            model=self.model,
            adversary="explorer",
            seed=0,
            max_events=self.max_events,
            crash_budget=self.crash_budget,
        )


@dataclass(slots=True)
class ExplorationReport:
    executions_explored: int = 0
    truncated: int = 0
    nodes: int = 0
    unique_states: int = 0
    violations: list[tuple[str, Trace]] = field(default_factory=list)
    witnesses: list[tuple[str, Trace]] = field(default_factory=list)
    violation_counts: dict[str, int] = field(default_factory=dict)
    witness_count: int = 0
    complete_traces: list[Trace] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violation_counts


def _canonical_key(state: SystemState) -> tuple:
    """Hashable state summary, independent of absolute event indexes.

    Pending reads are summarized by the ordinal of the last write completed
    before their invocation, which determines their future legal sets.
    """
    procs = tuple(
        (
            proc.phase.value,
            proc.pending_value,
            proc.pending_line,
            proc.read_pos,
            tuple(sorted(proc.view.items())),
            proc.captured,
            proc.decided,
        )
        for proc in state.processes
    )
    regs = []
    for reg in state.registers:
        writes = tuple((w.value.prefer, w.value.round) for w in reg.writes)
        completed = sum(1 for w in reg.writes if w.respond_time is not None)
        pending = []
        for reader, invoke_seq in reg.pending_reads.items():
            base = 0
            for w in reg.writes:
                if w.respond_time is not None and w.respond_time < invoke_seq:
                    base = w.writer_seq
            pending.append((reader, base))
        regs.append((writes, completed, reg.committed, tuple(sorted(pending))))
    inversion = tuple(tuple(row) for row in state.max_returned)
    return (procs, tuple(regs), inversion, state.crashes_used)


def _state_safety_violations(state: SystemState) -> list[str]:
    """Safety predicates over a state: wrong-value or conflicting decisions,
    and a decided round contested by the opposite value."""
    out = []
    decided = state.decided_values()
    if not decided:
        return out
    proposals = set(state.config.proposals)
    values = {val.prefer for val in decided.values()}
    if any(v not in proposals for v in values):
        out.append("validity")
    if len(values) > 1:
        out.append("agreement")
    invoked = {
        (w.value.prefer, w.value.round)
        for reg in state.registers
        for w in reg.writes
    }
    for val in decided.values():
        if (complement(val.prefer), val.round) in invoked:
            out.append("decision_round_uncontested")
            break
    return out


def _next_write_round(state: SystemState, choice: ScheduleChoice) -> int | None:
    """The round the choice is about to invoke, if it invokes a write."""
    if choice.kind != FIRE_INVOKE:
        return None
    proc = state.processes[choice.pid]
    if proc.phase is not Phase.WRITE_INVOKE:
        return None
    return proc.pending_value.round


def _replay_trace(cfg: ExplorationConfig, path: tuple | None) -> Trace:
    """Rebuild the trace of a path (a linked (prev, choice, coin) chain)."""
    steps = []
    while path is not None:
        prev, choice, coin = path
        steps.append((choice, coin))
        path = prev
    steps.reverse()
    state = SystemState(cfg.system_config())
    for choice, coin in steps:
        state.apply(choice, coin=coin, read_orders=ascending_read_order)
    return state.trace()


def explore(cfg: ExplorationConfig) -> ExplorationReport:
    """Enumerate the bounded choice tree and aggregate safety results."""
    report = ExplorationReport()
    root = SystemState(cfg.system_config(), record_events=False)
    seen: set[tuple] = set()
    if cfg.memoize:
        seen.add(_canonical_key(root))
    # Stack of (state, path); paths are linked (prev, choice, coin) chains so
    # witness traces can be replayed without copying event lists per node.
    stack: list[tuple[SystemState, tuple | None]] = [(root, None)]
    goal = cfg.search_goal

    def record_violation(name: str, path: tuple | None) -> None:
        report.violation_counts[name] = report.violation_counts.get(name, 0) + 1
        if len(report.violations) < cfg.keep_traces:
            report.violations.append((name, _replay_trace(cfg, path)))

    def record_witness(path: tuple | None) -> None:
        report.witness_count += 1
        if len(report.witnesses) < cfg.keep_traces:
            report.witnesses.append((goal, _replay_trace(cfg, path)))

    while stack:
        state, path = stack.pop()
        report.nodes += 1
        if report.nodes > cfg.node_budget:
            raise BoundTooLargeError(
                f"exploration exceeded the node budget of {cfg.node_budget}"
            )
        choices = state.enabled_choices()
        if not choices:
            report.executions_explored += 1
            if cfg.collect_complete and len(report.complete_traces) < cfg.keep_traces:
                report.complete_traces.append(_replay_trace(cfg, path))
            if not cfg.memoize:
                for verdict in violations(run_standard_monitors(_replay_trace(cfg, path))):
                    record_violation(verdict.name, path)
            continue
        if state.clock >= cfg.max_events:
            report.truncated += 1
            continue
        for choice in reversed(choices):
            invoke_round = _next_write_round(state, choice)
            if invoke_round is not None and invoke_round > cfg.round_cap:
                report.truncated += 1
                continue
            coins = (0, 1) if state.flips_coin(choice) else (None,)
            for coin in coins:
                child = state.copy()
                child.apply(choice, coin=coin, read_orders=ascending_read_order)
                child_path = (path, choice, coin)
                broken = _state_safety_violations(child)
                if broken:
                    for name in broken:
                        record_violation(name, child_path)
                    continue  # descendants only repeat the same violation
                if goal == "new_old_inversion" and child.inversion_hits:
                    record_witness(child_path)
                    if cfg.stop_on_witness:
                        report.unique_states = len(seen)
                        return report
                    continue  # a found branch need not be expanded further
                if cfg.memoize:
                    key = _canonical_key(child)
                    if key in seen:
                        continue
                    seen.add(key)
                stack.append((child, child_path))
    report.unique_states = len(seen)
    return report
