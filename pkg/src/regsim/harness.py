"""Run orchestration: single runs, Monte Carlo campaigns, forced-coin
experiments, termination statistics, and the scripted linearization attack.

Every run is deterministic in (config, seed): the adversary and the coin draw
from independent streams derived from the run seed, so a trace file plus its
header reproduces verdicts identically.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

from .adversary import (
    Adversary,
    AdversaryContext,
    AdversaryFaultError,
    AppendixAttackAdversary,
    ScenarioBrokenError,
    make_adversary,
)
from .core import (
    BOT,
    EventKind,
    OpInterval,
    PENDING,
    RegisterValue,
    SystemConfig,
    Trace,
    complement,
)
from .monitors import run_standard_monitors
from .registers import LinearizableOp, LinearizationOrder, OrderViolationError
from .system import CoinSource, FairCoin, SystemState


# --------------------------------------------------------------------------
# Driving one run
# --------------------------------------------------------------------------


def _simulate(
    config: SystemConfig,
    adversary: Adversary | None = None,
    coin: CoinSource | None = None,
) -> tuple[Trace, bool]:
    """Drive one run to completion, the event cap, or adversary exhaustion.

    Returns (trace, stopped) where stopped means the adversary yielded while
    choices were still enabled (scripted schedules do this by design).
    """
    if adversary is None:
        adversary = make_adversary(config.adversary, config, config.seed)
    if coin is None:
        coin = FairCoin(config.seed)
    state = SystemState(config)
    stopped = False
    while state.clock < config.max_events:
        if not state.has_enabled_choice():
            break
        choice = adversary.choose(AdversaryContext(state))
        if choice is None:
            stopped = True
            break
        if not state.is_enabled(choice):
            raise AdversaryFaultError(f"adversary returned disabled choice {choice}")
        coin_value = None
        if state.flips_coin(choice):
            coin_value = coin.flip(state, choice.pid, state.flip_round(choice.pid))
        state.apply(choice, coin=coin_value, read_orders=adversary.read_order)
    return state.trace(), stopped


def run_once(
    config: SystemConfig,
    seed: int | None = None,
    *,
    adversary: Adversary | None = None,
    coin: CoinSource | None = None,
) -> Trace:
    """One complete, well-formed trace, deterministic in (config, seed)."""
    cfg = config if seed is None else replace(config, seed=seed)
    trace, _ = _simulate(cfg, adversary=adversary, coin=coin)
    return trace


# --------------------------------------------------------------------------
# Campaign statistics
# --------------------------------------------------------------------------


def flip_match_observations(trace: Trace) -> list[tuple[int, bool]]:
    """Per-round coin-match observations for the termination bound.

    For each round r >= 2 where some round-(r-1) write completed and at least
    one coin was flipped at round r: True iff every round-r flip equals the
    value of the first-completed round-(r-1) write.
    """
    first_completed: dict[int, int | None] = {}
    flips_by_round: dict[int, list[int]] = {}
    for ev in trace.events:
        if ev.kind is EventKind.RESPOND_WRITE:
            first_completed.setdefault(ev.value.round, ev.value.prefer)
        elif ev.kind is EventKind.FLIP:
            flips_by_round.setdefault(ev.value.round, []).append(ev.value.prefer)
    out = []
    for r, outcomes in sorted(flips_by_round.items()):
        if r < 2:
            continue
        v = first_completed.get(r - 1)
        if v is None or v is BOT:
            continue
        out.append((r, all(o == v for o in outcomes)))
    return out


def clopper_pearson_lower(successes: int, trials: int, confidence: float = 0.99) -> float:
    """Exact one-sided binomial lower confidence bound."""
    if trials <= 0:
        raise ValueError("trials must be positive")
    if successes <= 0:
        return 0.0
    if successes >= trials:
        return float((1 - confidence) ** (1 / trials))
    from scipy.stats import beta

    return float(beta.ppf(1 - confidence, successes, trials - successes + 1))


@dataclass(slots=True)
class RunStats:
    """Aggregate statistics of a seeded campaign."""

    n: int = 0
    runs: int = 0
    decided_runs: int = 0
    capped_runs: int = 0
    decision_round_histogram: dict[int, int] = field(default_factory=dict)
    match_observations: int = 0
    match_successes: int = 0
    monitor_violations: dict[str, int] = field(default_factory=dict)
    first_violation_seed: int | None = None
    traces_with_inversion: int = 0

    @property
    def epsilon_bound(self) -> float:
        return 2.0 ** (-self.n) if self.n else 0.0

    @property
    def per_round_match_frequency(self) -> float:
        if self.match_observations == 0:
            return 0.0
        return self.match_successes / self.match_observations

    def match_lower_bound(self, confidence: float = 0.99) -> float:
        if self.match_observations == 0:
            return 0.0
        return clopper_pearson_lower(self.match_successes, self.match_observations, confidence)

    def merge(self, other: "RunStats") -> "RunStats":
        if self.n and other.n and self.n != other.n:
            raise ValueError("cannot merge campaigns with different n")
        merged = RunStats(n=self.n or other.n)
        merged.runs = self.runs + other.runs
        merged.decided_runs = self.decided_runs + other.decided_runs
        merged.capped_runs = self.capped_runs + other.capped_runs
        merged.decision_round_histogram = dict(self.decision_round_histogram)
        for rnd, count in other.decision_round_histogram.items():
            merged.decision_round_histogram[rnd] = (
                merged.decision_round_histogram.get(rnd, 0) + count
            )
        merged.match_observations = self.match_observations + other.match_observations
        merged.match_successes = self.match_successes + other.match_successes
        merged.monitor_violations = dict(self.monitor_violations)
        for name, count in other.monitor_violations.items():
            merged.monitor_violations[name] = merged.monitor_violations.get(name, 0) + count
        for seed in (self.first_violation_seed, other.first_violation_seed):
            if seed is not None and (
                merged.first_violation_seed is None or seed < merged.first_violation_seed
            ):
                merged.first_violation_seed = seed
        merged.traces_with_inversion = self.traces_with_inversion + other.traces_with_inversion
        return merged

    def to_kv_lines(self) -> list[str]:
        lines = [
            f"runs={self.runs}",
            f"decided_runs={self.decided_runs}",
            f"capped_runs={self.capped_runs}",
            f"match_observations={self.match_observations}",
            f"match_successes={self.match_successes}",
            f"per_round_match_frequency={self.per_round_match_frequency:.6f}",
            f"match_lower_bound_99={self.match_lower_bound():.6f}",
            f"epsilon_bound={self.epsilon_bound:.6f}",
            f"monitor_violations={sum(self.monitor_violations.values())}",
            f"traces_with_inversion={self.traces_with_inversion}",
        ]
        for rnd in sorted(self.decision_round_histogram):
            lines.append(f"decision_round_histogram.{rnd}={self.decision_round_histogram[rnd]}")
        for name in sorted(self.monitor_violations):
            lines.append(f"violation.{name}={self.monitor_violations[name]}")
        return lines


def run_campaign(
    config: SystemConfig,
    runs: int,
    base_seed: int = 0,
    *,
    with_monitors: bool = True,
) -> RunStats:
    """Aggregate ``runs`` seeded runs (seeds base_seed .. base_seed+runs-1)."""
    if runs < 1:
        raise ValueError("a campaign needs at least one run")
    stats = RunStats(n=config.n)
    for i in range(runs):
        seed = base_seed + i
        trace = run_once(config, seed)
        stats.runs += 1
        if trace.capped:
            stats.capped_runs += 1
        else:
            stats.decided_runs += 1
        for ev in trace.events:
            if ev.kind is EventKind.DECIDE:
                rnd = ev.value.round
                stats.decision_round_histogram[rnd] = (
                    stats.decision_round_histogram.get(rnd, 0) + 1
                )
        for _, matched in flip_match_observations(trace):
            stats.match_observations += 1
            if matched:
                stats.match_successes += 1
        if with_monitors:
            for verdict in run_standard_monitors(trace):
                if verdict.status == "VIOLATION":
                    stats.monitor_violations[verdict.name] = (
                        stats.monitor_violations.get(verdict.name, 0) + 1
                    )
                    if stats.first_violation_seed is None:
                        stats.first_violation_seed = seed
                elif verdict.name == "new_old_inversion" and verdict.witness:
                    stats.traces_with_inversion += 1
    return stats


# --------------------------------------------------------------------------
# Forced-coin experiments
# --------------------------------------------------------------------------


class OracleCoin:
    """Coin override for the matched-flip experiments.

    At rounds >= target_round the coin returns the value of the first
    round-(write_round - 1) write that completed, read from the live state
    (inverted variant returns its complement, which breaks the antecedent on
    purpose). Below the target each process re-flips its own last non-pause
    preference, so neither value's camp ever collapses before the target.
    """

    def __init__(self, target_round: int, invert: bool = False):
        if target_round < 2:
            raise ValueError("the forced round must be at least 2")
        self.target_round = target_round
        self.invert = invert

    def _first_completed(self, state: SystemState, rnd: int) -> int:
        best_seq: int | None = None
        best_value: int | None = None
        for reg in state.registers:
            for record in reg.writes:
                if (
                    record.respond_time is not PENDING
                    and record.value.round == rnd
                    and (best_seq is None or record.respond_time < best_seq)
                ):
                    best_seq = record.respond_time
                    best_value = record.value.prefer
        if best_value is None or best_value is BOT:
            raise RuntimeError(f"no completed value write at round {rnd}")
        return best_value

    def flip(self, state: SystemState, pid: int, write_round: int) -> int:
        if write_round >= self.target_round:
            v = self._first_completed(state, write_round - 1)
            return complement(v) if self.invert else v
        for record in reversed(state.registers[pid].writes):
            if record.value.prefer is not BOT:
                return record.value.prefer
        return state.processes[pid].proposal


@dataclass(slots=True)
class ForcedCoinSummary:
    target_round: int
    runs: int = 0
    antecedent_fired: int = 0
    uncontested_pass: int = 0
    decide_pass: int = 0
    violation_runs: int = 0
    vacuous_runs: int = 0

    @property
    def all_fired(self) -> bool:
        return self.antecedent_fired == self.runs

    @property
    def all_pass_when_fired(self) -> bool:
        return (
            self.violation_runs == 0
            and self.uncontested_pass == self.antecedent_fired
            and self.decide_pass == self.antecedent_fired
        )

    def to_kv_lines(self) -> list[str]:
        return [
            f"target_round={self.target_round}",
            f"runs={self.runs}",
            f"antecedent_fired={self.antecedent_fired}",
            f"matched_flips_uncontested_pass={self.uncontested_pass}",
            f"matched_flips_decide_pass={self.decide_pass}",
            f"violation_runs={self.violation_runs}",
            f"vacuous_runs={self.vacuous_runs}",
        ]


def forced_coin_experiment(
    config: SystemConfig,
    target_round: int,
    runs: int,
    base_seed: int = 0,
    *,
    invert: bool = False,
) -> ForcedCoinSummary:
    """Run seeded lockstep schedules with oracle coins at the target round.

    In each run where the antecedent fires (a completed write at round
    target_round-1 and all target-round flips matching its value), the
    matched-flip monitors must PASS.
    """
    if target_round < 2:
        raise ValueError("the forced round must be at least 2")
    if runs < 1:
        raise ValueError("need at least one run")
    summary = ForcedCoinSummary(target_round=target_round)
    for i in range(runs):
        seed = base_seed + i
        cfg = replace(config, adversary="lockstep", seed=seed)
        adversary = make_adversary("lockstep", cfg, seed)
        trace = run_once(cfg, adversary=adversary, coin=OracleCoin(target_round, invert))
        summary.runs += 1
        fired = _antecedent_fired(trace, target_round)
        if fired:
            summary.antecedent_fired += 1
        verdicts = {v.name: v for v in run_standard_monitors(trace)}
        bl4 = verdicts["matched_flips_uncontested"]
        bc1 = verdicts["matched_flips_decide"]
        if bl4.status == "VIOLATION" or bc1.status == "VIOLATION":
            summary.violation_runs += 1
        if fired:
            if bl4.status == "PASS":
                summary.uncontested_pass += 1
            if bc1.status == "PASS":
                summary.decide_pass += 1
        if bl4.status == "VACUOUS" and bc1.status == "VACUOUS":
            summary.vacuous_runs += 1
    return summary


def _antecedent_fired(trace: Trace, target_round: int) -> bool:
    """Did round target_round-1 complete a write with all target-round flips matching?"""
    first_completed: int | None = None
    flips: list[int] = []
    for ev in trace.events:
        if ev.kind is EventKind.RESPOND_WRITE and ev.value.round == target_round - 1:
            if first_completed is None:
                first_completed = ev.value.prefer
        elif ev.kind is EventKind.FLIP and ev.value.round == target_round:
            flips.append(ev.value.prefer)
    if first_completed is None or first_completed is BOT:
        return False
    return all(o == first_completed for o in flips)


# --------------------------------------------------------------------------
# The linearization attack demo
# --------------------------------------------------------------------------


@dataclass(slots=True)
class AttackReport:
    runs: int = 0
    coin_zero: int = 0
    coin_one: int = 0
    first_linearized_mismatches: int = 0
    completed_before_flip: int = 0
    branch_checks_ok: int = 0

    @property
    def all_mismatched(self) -> bool:
        return self.first_linearized_mismatches == self.runs

    @property
    def all_completed_before_flip(self) -> bool:
        return self.completed_before_flip == self.runs

    def to_kv_lines(self) -> list[str]:
        return [
            f"runs={self.runs}",
            f"coin_zero={self.coin_zero}",
            f"coin_one={self.coin_one}",
            f"first_linearized_mismatches={self.first_linearized_mismatches}",
            f"completed_before_flip={self.completed_before_flip}",
            f"branch_checks_ok={self.branch_checks_ok}",
        ]


def _round_one_write_ops(trace: Trace) -> dict[str, tuple[int, OpInterval, RegisterValue]]:
    """All round-1 writes in the trace as (pid, interval, value), keyed by op id."""
    ops: dict[str, tuple[int, int, int | None, RegisterValue]] = {}
    for ev in trace.events:
        if ev.kind is EventKind.INVOKE_WRITE and ev.value.round == 1:
            key = f"w{ev.pid}.{sum(1 for k in ops if k.startswith(f'w{ev.pid}.'))}"
            ops[key] = (ev.pid, ev.seq, None, ev.value)
        elif ev.kind is EventKind.RESPOND_WRITE and ev.value.round == 1:
            for key, (pid, invoke, respond, value) in ops.items():
                if pid == ev.pid and value == ev.value and respond is None:
                    ops[key] = (pid, invoke, ev.seq, value)
                    break
    return {
        key: (pid, OpInterval(invoke, respond), value)
        for key, (pid, invoke, respond, value) in ops.items()
    }


def attack_demo(
    runs: int,
    base_seed: int = 0,
    *,
    n: int = 2,
    model: str = "linearizable",
) -> AttackReport:
    """Reproduce the linearization attack: after seeing the coin, the adversary
    commits the global order so the first-linearized round-1 write is the
    coin's complement, while the first *real-time-completed* round-1 write
    finished before the flip.

    Inapplicable outside the linearizable model: with regular registers there
    are no linearization commitments to defer, so completed writes cannot be
    reordered after the fact.
    """
    if model != "linearizable":
        raise ScenarioBrokenError(
            "the attack needs the linearizable model; completed regular-register"
            " writes cannot be reordered retroactively"
        )
    if runs < 1:
        raise ValueError("need at least one run")
    if n < 2:
        raise ScenarioBrokenError("the attack needs at least two processes")
    proposals = tuple(pid % 2 for pid in range(n))
    report = AttackReport()
    for i in range(runs):
        seed = base_seed + i
        cfg = SystemConfig(
            n=n,
            proposals=proposals,
            model="linearizable",
            adversary="appendix_attack",
            seed=seed,
            max_events=1000,
        )
        adversary = AppendixAttackAdversary(cfg, seed)
        trace, _ = _simulate(cfg, adversary=adversary)
        report.runs += 1

        flip = next(ev for ev in trace.events if ev.kind is EventKind.FLIP)
        coin = flip.value.prefer
        if coin == 0:
            report.coin_zero += 1
        else:
            report.coin_one += 1

        ops = _round_one_write_ops(trace)
        value_ops = {
            key: (pid, interval, value)
            for key, (pid, interval, value) in ops.items()
            if value.prefer is not BOT
        }
        first_key = next(
            k for k, (_, _, v) in value_ops.items() if v.prefer == complement(coin)
        )
        other_key = next(k for k, (_, _, v) in value_ops.items() if v.prefer == coin)
        rest = [k for k in ops if k not in (first_key, other_key)]
        all_ops = [LinearizableOp(key, interval) for key, (_, interval, _) in ops.items()]

        # Commit the adversary's chosen order, then read the first-linearized
        # value write back out of it.
        chosen = LinearizationOrder(all_ops)
        chosen.commit_all([first_key, other_key, *rest])
        first_committed = next(key for key in chosen.order if key in value_ops)
        if value_ops[first_committed][2].prefer != coin:
            report.first_linearized_mismatches += 1

        completions = [
            ev.seq
            for ev in trace.events
            if ev.kind is EventKind.RESPOND_WRITE
            and ev.value.round == 1
            and ev.value.prefer is not BOT
        ]
        if completions and min(completions) < flip.seq:
            report.completed_before_flip += 1

        # The opposite order must be committable too: the choice was genuinely
        # open until the adversary resolved it after the flip.
        try:
            LinearizationOrder(all_ops).commit_all([other_key, first_key, *rest])
            report.branch_checks_ok += 1
        except OrderViolationError:
            pass
    return report
