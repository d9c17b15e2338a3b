"""Strong-adversary schedulers.

An adversary sees the full system state (process states, register histories,
the trace so far, and past coin outcomes -- future outcomes do not exist
anywhere in the state) and chooses, at every step, which enabled event fires,
what legal value each regular read returns, which pending writes commit early
under the linearizable model, and which processes crash. All scheduling
nondeterminism lives here, behind a per-run seed, so whole runs replay
bit-identically from (config, seed).
"""

from __future__ import annotations

import random

from .core import BOT, RegisterValue, SystemConfig
from .protocol import Phase
from .system import (
    COMMIT_LINEARIZATION,
    CRASH,
    FIRE_INVOKE,
    FIRE_LOCAL,
    FIRE_RESPOND,
    ScheduleChoice,
    SystemState,
)


class AdversaryFaultError(RuntimeError):
    """The adversary returned a choice that is not currently enabled."""


class ScenarioBrokenError(RuntimeError):
    """A scripted adversary's scenario preconditions do not hold."""


class AdversaryContext:
    """Read-only view handed to the adversary at each step.

    Coin outcomes appear only as FLIP events already in the trace; a pending
    flip has no drawn value anywhere in the state. The full enabled-choice
    list is materialized lazily, so schedulers that only query one process at
    a time never pay for it.
    """

    __slots__ = ("state", "_choices")

    def __init__(self, state: SystemState):
        self.state = state
        self._choices: tuple[ScheduleChoice, ...] | None = None

    @property
    def config(self) -> SystemConfig:
        return self.state.config

    @property
    def choices(self) -> tuple[ScheduleChoice, ...]:
        if self._choices is None:
            self._choices = tuple(self.state.enabled_choices())
        return self._choices

    def choices_for(self, pid: int) -> list[ScheduleChoice]:
        return self.state.choices_for(pid)

    def commit_choices(self) -> list[ScheduleChoice]:
        return self.state.commit_choices()

    def legal_values(self, pid: int) -> list[tuple[int, RegisterValue]]:
        return self.state.legal_values(pid)


def crash_policy(
    ctx: AdversaryContext, budget: int, rng: random.Random | None = None
) -> ScheduleChoice | None:
    """Optionally crash an enabled process, within the remaining budget.

    Returns None when the budget is exhausted or no live process remains;
    crashing an already-halted process is a no-op (never emitted).
    """
    if ctx.state.crashes_used >= budget:
        return None
    candidates = [c for c in ctx.choices if c.kind == CRASH]
    if not candidates:
        return None
    if rng is None:
        return candidates[0]
    return rng.choice(candidates)


class Adversary:
    """Base scheduler: deterministic function of (context, own seeded stream)."""

    name = "adversary"

    def __init__(self, config: SystemConfig, seed: int):
        self.config = config
        self.rng = random.Random(f"{seed}/adv/{self.name}")

    def choose(self, ctx: AdversaryContext) -> ScheduleChoice | None:
        raise NotImplementedError

    def read_order(self, state: SystemState, pid: int) -> tuple[int, ...]:
        """The order in which ``pid`` reads all registers this iteration."""
        return tuple(range(self.config.n))

    # -- shared helpers -------------------------------------------------------

    def _pick_value(
        self, ctx: AdversaryContext, pid: int, candidates: list[ScheduleChoice]
    ) -> ScheduleChoice:
        """Pick among the value choices of a pending read.

        Candidates arrive oldest-first (initial or last-preceding value, then
        concurrent writes in writer order); the benign default takes the
        newest.
        """
        return candidates[-1]

    def _next_in_cycle(self, ctx: AdversaryContext) -> ScheduleChoice | None:
        """Round-robin over pids; fire the chosen process's single action."""
        n = self.config.n
        start = getattr(self, "_cursor", 0)
        for off in range(n):
            pid = (start + off) % n
            candidates = ctx.choices_for(pid)
            if not candidates:
                continue
            self._cursor = (pid + 1) % n
            if len(candidates) == 1:
                return candidates[0]
            return self._pick_value(ctx, pid, candidates)
        # Only commits are left (live processes exhausted); flush them in order.
        commits = ctx.commit_choices()
        return commits[0] if commits else None


class RoundRobinAdversary(Adversary):
    """Benign scheduler: cycle over processes, reads return the newest legal value."""

    name = "round_robin"

    def choose(self, ctx: AdversaryContext) -> ScheduleChoice | None:
        return self._next_in_cycle(ctx)


class UniformRandomAdversary(Adversary):
    """Picks uniformly among every enabled choice, crashes included."""

    name = "uniform_random"

    def choose(self, ctx: AdversaryContext) -> ScheduleChoice | None:
        return self.rng.choice(list(ctx.choices))

    def read_order(self, state: SystemState, pid: int) -> tuple[int, ...]:
        order = list(range(self.config.n))
        self.rng.shuffle(order)
        return tuple(order)


class StaleReadAdversary(Adversary):
    """Round-robin scheduling, but every read returns the oldest legal value."""

    name = "stale_read"

    def _pick_value(self, ctx, pid, candidates):
        return candidates[0]

    def choose(self, ctx: AdversaryContext) -> ScheduleChoice | None:
        return self._next_in_cycle(ctx)


class DisagreementMaximizerAdversary(Adversary):
    """Greedy heuristic prolonging leader disagreement.

    Read values are ranked: a paused (BOT) value beats everything (a paused
    leader blocks agreement outright), then values differing from the reader's
    own preference, then staler values.
    """

    name = "disagreement_maximizer"

    def _reader_preference(self, ctx: AdversaryContext, pid: int) -> int | None:
        for record in reversed(ctx.state.registers[pid].writes):
            if record.value.prefer is not BOT:
                return record.value.prefer
        return ctx.state.processes[pid].proposal

    def _pick_value(self, ctx, pid, candidates):
        own = self._reader_preference(ctx, pid)

        def rank(pos_choice: tuple[int, ScheduleChoice]) -> tuple[int, int]:
            pos, choice = pos_choice
            prefer = choice.value.prefer
            if prefer is BOT:
                score = 0
            elif prefer != own:
                score = 1
            else:
                score = 2
            return (score, pos)

        return min(enumerate(candidates), key=rank)[1]

    def choose(self, ctx: AdversaryContext) -> ScheduleChoice | None:
        return self._next_in_cycle(ctx)


class LockstepAdversary(Adversary):
    """Balanced scheduler: always step a process with the lowest preference round.

    Keeps every process within one preference round of the others (seeded
    jitter among ties) and returns the stalest legal read value. Used by the
    forced-coin experiments, where camps of both values must survive until the
    target round.
    """

    name = "lockstep"

    def _pref_round(self, state: SystemState, pid: int) -> int:
        for record in reversed(state.registers[pid].writes):
            if record.value.prefer is not BOT:
                return record.value.round
        return 0

    def _pick_value(self, ctx, pid, candidates):
        return candidates[0]

    def choose(self, ctx: AdversaryContext) -> ScheduleChoice | None:
        by_pid: dict[int, list[ScheduleChoice]] = {}
        for pid in range(self.config.n):
            candidates = ctx.choices_for(pid)
            if candidates:
                by_pid[pid] = candidates
        if not by_pid:
            commits = ctx.commit_choices()
            return commits[0] if commits else None
        low = min(self._pref_round(ctx.state, pid) for pid in by_pid)
        tied = [pid for pid in by_pid if self._pref_round(ctx.state, pid) == low]
        pid = self.rng.choice(tied)
        candidates = by_pid[pid]
        if len(candidates) == 1:
            return candidates[0]
        return self._pick_value(ctx, pid, candidates)


class AppendixAttackAdversary(Adversary):
    """Scripted schedule demonstrating adversary control over linearization order.

    Drives: (a) two opposing preference writes invoked concurrently, (b) the
    0-writer's completes first, (c) that process reads both values, pauses,
    and flips at the next round, (d) stops; the harness then commits the
    global linearization so the first round-1 write is the coin's complement.
    """

    name = "appendix_attack"

    def __init__(self, config: SystemConfig, seed: int):
        super().__init__(config, seed)
        if config.model != "linearizable":
            raise ScenarioBrokenError("the attack needs the linearizable model")
        zeros = [pid for pid, p in enumerate(config.proposals) if p == 0]
        ones = [pid for pid, p in enumerate(config.proposals) if p == 1]
        if not zeros or not ones:
            raise ScenarioBrokenError("the attack needs opposing proposals")
        self.runner = zeros[0]   # p: completes its write and flips
        self.opponent = ones[0]  # q: its write stays pending and commits early
        self._script = iter(self._steps())
        self.done = False

    def _steps(self):
        p, q = self.runner, self.opponent
        yield ScheduleChoice(FIRE_INVOKE, pid=p)
        yield ScheduleChoice(FIRE_INVOKE, pid=q)
        yield ScheduleChoice(FIRE_RESPOND, pid=p)
        for _ in range(2):  # one read-all that sees both values, one after pausing
            for _ in range(self.config.n):
                yield ScheduleChoice(FIRE_INVOKE, pid=p)
                yield ("respond_read", p)
            yield ("after_view", p)
        yield ScheduleChoice(FIRE_INVOKE, pid=p)   # the coin write
        yield ScheduleChoice(FIRE_RESPOND, pid=p)

    def read_order(self, state: SystemState, pid: int) -> tuple[int, ...]:
        rest = [i for i in range(self.config.n) if i not in (self.runner, self.opponent)]
        return tuple([self.opponent, self.runner] + rest)

    def choose(self, ctx: AdversaryContext) -> ScheduleChoice | None:
        state = ctx.state
        q = self.opponent
        while True:
            try:
                step = next(self._script)
            except StopIteration:
                self.done = True
                return None
            if isinstance(step, ScheduleChoice):
                if step not in ctx.choices:
                    raise ScenarioBrokenError(f"scripted step {step} is not enabled")
                return step
            tag, pid = step
            proc = state.processes[pid]
            if tag == "respond_read":
                # Before p first reads R[q], make q's pending write visible.
                target = proc.read_order[proc.read_pos]
                reg = state.registers[target]
                if target == q and reg.committed == 0:
                    self._script = self._chain(step)
                    return ScheduleChoice(COMMIT_LINEARIZATION, target=q, writer_seq=1)
                (choice,) = ctx.choices_for(pid)
                return choice
            if tag == "after_view":
                # Iteration 1 ends in a pause write; iteration 2 ends in a flip.
                if proc.phase is Phase.WRITE_INVOKE:
                    self._script = self._chain(
                        ScheduleChoice(FIRE_INVOKE, pid=pid),
                        ScheduleChoice(FIRE_RESPOND, pid=pid),
                    )
                    continue
                if proc.phase is Phase.FLIP:
                    return ScheduleChoice(FIRE_LOCAL, pid=pid)
                raise ScenarioBrokenError(f"unexpected phase {proc.phase} after a view")

    def _chain(self, *steps):
        rest = self._script

        def gen():
            yield from steps
            yield from rest

        return gen()


ADVERSARIES: dict[str, type[Adversary]] = {
    cls.name: cls
    for cls in (
        RoundRobinAdversary,
        UniformRandomAdversary,
        StaleReadAdversary,
        DisagreementMaximizerAdversary,
        LockstepAdversary,
        AppendixAttackAdversary,
    )
}

# The general-purpose schedulers every claim must hold under.
GENERIC_ADVERSARIES = ("round_robin", "uniform_random", "stale_read", "disagreement_maximizer")


def make_adversary(name: str, config: SystemConfig, seed: int) -> Adversary:
    try:
        cls = ADVERSARIES[name]
    except KeyError:
        raise ValueError(f"unknown adversary {name!r}") from None
    return cls(config, seed)
