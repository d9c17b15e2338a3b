"""System state and the event engine.

A SystemState bundles every process state, every register history, the event
clock, and the trace so far. All nondeterminism is externalized: the engine
exposes the set of enabled schedule choices and applies whichever one the
caller (an adversary, or the explorer branching over all of them) picks. Coin
outcomes are supplied at apply time, so nothing in the state can leak a flip
before its FLIP event exists.
"""

from __future__ import annotations

import random
from typing import Callable, NamedTuple, Protocol

from .core import (
    BOT,
    SITE_COIN,
    SITE_DECIDE,
    SITE_READ,
    EventKind,
    OpInterval,
    RegisterValue,
    SystemConfig,
    Trace,
    TraceEvent,
)
from .protocol import Phase, ProcessState, evaluate, init_process, next_pending_read_target
from .registers import (
    RegisterState,
    atomic_read_value,
    legal_read_values,
    linearize_next,
    respond_read,
)

# Choice kinds, in canonical sort order.
FIRE_INVOKE = "invoke"
FIRE_RESPOND = "respond"
FIRE_LOCAL = "local"
COMMIT_LINEARIZATION = "commit"
CRASH = "crash"

_KIND_RANK = {FIRE_INVOKE: 0, FIRE_RESPOND: 1, FIRE_LOCAL: 2, COMMIT_LINEARIZATION: 3, CRASH: 4}


class ScheduleChoice(NamedTuple):
    """One schedulable step: fire an event, commit a linearization, or crash.

    pid is the acting process (-1 for commits, which target a register);
    value is the chosen read return for regular read responses.
    """

    kind: str
    pid: int = -1
    target: int = -1
    writer_seq: int = -1
    value: RegisterValue | None = None


def _choice_key(choice: ScheduleChoice) -> tuple:
    value = choice.value
    value_key = (-1, -1) if value is None else (value.round, 2 if value.prefer is BOT else value.prefer)
    return (_KIND_RANK[choice.kind], choice.pid, choice.target, choice.writer_seq, value_key)


class CoinSource(Protocol):
    """Supplies fair (or experimentally forced) coin outcomes at flip time."""

    def flip(self, state: "SystemState", pid: int, write_round: int) -> int: ...


class FairCoin:
    """A seeded fair coin; outcomes are independent of the adversary's stream."""

    def __init__(self, seed: int | str):
        self._rng = random.Random(f"{seed}/coin")

    def flip(self, state: "SystemState", pid: int, write_round: int) -> int:
        return self._rng.getrandbits(1)


# Called at each iteration start to fix the process's line-3 read order.
ReadOrderProvider = Callable[["SystemState", int], tuple[int, ...]]


def ascending_read_order(state: "SystemState", pid: int) -> tuple[int, ...]:
    return tuple(range(state.config.n))


class SystemState:
    """All process states, register histories, pending operations, and the clock."""

    __slots__ = (
        "config",
        "processes",
        "registers",
        "events",
        "clock",
        "crashes_used",
        "record_events",
        "max_returned",
        "inversion_hits",
    )

    def __init__(self, config: SystemConfig, record_events: bool = True):
        self.config = config
        self.processes: list[ProcessState] = [
            init_process(pid, proposal) for pid, proposal in enumerate(config.proposals)
        ]
        self.registers: list[RegisterState] = [RegisterState(owner=pid) for pid in range(config.n)]
        self.events: list[TraceEvent] = []
        self.clock = 0
        self.crashes_used = 0
        self.record_events = record_events
        # Per (reader, register): max writer ordinal ever returned to that
        # reader. A decrease is exactly a new-old inversion.
        self.max_returned: list[list[int]] = [[-1] * config.n for _ in range(config.n)]
        self.inversion_hits: list[tuple[int, int, int]] = []  # (reader, register, respond seq)

    # -- construction helpers ------------------------------------------------

    def copy(self) -> SystemState:
        dup = SystemState.__new__(SystemState)
        dup.config = self.config
        dup.processes = [p.copy() for p in self.processes]
        dup.registers = [r.copy() for r in self.registers]
        dup.events = list(self.events)
        dup.clock = self.clock
        dup.crashes_used = self.crashes_used
        dup.record_events = self.record_events
        dup.max_returned = [row[:] for row in self.max_returned]
        dup.inversion_hits = list(self.inversion_hits)
        return dup

    def trace(self) -> Trace:
        return Trace(config=self.config, events=tuple(self.events))

    @property
    def all_halted(self) -> bool:
        return all(p.halted for p in self.processes)

    def decided_values(self) -> dict[int, RegisterValue]:
        return {p.pid: p.decided for p in self.processes if p.decided is not None}

    # -- enabled choices -----------------------------------------------------

    def choices_for(self, pid: int) -> list[ScheduleChoice]:
        proc = self.processes[pid]
        if proc.halted:
            return []
        phase = proc.phase
        if phase in (Phase.WRITE_INVOKE, Phase.READ_INVOKE):
            return [ScheduleChoice(FIRE_INVOKE, pid=pid)]
        if phase is Phase.WRITE_RESPOND:
            return [ScheduleChoice(FIRE_RESPOND, pid=pid)]
        if phase is Phase.READ_RESPOND:
            target = proc.read_order[proc.read_pos]
            reg = self.registers[target]
            if self.config.model == "regular":
                read = OpInterval(proc.read_invoke_seq, self.clock)
                return [
                    ScheduleChoice(FIRE_RESPOND, pid=pid, target=target, value=v)
                    for v in dict.fromkeys(legal_read_values(reg, read))
                ]
            if self.config.model == "linearizable":
                value = reg.last_committed_value()
            else:
                value = atomic_read_value(reg)
            return [ScheduleChoice(FIRE_RESPOND, pid=pid, target=target, value=value)]
        if phase in (Phase.FLIP, Phase.DECIDE):
            return [ScheduleChoice(FIRE_LOCAL, pid=pid)]
        return []

    def commit_choices(self) -> list[ScheduleChoice]:
        if self.config.model != "linearizable":
            return []
        out = []
        for reg in self.registers:
            if reg.committed < len(reg.writes):
                out.append(
                    ScheduleChoice(
                        COMMIT_LINEARIZATION, target=reg.owner, writer_seq=reg.committed + 1
                    )
                )
        return out

    def crash_choices(self) -> list[ScheduleChoice]:
        if self.crashes_used >= self.config.crash_budget:
            return []
        return [ScheduleChoice(CRASH, pid=p.pid) for p in self.processes if not p.halted]

    def enabled_choices(self) -> list[ScheduleChoice]:
        out: list[ScheduleChoice] = []
        for pid in range(self.config.n):
            out.extend(self.choices_for(pid))
        out.extend(self.commit_choices())
        out.extend(self.crash_choices())
        out.sort(key=_choice_key)
        return out

    def has_enabled_choice(self) -> bool:
        if any(not p.halted for p in self.processes):
            return True
        return bool(self.commit_choices())

    def is_enabled(self, choice: ScheduleChoice) -> bool:
        """Structural enabledness check, cheaper than enumerating everything.

        Value legality of regular read responses is enforced separately by
        ``respond_read`` (an out-of-legal-set value raises IllegalChoiceError).
        """
        kind = choice.kind
        if kind in (FIRE_INVOKE, FIRE_RESPOND, FIRE_LOCAL):
            if not 0 <= choice.pid < self.config.n:
                return False
            proc = self.processes[choice.pid]
            if proc.halted:
                return False
            phase = proc.phase
            if kind == FIRE_INVOKE:
                return phase in (Phase.WRITE_INVOKE, Phase.READ_INVOKE)
            if kind == FIRE_RESPOND:
                if phase is Phase.WRITE_RESPOND:
                    return choice.target == -1 and choice.value is None
                if phase is Phase.READ_RESPOND:
                    return choice.target == proc.read_order[proc.read_pos]
                return False
            return phase in (Phase.FLIP, Phase.DECIDE)
        if kind == COMMIT_LINEARIZATION:
            if self.config.model != "linearizable" or not 0 <= choice.target < self.config.n:
                return False
            reg = self.registers[choice.target]
            return reg.committed < len(reg.writes) and choice.writer_seq == reg.committed + 1
        if kind == CRASH:
            return (
                self.crashes_used < self.config.crash_budget
                and 0 <= choice.pid < self.config.n
                and not self.processes[choice.pid].halted
            )
        return False

    def legal_values(self, pid: int) -> list[tuple[int, RegisterValue]]:
        """Legal (writer ordinal, value) pairs for pid's pending read, oldest first."""
        proc = self.processes[pid]
        if proc.phase is not Phase.READ_RESPOND:
            raise RuntimeError(f"process {pid} has no pending read")
        target = proc.read_order[proc.read_pos]
        reg = self.registers[target]
        if self.config.model == "regular":
            read = OpInterval(proc.read_invoke_seq, self.clock)
            return legal_read_values(reg, read, with_seq=True)
        if self.config.model == "linearizable":
            return [(reg.committed, reg.last_committed_value())]
        seq = len(reg.writes)
        return [(seq, atomic_read_value(reg))]

    # -- applying choices ----------------------------------------------------

    def _emit(
        self,
        pid: int,
        kind: EventKind,
        target: int | None = None,
        value: RegisterValue | None = None,
        line: str | None = None,
    ) -> TraceEvent:
        event = TraceEvent(self.clock, pid, kind, target, value, line)
        if self.record_events:
            self.events.append(event)
        self.clock += 1
        return event

    def _start_iteration(self, proc: ProcessState, read_order: tuple[int, ...]) -> None:
        if sorted(read_order) != list(range(self.config.n)):
            raise RuntimeError(f"read order {read_order!r} is not a permutation")
        proc.iteration += 1
        proc.read_order = read_order
        proc.read_pos = 0
        proc.view = {}
        proc.phase = Phase.READ_INVOKE

    def _finish_write(self, proc: ProcessState, read_orders: ReadOrderProvider) -> None:
        reg = self.registers[proc.pid]
        reg.respond_write(self.clock)
        self._emit(
            proc.pid,
            EventKind.RESPOND_WRITE,
            target=proc.pid,
            value=proc.pending_value,
            line=proc.pending_line,
        )
        if self.config.model == "linearizable" and reg.committed < len(reg.writes):
            # A completed write is visible to every later read; commit it now
            # if the adversary has not done so already.
            linearize_next(reg, len(reg.writes))
        proc.pending_value = None
        proc.pending_line = None
        self._start_iteration(proc, read_orders(self, proc.pid))

    def _finish_read(self, proc: ProcessState, value: RegisterValue | None, coin: int | None) -> None:
        target = proc.read_order[proc.read_pos]
        reg = self.registers[target]
        returned = respond_read(reg, proc.pid, value, self.config.model, self.clock)
        # Inversion tracking: map the returned value back to its writer ordinal.
        seq = 0
        for record in reversed(reg.writes):
            if record.value == returned and record.invoke_time < self.clock:
                seq = record.writer_seq
                break
        prev = self.max_returned[proc.pid][target]
        if seq < prev:
            self.inversion_hits.append((proc.pid, target, self.clock))
        else:
            self.max_returned[proc.pid][target] = seq
        self._emit(proc.pid, EventKind.RESPOND_READ, target=target, value=returned, line=SITE_READ)
        proc.view[target] = returned
        proc.read_pos += 1
        if proc.read_pos < self.config.n:
            proc.phase = Phase.READ_INVOKE
            return
        proc.captured = proc.view[proc.pid]
        action = evaluate(proc.pid, proc.view, proc.captured)
        if action.kind == "decide":
            proc.phase = Phase.DECIDE
        elif action.kind == "flip":
            proc.phase = Phase.FLIP
        else:
            proc.pending_value = action.value
            proc.pending_line = action.line
            proc.phase = Phase.WRITE_INVOKE

    def apply(
        self,
        choice: ScheduleChoice,
        *,
        coin: int | None = None,
        read_orders: ReadOrderProvider = ascending_read_order,
    ) -> None:
        """Apply one schedule choice, emitting its event(s).

        ``coin`` must be supplied when the choice fires a flip. In the atomic
        model register operations respond immediately after invoking (a single
        indivisible step).
        """
        kind = choice.kind
        if kind == COMMIT_LINEARIZATION:
            linearize_next(self.registers[choice.target], choice.writer_seq)
            return
        if kind == CRASH:
            proc = self.processes[choice.pid]
            if proc.halted:
                raise RuntimeError(f"cannot crash halted process {choice.pid}")
            self._emit(choice.pid, EventKind.CRASH)
            proc.phase = Phase.CRASHED
            self.crashes_used += 1
            return
        proc = self.processes[choice.pid]
        phase = proc.phase
        if kind == FIRE_INVOKE:
            if phase is Phase.WRITE_INVOKE:
                reg = self.registers[proc.pid]
                reg.invoke_write(proc.pending_value, self.clock)
                self._emit(
                    proc.pid,
                    EventKind.INVOKE_WRITE,
                    target=proc.pid,
                    value=proc.pending_value,
                    line=proc.pending_line,
                )
                proc.phase = Phase.WRITE_RESPOND
                if self.config.model == "atomic":
                    self._finish_write(proc, read_orders)
            elif phase is Phase.READ_INVOKE:
                target = next_pending_read_target(proc)
                reg = self.registers[target]
                reg.invoke_read(proc.pid, self.clock)
                proc.read_invoke_seq = self.clock
                self._emit(proc.pid, EventKind.INVOKE_READ, target=target, line=SITE_READ)
                proc.phase = Phase.READ_RESPOND
                if self.config.model == "atomic":
                    self._finish_read(proc, None, None)
            else:
                raise RuntimeError(f"process {choice.pid} has nothing to invoke")
        elif kind == FIRE_RESPOND:
            if phase is Phase.WRITE_RESPOND:
                self._finish_write(proc, read_orders)
            elif phase is Phase.READ_RESPOND:
                self._finish_read(proc, choice.value, coin)
            else:
                raise RuntimeError(f"process {choice.pid} has no pending operation")
        elif kind == FIRE_LOCAL:
            if phase is Phase.DECIDE:
                self._emit(
                    proc.pid, EventKind.DECIDE, value=proc.captured, line=SITE_DECIDE
                )
                proc.decided = proc.captured
                proc.phase = Phase.DECIDED
            elif phase is Phase.FLIP:
                if coin not in (0, 1):
                    raise RuntimeError("a coin outcome is required to fire a flip")
                write_round = proc.captured.round + 1
                outcome = RegisterValue(coin, write_round)
                self._emit(proc.pid, EventKind.FLIP, value=outcome, line=SITE_COIN)
                proc.pending_value = outcome
                proc.pending_line = SITE_COIN
                proc.phase = Phase.WRITE_INVOKE
            else:
                raise RuntimeError(f"process {choice.pid} has no local step")
        else:
            raise RuntimeError(f"unknown choice kind {kind!r}")

    def flips_coin(self, choice: ScheduleChoice) -> bool:
        """True when applying this choice will draw a coin."""
        return (
            choice.kind == FIRE_LOCAL
            and self.processes[choice.pid].phase is Phase.FLIP
        )

    def flip_round(self, pid: int) -> int:
        """The round of the coin write the process's pending flip will feed."""
        return self.processes[pid].captured.round + 1
