"""The per-process consensus state machine.

Each process writes its proposal at round 1, then loops: read every register,
capture its own (x, r), and either decide, adopt the leaders' agreed value at
round r+1, pause at round r, or flip a coin into round r+1. The state machine
is decomposed so the scheduler can interleave at every register invocation and
response; coin outcomes are supplied by the engine at the moment the flip
fires.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum, auto
from typing import Mapping

from .core import BOT, SITE_AGREE, SITE_INIT, SITE_PAUSE, RegisterValue

# A complete view maps every process id to the value read from its register.
View = Mapping[int, RegisterValue]


class Phase(Enum):
    WRITE_INVOKE = auto()   # about to invoke the pending write
    WRITE_RESPOND = auto()  # write invoked, awaiting its response
    READ_INVOKE = auto()    # about to invoke the next read of the iteration
    READ_RESPOND = auto()   # read invoked, awaiting its response
    FLIP = auto()           # about to flip a coin (local event)
    DECIDE = auto()         # about to decide (local event)
    DECIDED = auto()
    CRASHED = auto()


@dataclass(frozen=True, slots=True)
class Action:
    """What a process does next after evaluating a complete view."""

    kind: str  # "decide" | "write" | "flip"
    value: RegisterValue | None = None
    line: str | None = None


@dataclass(slots=True)
class ProcessState:
    """A process's position within the protocol."""

    pid: int
    proposal: int
    phase: Phase = Phase.WRITE_INVOKE
    pending_value: RegisterValue | None = None
    pending_line: str | None = None
    read_order: tuple[int, ...] = ()
    read_pos: int = 0
    read_invoke_seq: int = -1
    view: dict[int, RegisterValue] = field(default_factory=dict)
    captured: RegisterValue | None = None
    iteration: int = 0
    decided: RegisterValue | None = None

    @property
    def halted(self) -> bool:
        return self.phase in (Phase.DECIDED, Phase.CRASHED)

    def copy(self) -> ProcessState:
        dup = ProcessState(self.pid, self.proposal)
        dup.phase = self.phase
        dup.pending_value = self.pending_value
        dup.pending_line = self.pending_line
        dup.read_order = self.read_order
        dup.read_pos = self.read_pos
        dup.read_invoke_seq = self.read_invoke_seq
        dup.view = dict(self.view)
        dup.captured = self.captured
        dup.iteration = self.iteration
        dup.decided = self.decided
        return dup


def init_process(pid: int, proposal: int) -> ProcessState:
    """A fresh process whose first action writes (proposal, 1)."""
    if proposal not in (0, 1):
        raise ValueError(f"proposal must be 0 or 1, got {proposal!r}")
    state = ProcessState(pid=pid, proposal=proposal)
    state.pending_value = RegisterValue(proposal, 1)
    state.pending_line = SITE_INIT
    return state


def leaders(view: View) -> set[int]:
    """Processes whose round is maximal in the view."""
    top = max(value.round for value in view.values())
    return {pid for pid, value in view.items() if value.round == top}


def leaders_agree(view: View) -> int | None:
    """The value every leader prefers, or None if any leader pauses or they differ."""
    prefs = {view[pid].prefer for pid in leaders(view)}
    if len(prefs) == 1:
        (pref,) = prefs
        if pref is not BOT:
            return pref
    return None


def evaluate(pid: int, view: View, captured: RegisterValue) -> Action:
    """Pick the process's next action from a complete view.

    A process q disagrees with the evaluating process when q's preference
    differs from the captured one; a paused (BOT) preference always counts as
    disagreement. Deciding requires leadership, a non-BOT captured value, and
    every disagreeing process trailing by at least two rounds.
    """
    if pid not in view:
        raise ValueError(f"view is missing the evaluating process {pid}")
    x, r = captured.prefer, captured.round
    lead = leaders(view)
    if pid in lead and x is not BOT:
        disagree = [q for q, val in view.items() if val.prefer != x]
        if all(r >= view[q].round + 2 for q in disagree):
            return Action("decide", RegisterValue(x, r))
    agreed = leaders_agree(view)
    if agreed is not None:
        return Action("write", RegisterValue(agreed, r + 1), SITE_AGREE)
    if x is not BOT:
        return Action("write", RegisterValue(BOT, r), SITE_PAUSE)
    return Action("flip")


def next_pending_read_target(state: ProcessState) -> int | None:
    """The next register to read under the adversary-chosen order, or None when done."""
    if state.read_pos >= len(state.read_order):
        return None
    return state.read_order[state.read_pos]
