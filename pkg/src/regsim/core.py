"""Shared domain types for consensus-simulation traces.

Time is a global event-sequence index: one event per tick, assigned densely
from 0. Register operations span an [invoke, respond] interval on that clock;
coin flips, decisions, and crashes are single atomic events. This makes the
precedence/concurrency predicates exact and runs reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Iterable

# The "paused" preference marker. A register's prefer field is always 0, 1, or BOT.
BOT = None

# respond_time of an operation that has not completed yet.
PENDING = None

MODELS = ("atomic", "regular", "linearizable")

# Write-site tags, named for what the write does: the proposal write, the
# leaders-agree write, the pause write, and the coin write. Reads and decides
# get their own site tags.
SITE_INIT = "init"
SITE_AGREE = "agree"
SITE_PAUSE = "pause"
SITE_COIN = "coin"
SITE_READ = "read"
SITE_DECIDE = "decide"
WRITE_SITES = (SITE_INIT, SITE_AGREE, SITE_PAUSE, SITE_COIN)

_PREFER_TO_TOKEN = {0: "0", 1: "1", BOT: "B"}
_TOKEN_TO_PREFER = {"0": 0, "1": 1, "B": BOT}


class TraceFormatError(ValueError):
    """Raised when a serialized trace cannot be parsed."""


def complement(v: int) -> int:
    """Return the opposite preference, 1 - v. Defined only for 0 and 1."""
    if v not in (0, 1):
        raise ValueError(f"complement is undefined for {v!r}")
    return 1 - v


@dataclass(frozen=True, slots=True)
class RegisterValue:
    """The (prefer, round) pair stored in a single-writer register."""

    prefer: int | None
    round: int

    def __post_init__(self) -> None:
        if self.prefer not in (0, 1, BOT):
            raise ValueError(f"prefer must be 0, 1, or BOT, got {self.prefer!r}")
        if self.round < 0:
            raise ValueError(f"round must be non-negative, got {self.round}")
        if self.round == 0 and self.prefer is not BOT:
            raise ValueError("round 0 is reserved for the initial (BOT, 0) value")


INITIAL_VALUE = RegisterValue(BOT, 0)


@dataclass(frozen=True, slots=True)
class OpInterval:
    """An operation's span on the global event clock.

    respond_time is PENDING (None) while the operation has not completed.
    """

    invoke_time: int
    respond_time: int | None = PENDING

    def __post_init__(self) -> None:
        if self.respond_time is not PENDING and self.respond_time <= self.invoke_time:
            raise ValueError(
                f"respond_time {self.respond_time} must follow invoke_time {self.invoke_time}"
            )


def precedes(a: OpInterval, b: OpInterval) -> bool:
    """True iff a completed before b was invoked. A pending op precedes nothing."""
    return a.respond_time is not PENDING and a.respond_time < b.invoke_time


def concurrent(a: OpInterval, b: OpInterval) -> bool:
    """True iff neither interval precedes the other."""
    return not precedes(a, b) and not precedes(b, a)


class EventKind(Enum):
    INVOKE_WRITE = "invoke_write"
    RESPOND_WRITE = "respond_write"
    INVOKE_READ = "invoke_read"
    RESPOND_READ = "respond_read"
    FLIP = "flip"
    DECIDE = "decide"
    CRASH = "crash"


_KIND_BY_TOKEN = {k.value: k for k in EventKind}

REGISTER_EVENT_KINDS = frozenset(
    {
        EventKind.INVOKE_WRITE,
        EventKind.RESPOND_WRITE,
        EventKind.INVOKE_READ,
        EventKind.RESPOND_READ,
    }
)

# Kinds that carry a RegisterValue payload.
_VALUED_KINDS = frozenset(
    {
        EventKind.INVOKE_WRITE,
        EventKind.RESPOND_WRITE,
        EventKind.RESPOND_READ,
        EventKind.FLIP,
        EventKind.DECIDE,
    }
)


@dataclass(frozen=True, slots=True)
class TraceEvent:
    """One timestamped record in an execution history.

    target is the register owner for register operations and None for local
    events. value carries the written value, the read return, the flip outcome
    (paired with the round of the coin write it feeds), or the decided value.
    line is the algorithm-site tag for the event.
    """

    seq: int
    pid: int
    kind: EventKind
    target: int | None = None
    value: RegisterValue | None = None
    line: str | None = None


@dataclass(frozen=True, slots=True)
class SystemConfig:
    """Immutable run configuration, carried in trace headers."""

    n: int
    proposals: tuple[int, ...]
    model: str = "regular"
    adversary: str = "round_robin"
    seed: int = 0
    max_events: int = 100_000
    crash_budget: int = 0

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValueError("n must be at least 1")
        if len(self.proposals) != self.n:
            raise ValueError(f"need {self.n} proposals, got {len(self.proposals)}")
        if any(p not in (0, 1) for p in self.proposals):
            raise ValueError("proposals must be 0 or 1")
        if self.model not in MODELS:
            raise ValueError(f"unknown register model {self.model!r}")
        if self.max_events < 1:
            raise ValueError("max_events must be at least 1")
        if self.crash_budget < 0:
            raise ValueError("crash_budget must be non-negative")


@dataclass(frozen=True, slots=True)
class Trace:
    """An execution history: the event sequence plus the config that produced it."""

    config: SystemConfig
    events: tuple[TraceEvent, ...]

    def __len__(self) -> int:
        return len(self.events)

    def __iter__(self):
        return iter(self.events)

    @property
    def capped(self) -> bool:
        """True when the run hit its event cap (liveness cannot be judged)."""
        return len(self.events) >= self.config.max_events


@dataclass(frozen=True, slots=True)
class Verdict:
    """Result of one monitor over one trace.

    VIOLATION always carries at least one witness event index; VACUOUS means
    the checked property's antecedent never held in this trace.
    """

    name: str
    status: str  # "PASS" | "VIOLATION" | "VACUOUS"
    witness: tuple[int, ...] = ()
    note: str = ""

    def __post_init__(self) -> None:
        if self.status not in ("PASS", "VIOLATION", "VACUOUS"):
            raise ValueError(f"bad verdict status {self.status!r}")
        if self.status == "VIOLATION" and not self.witness:
            raise ValueError("a VIOLATION verdict needs a witness")

    @property
    def ok(self) -> bool:
        return self.status != "VIOLATION"


# --------------------------------------------------------------------------
# Trace serialization: line-delimited, one event per line, fixed field order
#   seq pid kind target prefer round line
# with "-" for fields that do not apply. The header line carries the config.
# --------------------------------------------------------------------------


def _format_value(value: RegisterValue | None) -> str:
    if value is None:
        return "- -"
    return f"{_PREFER_TO_TOKEN[value.prefer]} {value.round}"


def serialize_config(config: SystemConfig) -> str:
    proposals = ",".join(str(p) for p in config.proposals)
    return (
        f"config n={config.n} proposals={proposals} model={config.model}"
        f" adversary={config.adversary} seed={config.seed}"
        f" max_events={config.max_events} crash_budget={config.crash_budget}"
    )


def serialize_trace(trace: Trace) -> str:
    lines = [serialize_config(trace.config)]
    for ev in trace.events:
        target = "-" if ev.target is None else str(ev.target)
        line = ev.line if ev.line is not None else "-"
        lines.append(
            f"{ev.seq} {ev.pid} {ev.kind.value} {target} {_format_value(ev.value)} {line}"
        )
    return "\n".join(lines) + "\n"


def parse_config(line: str) -> SystemConfig:
    parts = line.split()
    if not parts or parts[0] != "config":
        raise TraceFormatError(f"expected config header, got {line!r}")
    fields: dict[str, str] = {}
    for part in parts[1:]:
        key, _, value = part.partition("=")
        if not value:
            raise TraceFormatError(f"bad config field {part!r}")
        fields[key] = value
    try:
        proposals = tuple(int(p) for p in fields["proposals"].split(",") if p != "")
        return SystemConfig(
            n=int(fields["n"]),
            proposals=proposals,
            model=fields["model"],
            adversary=fields["adversary"],
            seed=int(fields["seed"]),
            max_events=int(fields["max_events"]),
            crash_budget=int(fields["crash_budget"]),
        )
    except (KeyError, ValueError) as exc:
        raise TraceFormatError(f"bad config header {line!r}: {exc}") from exc


def _parse_event(line: str) -> TraceEvent:
    parts = line.split()
    if len(parts) != 7:
        raise TraceFormatError(f"expected 7 fields, got {len(parts)}: {line!r}")
    seq_s, pid_s, kind_s, target_s, prefer_s, round_s, site = parts
    try:
        kind = _KIND_BY_TOKEN[kind_s]
    except KeyError:
        raise TraceFormatError(f"unknown event kind {kind_s!r}") from None
    if prefer_s == "-":
        value = None
        if round_s != "-":
            raise TraceFormatError(f"dangling round in {line!r}")
    else:
        try:
            value = RegisterValue(_TOKEN_TO_PREFER[prefer_s], int(round_s))
        except (KeyError, ValueError) as exc:
            raise TraceFormatError(f"bad value in {line!r}: {exc}") from exc
    if kind in _VALUED_KINDS and value is None:
        raise TraceFormatError(f"{kind.value} events carry a value: {line!r}")
    try:
        return TraceEvent(
            seq=int(seq_s),
            pid=int(pid_s),
            kind=kind,
            target=None if target_s == "-" else int(target_s),
            value=value,
            line=None if site == "-" else site,
        )
    except ValueError as exc:
        raise TraceFormatError(f"bad event line {line!r}: {exc}") from exc


def parse_trace(text: str | Iterable[str]) -> Trace:
    lines = text.splitlines() if isinstance(text, str) else list(text)
    lines = [ln.strip() for ln in lines if ln.strip()]
    if not lines:
        raise TraceFormatError("empty trace file")
    config = parse_config(lines[0])
    events = tuple(_parse_event(ln) for ln in lines[1:])
    for pos, ev in enumerate(events):
        if ev.seq != pos:
            raise TraceFormatError(f"event sequence gap at index {pos} (seq {ev.seq})")
    return Trace(config=config, events=events)
