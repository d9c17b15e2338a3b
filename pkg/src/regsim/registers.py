"""Operational models of single-writer multi-reader registers.

Three models share one write-history representation:

* ``atomic`` -- operations take effect at a single indivisible point (the
  engine fires invoke+respond back to back); a read returns the value of the
  last write invoked before its response.
* ``regular`` -- a read may return the last write that precedes it (or the
  initial value when no write precedes it) or any write concurrent with it;
  the adversary picks the return value from that legal set.
* ``linearizable`` -- each register keeps a committed linearization of its
  writes; a read returns the latest committed write. Writes commit at their
  response at the latest, but the adversary may commit a still-pending write
  early, and the cross-register order of concurrent writes stays open until
  somebody commits it through a :class:`LinearizationOrder`.

``check_regular`` is the post-hoc oracle: it recomputes every read's legal set
from the completed trace and flags reads outside it.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .core import (
    INITIAL_VALUE,
    PENDING,
    EventKind,
    OpInterval,
    RegisterValue,
    Trace,
    Verdict,
    precedes,
)


class IllegalChoiceError(RuntimeError):
    """The adversary proposed a read value outside the legal set."""


class OrderViolationError(RuntimeError):
    """A linearization commitment contradicts real-time precedence."""


@dataclass(slots=True)
class WriteRecord:
    """One write operation on a register: value, interval, per-writer ordinal."""

    value: RegisterValue
    invoke_time: int
    respond_time: int | None = PENDING
    writer_seq: int = 0

    @property
    def interval(self) -> OpInterval:
        return OpInterval(self.invoke_time, self.respond_time)

    def copy(self) -> WriteRecord:
        return WriteRecord(self.value, self.invoke_time, self.respond_time, self.writer_seq)


@dataclass(slots=True)
class RegisterState:
    """A single SWMR register: owner, write history, and pending reads.

    The owner is sequential, so writes are pairwise non-overlapping and at
    most the last write can be pending. ``committed`` counts the prefix of
    writes committed to the register's linearization (linearizable model
    only; unused elsewhere).
    """

    owner: int
    initial: RegisterValue = INITIAL_VALUE
    writes: list[WriteRecord] = field(default_factory=list)
    pending_reads: dict[int, int] = field(default_factory=dict)  # reader -> invoke seq
    committed: int = 0

    def invoke_write(self, value: RegisterValue, now: int) -> WriteRecord:
        if self.writes and self.writes[-1].respond_time is PENDING:
            raise RuntimeError(f"register {self.owner} already has a pending write")
        record = WriteRecord(value, now, PENDING, len(self.writes) + 1)
        self.writes.append(record)
        return record

    def respond_write(self, now: int) -> WriteRecord:
        record = self.writes[-1]
        if record.respond_time is not PENDING:
            raise RuntimeError(f"register {self.owner} has no pending write")
        record.respond_time = now
        return record

    def invoke_read(self, reader: int, now: int) -> None:
        if reader in self.pending_reads:
            raise RuntimeError(f"process {reader} already has a pending read here")
        self.pending_reads[reader] = now

    def value_by_writer_seq(self, writer_seq: int) -> RegisterValue:
        if writer_seq == 0:
            return self.initial
        return self.writes[writer_seq - 1].value

    def last_committed_value(self) -> RegisterValue:
        if self.committed == 0:
            return self.initial
        return self.writes[self.committed - 1].value

    def copy(self) -> RegisterState:
        dup = RegisterState(self.owner, self.initial)
        dup.writes = [w.copy() for w in self.writes]
        dup.pending_reads = dict(self.pending_reads)
        dup.committed = self.committed
        return dup


def legal_read_values(
    state: RegisterState, read: OpInterval, with_seq: bool = False
) -> list[RegisterValue] | list[tuple[int, RegisterValue]]:
    """Values a regular read with this interval may legally return.

    Evaluated at read-response time: a write precedes the read if it completed
    before the read's invocation; it is concurrent if it was invoked before
    the read's response and did not complete before the read's invocation.
    The result is ordered oldest-first (the preceding value, then concurrent
    writes by writer ordinal) and is never empty. With ``with_seq`` each entry
    is paired with its writer ordinal (0 for the initial value).
    """
    read_invoke = read.invoke_time
    read_respond = read.respond_time
    preceding: WriteRecord | None = None
    concurrents: list[WriteRecord] = []
    for record in state.writes:
        w_respond = record.respond_time
        if w_respond is not None and w_respond < read_invoke:
            preceding = record  # writer order == list order, so last wins
        elif read_respond is PENDING or record.invoke_time <= read_respond:
            concurrents.append(record)
        # Writes the read precedes cannot have been invoked yet in a live run;
        # they fall through here so post-hoc checks can use full histories.
    out: list[tuple[int, RegisterValue]] = []
    if preceding is not None:
        out.append((preceding.writer_seq, preceding.value))
    else:
        out.append((0, state.initial))
    out.extend((w.writer_seq, w.value) for w in concurrents)
    if with_seq:
        return out
    return [value for _, value in out]


def atomic_read_value(state: RegisterState) -> RegisterValue:
    """The atomic model's read return: the last write invoked so far."""
    if state.writes:
        return state.writes[-1].value
    return state.initial


def respond_read(
    state: RegisterState,
    reader: int,
    choice: RegisterValue | None,
    model: str,
    now: int,
) -> RegisterValue:
    """Complete ``reader``'s pending read on this register and return its value.

    For the regular model ``choice`` must be a member of the legal set
    (IllegalChoiceError otherwise, which signals an adversary bug). The atomic
    and linearizable models ignore ``choice``.
    """
    try:
        invoke_time = state.pending_reads.pop(reader)
    except KeyError:
        raise RuntimeError(f"process {reader} has no pending read on {state.owner}") from None
    if model == "atomic":
        return atomic_read_value(state)
    if model == "linearizable":
        # Any write that precedes this read has responded and is therefore
        # committed, so the latest committed write is never stale.
        return state.last_committed_value()
    read = OpInterval(invoke_time, now)
    legal = legal_read_values(state, read)
    if choice not in legal:
        raise IllegalChoiceError(
            f"read of register {state.owner} by {reader}: {choice!r} not in legal set {legal!r}"
        )
    return choice


def linearize_next(state: RegisterState, writer_seq: int) -> int:
    """Commit the register's pending operation ``writer_seq`` to its linearization.

    Commitments must extend the committed prefix in an order consistent with
    real-time precedence; because the single writer is sequential this means
    exactly the next uncommitted write may commit.
    """
    if writer_seq < 1 or writer_seq > len(state.writes):
        raise OrderViolationError(
            f"register {state.owner}: no write with ordinal {writer_seq}"
        )
    if writer_seq <= state.committed:
        raise OrderViolationError(
            f"register {state.owner}: write {writer_seq} is already committed"
        )
    if writer_seq != state.committed + 1:
        raise OrderViolationError(
            f"register {state.owner}: write {state.committed + 1} must commit before"
            f" {writer_seq} (it precedes it in real time)"
        )
    state.committed = writer_seq
    return state.committed


@dataclass(frozen=True, slots=True)
class LinearizableOp:
    """An operation fed to a :class:`LinearizationOrder` builder."""

    op_id: object
    interval: OpInterval


class LinearizationOrder:
    """Builds a total order over concurrent operations, one commitment at a time.

    Used post hoc to resolve the cross-register order of writes: an operation
    may be committed only once, and only after every operation that precedes
    it in real time has been committed.
    """

    def __init__(self, ops: list[LinearizableOp]):
        self._ops = {op.op_id: op for op in ops}
        if len(self._ops) != len(ops):
            raise ValueError("duplicate op ids")
        self.order: list[object] = []
        self._committed: set[object] = set()

    def commit(self, op_id: object) -> None:
        if op_id not in self._ops:
            raise OrderViolationError(f"unknown operation {op_id!r}")
        if op_id in self._committed:
            raise OrderViolationError(f"operation {op_id!r} committed twice")
        interval = self._ops[op_id].interval
        for other_id, other in self._ops.items():
            if other_id in self._committed:
                continue
            if precedes(other.interval, interval):
                raise OrderViolationError(
                    f"cannot commit {op_id!r} before {other_id!r}, which precedes it"
                )
        self._committed.add(op_id)
        self.order.append(op_id)

    def commit_all(self, op_ids: list[object]) -> list[object]:
        for op_id in op_ids:
            self.commit(op_id)
        return self.order


def _register_history(trace: Trace, register: int) -> tuple[RegisterState, list[tuple[int, int, int, RegisterValue]]]:
    """Rebuild a register's write history and completed reads from a trace.

    Tolerant of ill-formed traces (the oracle also runs over hand-mutated
    histories): writes are recorded as they appear, a response closes the
    oldest open write with a matching value, and read responses without an
    invocation are skipped. Returns (state, reads) where each read is
    (invoke, respond, reader, value).
    """
    state = RegisterState(owner=register)
    read_invokes: dict[int, int] = {}
    reads: list[tuple[int, int, int, RegisterValue]] = []
    for ev in trace.events:
        if ev.target != register:
            continue
        if ev.kind is EventKind.INVOKE_WRITE:
            state.writes.append(
                WriteRecord(ev.value, ev.seq, PENDING, len(state.writes) + 1)
            )
        elif ev.kind is EventKind.RESPOND_WRITE:
            for record in state.writes:
                if record.respond_time is PENDING and record.value == ev.value:
                    record.respond_time = ev.seq
                    break
        elif ev.kind is EventKind.INVOKE_READ:
            read_invokes[ev.pid] = ev.seq
        elif ev.kind is EventKind.RESPOND_READ:
            invoke = read_invokes.pop(ev.pid, None)
            if invoke is not None:
                reads.append((invoke, ev.seq, ev.pid, ev.value))
    return state, reads


def check_regular(trace: Trace, register: int) -> Verdict:
    """Post-hoc oracle: every completed read returned a legally regular value."""
    name = f"regular_reads[{register}]"
    state, reads = _register_history(trace, register)
    if not reads:
        return Verdict(name, "VACUOUS", note="no completed reads on this register")
    for invoke, respond, reader, value in reads:
        legal = legal_read_values(state, OpInterval(invoke, respond))
        if value not in legal:
            return Verdict(
                name,
                "VIOLATION",
                witness=(respond,),
                note=f"read by {reader} returned {value}, legal set {legal}",
            )
    return Verdict(name, "PASS", note=f"{len(reads)} reads checked")


def check_regular_all(trace: Trace) -> list[Verdict]:
    return [check_regular(trace, register) for register in range(trace.config.n)]
