"""Trace monitors: machine-checkable verdicts over execution histories.

Every monitor is a pure function Trace -> Verdict (same trace, same verdict).
End-state monitors check the consensus properties (validity, agreement); the
write-discipline and ladder monitors check structural claims about which
(value, round) writes can appear; the conditional monitors check that matched
coin flips make a round uncontested and force decisions. Liveness-flavored
consequents are reported VACUOUS on capped traces, and processes still live
when a trace ends are never counted against them.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .core import (
    BOT,
    EventKind,
    RegisterValue,
    Trace,
    Verdict,
    complement,
)
from .protocol import evaluate
from .registers import check_regular_all


@dataclass(slots=True)
class _Index:
    """Single-pass extraction of the event groups the monitors consume."""

    invokes: list[tuple[int, int, int | None, int]] = field(default_factory=list)
    responds: list[tuple[int, int, int | None, int]] = field(default_factory=list)
    flips: list[tuple[int, int, int, int]] = field(default_factory=list)
    decides: list[tuple[int, int, int, int]] = field(default_factory=list)
    crashed: set[int] = field(default_factory=set)
    decided_by: dict[int, tuple[int, int]] = field(default_factory=dict)

    @classmethod
    def of(cls, trace: Trace) -> "_Index":
        idx = cls()
        for ev in trace.events:
            if ev.kind is EventKind.INVOKE_WRITE:
                value = ev.value
                idx.invokes.append(
                    (ev.seq, ev.pid, None if value is None else value.prefer,
                     -1 if value is None else value.round)
                )
            elif ev.kind is EventKind.RESPOND_WRITE:
                value = ev.value
                idx.responds.append(
                    (ev.seq, ev.pid, None if value is None else value.prefer,
                     -1 if value is None else value.round)
                )
            elif ev.kind is EventKind.FLIP:
                idx.flips.append((ev.seq, ev.pid, ev.value.prefer, ev.value.round))
            elif ev.kind is EventKind.DECIDE:
                idx.decides.append((ev.seq, ev.pid, ev.value.prefer, ev.value.round))
                idx.decided_by[ev.pid] = (ev.value.prefer, ev.value.round)
            elif ev.kind is EventKind.CRASH:
                idx.crashed.add(ev.pid)
        return idx

    def live_processes(self, n: int) -> set[int]:
        """Processes neither decided nor crashed when the trace ends."""
        return {pid for pid in range(n) if pid not in self.decided_by and pid not in self.crashed}


def _index(trace: Trace, idx: _Index | None) -> _Index:
    return idx if idx is not None else _Index.of(trace)


# --------------------------------------------------------------------------
# End-state consensus properties
# --------------------------------------------------------------------------


def check_validity(trace: Trace, idx: _Index | None = None) -> Verdict:
    """Every decided value was proposed by some process."""
    idx = _index(trace, idx)
    proposed = set(trace.config.proposals)
    for seq, pid, prefer, _ in idx.decides:
        if prefer not in proposed:
            return Verdict(
                "validity", "VIOLATION", witness=(seq,),
                note=f"process {pid} decided {prefer}, proposed values are {sorted(proposed)}",
            )
    if not idx.decides:
        return Verdict("validity", "PASS", note="no decisions (vacuously valid)")
    return Verdict("validity", "PASS")


def check_agreement(trace: Trace, idx: _Index | None = None) -> Verdict:
    """No two processes decide different values."""
    idx = _index(trace, idx)
    seen: dict[int, int] = {}
    for seq, pid, prefer, _ in idx.decides:
        for other_prefer, other_seq in seen.items():
            if other_prefer != prefer:
                return Verdict(
                    "agreement", "VIOLATION", witness=(other_seq, seq),
                    note=f"decisions {other_prefer} and {prefer} both occurred",
                )
        seen.setdefault(prefer, seq)
    return Verdict("agreement", "PASS")


# --------------------------------------------------------------------------
# Write discipline (structural claims about write invocations)
# --------------------------------------------------------------------------


def check_write_discipline(trace: Trace, idx: _Index | None = None) -> list[Verdict]:
    """Per-clause write-invocation discipline.

    (a) written preferences stay in {0, 1, BOT}; (b) a process invokes a given
    (value, round) write at most once; (c) no process writes both values at one
    round; (d) per process, invoked rounds never decrease; (e) a pause write at
    round r follows the same process's value write at round r -- reported in
    both the invoked form and the stricter completed form.
    """
    idx = _index(trace, idx)
    domain = Verdict("write_domain", "PASS")
    once = Verdict("write_once", "PASS")
    one_value = Verdict("one_value_per_round", "PASS")
    monotonic = Verdict("round_monotonic", "PASS")
    pause_inv = Verdict("pause_follows_value", "PASS")
    pause_comp = Verdict("pause_follows_completed_value", "PASS")

    seen_pairs: dict[tuple[int, int | None, int], int] = {}
    last_round: dict[int, int] = {}
    value_rounds: dict[tuple[int, int], set[int]] = {}
    completed_value_rounds: dict[tuple[int, int], set[int]] = {}
    responds_by_seq = sorted(idx.responds)
    resp_pos = 0
    pauses = 0

    for seq, pid, prefer, rnd in idx.invokes:
        # Advance the completed-writes cursor up to this invocation.
        while resp_pos < len(responds_by_seq) and responds_by_seq[resp_pos][0] < seq:
            _, rpid, rprefer, rrnd = responds_by_seq[resp_pos]
            if rprefer in (0, 1):
                completed_value_rounds.setdefault((rpid, rrnd), set()).add(rprefer)
            resp_pos += 1
        if domain.status == "PASS" and (prefer not in (0, 1, BOT) or rnd < 0):
            domain = Verdict("write_domain", "VIOLATION", witness=(seq,),
                             note=f"process {pid} wrote a malformed value")
        key = (pid, prefer, rnd)
        if key in seen_pairs:
            if once.status == "PASS":
                once = Verdict("write_once", "VIOLATION", witness=(seen_pairs[key], seq),
                               note=f"process {pid} invoked the ({prefer}, {rnd}) write twice")
        else:
            seen_pairs[key] = seq
        if prefer in (0, 1):
            other = (pid, complement(prefer), rnd)
            if other in seen_pairs and one_value.status == "PASS":
                one_value = Verdict(
                    "one_value_per_round", "VIOLATION", witness=(seen_pairs[other], seq),
                    note=f"process {pid} invoked both value writes at round {rnd}",
                )
            value_rounds.setdefault((pid, rnd), set()).add(prefer)
        if pid in last_round and rnd < last_round[pid] and monotonic.status == "PASS":
            monotonic = Verdict("round_monotonic", "VIOLATION", witness=(seq,),
                                note=f"process {pid} went from round {last_round[pid]} to {rnd}")
        last_round[pid] = max(last_round.get(pid, 0), rnd)
        if prefer is BOT and rnd >= 1:
            pauses += 1
            if not value_rounds.get((pid, rnd)) and pause_inv.status == "PASS":
                pause_inv = Verdict(
                    "pause_follows_value", "VIOLATION", witness=(seq,),
                    note=f"process {pid} paused at round {rnd} without a prior value write",
                )
            if not completed_value_rounds.get((pid, rnd)) and pause_comp.status == "PASS":
                pause_comp = Verdict(
                    "pause_follows_completed_value", "VIOLATION", witness=(seq,),
                    note=f"process {pid} paused at round {rnd} without a completed value write",
                )
    if pauses == 0:
        if pause_inv.status == "PASS":
            pause_inv = Verdict("pause_follows_value", "PASS", note="no pause writes")
        if pause_comp.status == "PASS":
            pause_comp = Verdict("pause_follows_completed_value", "PASS", note="no pause writes")
    return [domain, once, one_value, monotonic, pause_inv, pause_comp]


def check_round_progress(trace: Trace, idx: _Index | None = None) -> Verdict:
    """An undecided process's invoked rounds keep advancing.

    Consecutive write invocations either increase the round or hold it exactly
    once, for a pause directly after a value write; two same-round writes in
    any other shape mean the round counter stalled.
    """
    idx = _index(trace, idx)
    last: dict[int, tuple[int, int | None]] = {}
    pairs = 0
    for seq, pid, prefer, rnd in idx.invokes:
        if pid in last:
            pairs += 1
            prev_round, prev_prefer = last[pid]
            held = rnd == prev_round and prefer is BOT and prev_prefer is not BOT
            if rnd < prev_round or (rnd == prev_round and not held):
                return Verdict(
                    "round_progress", "VIOLATION", witness=(seq,),
                    note=f"process {pid} stalled at round {rnd}",
                )
        last[pid] = (rnd, prefer)
    if pairs == 0:
        return Verdict("round_progress", "VACUOUS", note="no process invoked two writes")
    return Verdict("round_progress", "PASS")


# --------------------------------------------------------------------------
# Preference-switch witnesses
# --------------------------------------------------------------------------


def _first_invocations(idx: _Index) -> dict[tuple[int, int | None, int], int]:
    first: dict[tuple[int, int | None, int], int] = {}
    for seq, pid, prefer, rnd in idx.invokes:
        first.setdefault((pid, prefer, rnd), seq)
    return first


def _switch_witness(
    trace: Trace, idx: _Index | None, name: str, adjacent_only: bool
) -> Verdict:
    idx = _index(trace, idx)
    first = _first_invocations(idx)
    n = trace.config.n
    max_round = max((rnd for _, _, _, rnd in idx.invokes), default=0)
    # earliest[v][p][r]: earliest invoke of value v at round >= r by any q != p.
    big = float("inf")
    earliest: dict[int, list[list[float]]] = {
        v: [[big] * (max_round + 2) for _ in range(n + 1)] for v in (0, 1)
    }
    for seq, pid, prefer, rnd in idx.invokes:
        if prefer in (0, 1) and 1 <= rnd <= max_round:
            table = earliest[prefer]
            for p in range(n + 1):
                if p != pid and seq < table[p][rnd]:
                    table[p][rnd] = seq
    for v in (0, 1):
        for p in range(n + 1):
            row = earliest[v][p]
            for r in range(max_round - 1, 0, -1):
                if row[r + 1] < row[r]:
                    row[r] = row[r + 1]
    by_process: dict[tuple[int, int], list[tuple[int, int]]] = {}
    for (pid, prefer, rnd), s1 in first.items():
        if prefer in (0, 1):
            by_process.setdefault((pid, prefer), []).append((rnd, s1))
    instances = 0
    for (pid, prefer, rnd), s1 in first.items():
        if prefer not in (0, 1):
            continue
        opp = complement(prefer)
        if adjacent_only:
            targets = [rnd + 1]
        else:
            targets = [r2 for r2, _ in by_process.get((pid, opp), ()) if r2 > rnd]
        for r2 in targets:
            s2 = first.get((pid, opp, r2))
            if s2 is None or s2 <= s1:
                continue
            instances += 1
            lookup_pid = pid if pid < n else n
            if earliest[opp][lookup_pid][rnd] >= s2:
                return Verdict(
                    name, "VIOLATION", witness=(s1, s2),
                    note=(
                        f"process {pid} switched from {prefer}@{rnd} to {opp}@{r2}"
                        " with no earlier opposing write by another process"
                    ),
                )
    if instances == 0:
        return Verdict(name, "VACUOUS", note="no preference switch occurred")
    return Verdict(name, "PASS", note=f"{instances} switches witnessed")


def check_switch_witness(trace: Trace, idx: _Index | None = None) -> Verdict:
    """A switch from (v, r) straight to (opp, r+1) needs a prior opposing write.

    Whenever a process invokes the value-v write at round r and then the
    opposite value at round r+1, some other process must have invoked the
    opposite value at a round >= r strictly earlier.
    """
    return _switch_witness(trace, idx, "switch_witness", adjacent_only=True)


def check_switch_witness_general(trace: Trace, idx: _Index | None = None) -> Verdict:
    """Generalized switch witness: any jump from (v, r) to (opp, r') with r' > r."""
    return _switch_witness(trace, idx, "switch_witness_general", adjacent_only=False)


# --------------------------------------------------------------------------
# Round ladders: rounds are reached stepwise, per value and for pauses
# --------------------------------------------------------------------------


def _ladder_scan(idx: _Index, check_values: bool, check_pauses: bool, name: str) -> Verdict:
    rounds_seen: dict[int, set[int]] = {0: set(), 1: set()}
    for seq, pid, prefer, rnd in idx.invokes:
        if prefer in (0, 1):
            if check_values:
                for j in range(1, rnd):
                    if j not in rounds_seen[prefer]:
                        return Verdict(
                            name, "VIOLATION", witness=(seq,),
                            note=f"value {prefer} reached round {rnd} but round {j} was never written",
                        )
            rounds_seen[prefer].add(rnd)
        elif prefer is BOT and check_pauses:
            for value in (0, 1):
                for j in range(1, rnd + 1):
                    if j not in rounds_seen[value]:
                        return Verdict(
                            name, "VIOLATION", witness=(seq,),
                            note=(
                                f"pause at round {rnd} but value {value} was never"
                                f" written at round {j}"
                            ),
                        )
    return Verdict(name, "PASS")


def check_value_ladder(trace: Trace, idx: _Index | None = None) -> Verdict:
    """A value appears at round r only after appearing at every round below r.

    Equivalent prefix form: if nobody has invoked the value-v write at round r
    by some time, nobody has invoked it at any round >= r by that time.
    """
    return _ladder_scan(_index(trace, idx), True, False, "value_ladder")


def check_pause_ladder(trace: Trace, idx: _Index | None = None) -> Verdict:
    """A pause at round r requires both values to have reached every round <= r."""
    return _ladder_scan(_index(trace, idx), False, True, "pause_ladder")


def check_uncontested_value(trace: Trace, idx: _Index | None = None) -> Verdict:
    """Once a value is missing at round r, every write at rounds >= r carries the other.

    Combines the two ladders: by any prefix time, a value write needs its own
    ladder below it and a pause write needs both ladders up to its round.
    """
    return _ladder_scan(_index(trace, idx), True, True, "uncontested_value")


# --------------------------------------------------------------------------
# Decision exclusion and forced decisions
# --------------------------------------------------------------------------


def check_decision_round_uncontested(trace: Trace, idx: _Index | None = None) -> Verdict:
    """If a process decides v at round r, nobody ever invokes the opposite write at r."""
    idx = _index(trace, idx)
    name = "decision_round_uncontested"
    if not idx.decides:
        return Verdict(name, "VACUOUS", note="no decisions")
    for d_seq, d_pid, d_prefer, d_round in idx.decides:
        opp = complement(d_prefer)
        for seq, pid, prefer, rnd in idx.invokes:
            if prefer == opp and rnd == d_round:
                return Verdict(
                    name, "VIOLATION", witness=(d_seq, seq),
                    note=(
                        f"process {d_pid} decided {d_prefer} at round {d_round}"
                        f" but process {pid} invoked the opposite write there"
                    ),
                )
    return Verdict(name, "PASS")


def check_uncontested_forces_decision(trace: Trace, idx: _Index | None = None) -> Verdict:
    """If no opposite write exists at round r, round-(r+1) writers decide v at r+1.

    Correct processes only: crashed processes are exempt and processes still
    live at the end of the trace cannot be judged. VACUOUS on capped traces.
    """
    idx = _index(trace, idx)
    name = "uncontested_forces_decision"
    if trace.capped:
        return Verdict(name, "VACUOUS", note="trace hit the event cap")
    invoked_pairs = {(prefer, rnd) for _, _, prefer, rnd in idx.invokes if prefer in (0, 1)}
    rounds = [rnd for _, _, _, rnd in idx.invokes]
    if not rounds:
        return Verdict(name, "VACUOUS", note="no writes")
    live = idx.live_processes(trace.config.n)
    max_round = max(rounds)
    invokers_by_round: dict[int, set[int]] = {}
    for _, pid, _, rnd in idx.invokes:
        invokers_by_round.setdefault(rnd, set()).add(pid)
    checked = 0
    for r in range(1, max_round + 1):
        for v in (0, 1):
            if (complement(v), r) in invoked_pairs:
                continue
            for pid in sorted(invokers_by_round.get(r + 1, ())):
                if pid in idx.crashed or pid in live:
                    continue
                if idx.decided_by[pid] != (v, r + 1):
                    d_seq = next(s for s, p, _, _ in idx.decides if p == pid)
                    return Verdict(
                        name, "VIOLATION", witness=(d_seq,),
                        note=(
                            f"round {r} is uncontested for {v} but process {pid}"
                            f" decided {idx.decided_by[pid]} instead of ({v}, {r + 1})"
                        ),
                    )
                checked += 1
    if checked == 0:
        return Verdict(name, "VACUOUS", note="antecedent never fired")
    return Verdict(name, "PASS", note=f"{checked} decisions checked")


def _matched_flip_instances(idx: _Index) -> list[tuple[int, int, int]]:
    """Rounds r >= 2 whose flips all matched the first-completed (r-1) value.

    Returns (r, v, completion seq) per instance; a round with no flips matches
    vacuously. The first-completed write at r-1 cannot be a pause write in a
    protocol trace, and malformed traces where it is are skipped.
    """
    first_completion: dict[int, tuple[int, int | None]] = {}
    for seq, _, prefer, rnd in idx.responds:
        if rnd >= 1 and rnd not in first_completion:
            first_completion[rnd] = (seq, prefer)
    flips_by_round: dict[int, list[int]] = {}
    for _, _, prefer, rnd in idx.flips:
        flips_by_round.setdefault(rnd, []).append(prefer)
    instances = []
    for r_prev, (seq, v) in sorted(first_completion.items()):
        r = r_prev + 1
        if r < 2 or v not in (0, 1):
            continue
        if any(outcome != v for outcome in flips_by_round.get(r, [])):
            continue
        instances.append((r, v, seq))
    return instances


def check_matched_flips_uncontested(trace: Trace, idx: _Index | None = None) -> Verdict:
    """If all round-r flips equal the first-completed round-(r-1) value v,
    nobody invokes the opposite write at round r."""
    idx = _index(trace, idx)
    name = "matched_flips_uncontested"
    instances = _matched_flip_instances(idx)
    if not instances:
        return Verdict(name, "VACUOUS", note="no round with matching flips")
    for r, v, _ in instances:
        opp = complement(v)
        for seq, pid, prefer, rnd in idx.invokes:
            if prefer == opp and rnd == r:
                return Verdict(
                    name, "VIOLATION", witness=(seq,),
                    note=(
                        f"flips at round {r} all matched {v} but process {pid}"
                        f" invoked the opposite write"
                    ),
                )
    return Verdict(name, "PASS", note=f"{len(instances)} rounds checked")


def check_matched_flips_decide(trace: Trace, idx: _Index | None = None) -> Verdict:
    """If all round-r flips equal the first-completed round-(r-1) value,
    every correct process decides by round r+1. VACUOUS on capped traces."""
    idx = _index(trace, idx)
    name = "matched_flips_decide"
    if trace.capped:
        return Verdict(name, "VACUOUS", note="trace hit the event cap")
    instances = _matched_flip_instances(idx)
    if not instances:
        return Verdict(name, "VACUOUS", note="no round with matching flips")
    live = idx.live_processes(trace.config.n)
    checked = 0
    for r, v, _ in instances:
        for pid in range(trace.config.n):
            if pid in idx.crashed or pid in live:
                continue
            _, decided_round = idx.decided_by[pid]
            if decided_round > r + 1:
                d_seq = next(s for s, p, _, _ in idx.decides if p == pid)
                return Verdict(
                    name, "VIOLATION", witness=(d_seq,),
                    note=(
                        f"flips at round {r} all matched but process {pid}"
                        f" decided only at round {decided_round}"
                    ),
                )
            checked += 1
    if checked == 0:
        return Verdict(name, "VACUOUS", note="no correct process to check")
    return Verdict(name, "PASS", note=f"{checked} decisions checked")


# --------------------------------------------------------------------------
# New-old inversion finder
# --------------------------------------------------------------------------


def find_new_old_inversion(trace: Trace, register: int | None = None) -> Verdict:
    """Search for a new-old inversion: two reads by one process, both
    concurrent with one write, where the earlier read returns the new value
    and the later read returns the preceding one.

    For a sequential-writer register this is exactly a decrease in the
    returned writer ordinal across a reader's completed reads. PASS with a
    witness when found, VACUOUS otherwise.
    """
    name = "new_old_inversion" if register is None else f"new_old_inversion[{register}]"
    registers = range(trace.config.n) if register is None else (register,)
    whole: dict[int, list[tuple[int, RegisterValue]]] = {reg: [] for reg in registers}
    for ev in trace.events:
        if ev.kind is EventKind.INVOKE_WRITE and ev.target in whole:
            whole[ev.target].append((ev.seq, ev.value))
    best: dict[tuple[int, int], tuple[int, int]] = {}  # (reader, reg) -> (ordinal, seq)
    read_invokes: dict[tuple[int, int], int] = {}
    for ev in trace.events:
        if ev.target not in whole:
            continue
        if ev.kind is EventKind.INVOKE_READ:
            read_invokes[(ev.pid, ev.target)] = ev.seq
        elif ev.kind is EventKind.RESPOND_READ:
            writes = whole[ev.target]
            ordinal = 0
            for pos in range(len(writes) - 1, -1, -1):
                w_seq, w_value = writes[pos]
                if w_seq < ev.seq and w_value == ev.value:
                    ordinal = pos + 1
                    break
            key = (ev.pid, ev.target)
            prev = best.get(key)
            if prev is not None and ordinal < prev[0]:
                return Verdict(
                    name, "PASS", witness=(prev[1], ev.seq),
                    note=(
                        f"reader {ev.pid} on register {ev.target}: read at"
                        f" {prev[1]} returned write {prev[0]}, later read at"
                        f" {ev.seq} returned write {ordinal}"
                    ),
                )
            if prev is None or ordinal > prev[0]:
                best[key] = (ordinal, ev.seq)
    return Verdict(name, "VACUOUS", note="no new-old inversion")


# --------------------------------------------------------------------------
# Well-formedness: control-flow replay
# --------------------------------------------------------------------------


def check_well_formed(trace: Trace) -> Verdict:
    """Replay the protocol's control flow over the trace.

    Checks dense event numbering, one pending operation per process, writes
    only to the owner's register, reads covering each register once per
    iteration, branch selection matching the evaluation of the collected view,
    coin writes matching their flip outcome, and silence after decide/crash.
    """
    name = "well_formed"
    n = trace.config.n

    def bad(seq: int, why: str) -> Verdict:
        return Verdict(name, "VIOLATION", witness=(seq,), note=why)

    class Shadow:
        __slots__ = ("phase", "expect", "line", "view", "pending_target", "captured")

        def __init__(self, pid: int):
            self.phase = "write_invoke"
            self.expect = RegisterValue(trace.config.proposals[pid], 1)
            self.line = "init"
            self.view: dict[int, RegisterValue] = {}
            self.pending_target: int | None = None
            self.captured: RegisterValue | None = None

    shadows = [Shadow(pid) for pid in range(n)]
    for pos, ev in enumerate(trace.events):
        if ev.seq != pos:
            return bad(ev.seq, f"event numbering gap at position {pos}")
        if not (0 <= ev.pid < n):
            return bad(ev.seq, f"unknown process {ev.pid}")
        shadow = shadows[ev.pid]
        if shadow.phase in ("decided", "crashed"):
            return bad(ev.seq, f"event by halted process {ev.pid}")
        kind = ev.kind
        if kind is EventKind.CRASH:
            shadow.phase = "crashed"
            continue
        if kind is EventKind.INVOKE_WRITE:
            if shadow.phase != "write_invoke":
                return bad(ev.seq, f"process {ev.pid} has no write to invoke")
            if ev.target != ev.pid:
                return bad(ev.seq, "write to a register the process does not own")
            if ev.value != shadow.expect or ev.line != shadow.line:
                return bad(ev.seq, f"unexpected write {ev.value} at site {ev.line}")
            shadow.phase = "write_respond"
        elif kind is EventKind.RESPOND_WRITE:
            if shadow.phase != "write_respond":
                return bad(ev.seq, f"process {ev.pid} has no pending write")
            if ev.target != ev.pid or ev.value != shadow.expect or ev.line != shadow.line:
                return bad(ev.seq, "write response does not match its invocation")
            shadow.phase = "read_invoke"
            shadow.view = {}
        elif kind is EventKind.INVOKE_READ:
            if shadow.phase != "read_invoke":
                return bad(ev.seq, f"process {ev.pid} has no read to invoke")
            if ev.target is None or not (0 <= ev.target < n):
                return bad(ev.seq, "read of an unknown register")
            if ev.target in shadow.view:
                return bad(ev.seq, f"register {ev.target} read twice in one iteration")
            shadow.pending_target = ev.target
            shadow.phase = "read_respond"
        elif kind is EventKind.RESPOND_READ:
            if shadow.phase != "read_respond" or ev.target != shadow.pending_target:
                return bad(ev.seq, f"process {ev.pid} has no pending read here")
            if ev.value is None:
                return bad(ev.seq, "read response without a value")
            shadow.view[ev.target] = ev.value
            shadow.pending_target = None
            if len(shadow.view) < n:
                shadow.phase = "read_invoke"
                continue
            shadow.captured = shadow.view[ev.pid]
            action = evaluate(ev.pid, shadow.view, shadow.captured)
            if action.kind == "decide":
                shadow.phase = "decide"
            elif action.kind == "flip":
                shadow.phase = "flip"
            else:
                shadow.phase = "write_invoke"
                shadow.expect = action.value
                shadow.line = action.line
        elif kind is EventKind.FLIP:
            if shadow.phase != "flip":
                return bad(ev.seq, f"process {ev.pid} is not at a coin flip")
            if (
                ev.value is None
                or ev.value.prefer not in (0, 1)
                or ev.value.round != shadow.captured.round + 1
            ):
                return bad(ev.seq, f"malformed flip outcome {ev.value}")
            shadow.phase = "write_invoke"
            shadow.expect = ev.value
            shadow.line = "coin"
        elif kind is EventKind.DECIDE:
            if shadow.phase != "decide":
                return bad(ev.seq, f"process {ev.pid} may not decide here")
            if ev.value != shadow.captured:
                return bad(ev.seq, f"decided {ev.value} but captured {shadow.captured}")
            shadow.phase = "decided"
        else:
            return bad(ev.seq, f"unknown event kind {kind}")
    return Verdict(name, "PASS")


# --------------------------------------------------------------------------
# The full suite
# --------------------------------------------------------------------------


def run_standard_monitors(trace: Trace) -> list[Verdict]:
    """Run every monitor over one trace, in a stable order."""
    idx = _Index.of(trace)
    verdicts = [
        check_well_formed(trace),
        check_validity(trace, idx),
        check_agreement(trace, idx),
        *check_write_discipline(trace, idx),
        check_round_progress(trace, idx),
        check_switch_witness(trace, idx),
        check_switch_witness_general(trace, idx),
        check_value_ladder(trace, idx),
        check_pause_ladder(trace, idx),
        check_uncontested_value(trace, idx),
        check_decision_round_uncontested(trace, idx),
        check_uncontested_forces_decision(trace, idx),
        check_matched_flips_uncontested(trace, idx),
        check_matched_flips_decide(trace, idx),
        *check_regular_all(trace),
        find_new_old_inversion(trace),
    ]
    return verdicts


def violations(verdicts: list[Verdict]) -> list[Verdict]:
    return [v for v in verdicts if v.status == "VIOLATION"]
