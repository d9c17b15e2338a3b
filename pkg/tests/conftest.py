from __future__ import annotations

from regsim import EventKind, RegisterValue, SystemConfig, Trace, TraceEvent

KIND_ALIASES = {
    "iw": EventKind.INVOKE_WRITE,
    "rw": EventKind.RESPOND_WRITE,
    "ir": EventKind.INVOKE_READ,
    "rr": EventKind.RESPOND_READ,
    "flip": EventKind.FLIP,
    "decide": EventKind.DECIDE,
    "crash": EventKind.CRASH,
}


def ev(seq, pid, kind, target=None, value=None, line=None):
    if isinstance(value, tuple):
        value = RegisterValue(*value)
    if isinstance(kind, str):
        kind = KIND_ALIASES[kind]
    return TraceEvent(seq, pid, kind, target, value, line)


def build_trace(steps, n=2, proposals=None, max_events=100_000, model="regular"):
    """Hand-build a trace from (pid, kind, target, value, line) tuples.

    Sequence numbers are assigned densely in order; value tuples become
    RegisterValues.
    """
    if proposals is None:
        proposals = tuple(pid % 2 for pid in range(n))
    events = []
    for seq, step in enumerate(steps):
        pid, kind, target, value, line = (list(step) + [None, None, None])[:5]
        events.append(ev(seq, pid, kind, target, value, line))
    config = SystemConfig(
        n=n,
        proposals=tuple(proposals),
        model=model,
        adversary="hand_built",
        max_events=max_events,
    )
    return Trace(config=config, events=tuple(events))
