"""Command-line interface.

Subcommands: ``run`` (one seeded run), ``campaign`` (Monte Carlo statistics),
``explore`` (bounded exhaustive exploration), ``attack`` (the scripted
linearization attack), ``check`` (run all monitors over a trace file), and
``forced`` (forced-coin conditional experiments). Exit codes: 0 clean, 1
monitor violation, 2 configuration error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .adversary import ADVERSARIES, ScenarioBrokenError
from .core import (
    MODELS,
    SystemConfig,
    Trace,
    TraceFormatError,
    parse_trace,
    serialize_trace,
)
from .explorer import GOALS, BoundTooLargeError, ExplorationConfig, explore
from .harness import attack_demo, forced_coin_experiment, run_campaign, run_once
from .monitors import run_standard_monitors

EXIT_OK = 0
EXIT_VIOLATION = 1
EXIT_CONFIG = 2


def _parse_proposals(text: str, n: int) -> tuple[int, ...]:
    if text:
        return tuple(int(p) for p in text.split(","))
    # Default: alternate proposals so both values are in play.
    return tuple(pid % 2 for pid in range(n))


def _load_config_file(path: str) -> dict[str, str]:
    values: dict[str, str] = {}
    for raw in Path(path).read_text().splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ValueError(f"bad config line {raw!r}")
        values[key.strip()] = value.strip()
    return values


def _apply_config_file(args: argparse.Namespace) -> None:
    if not getattr(args, "config", None):
        return
    file_values = _load_config_file(args.config)
    mapping = {
        "n": int,
        "proposals": str,
        "model": str,
        "adversary": str,
        "seed": int,
        "runs": int,
        "max_events": int,
        "crash_budget": int,
        "round_cap": int,
    }
    for key, cast in mapping.items():
        if key in file_values and hasattr(args, key) and getattr(args, key) is None:
            setattr(args, key, cast(file_values[key]))


def _system_config(args: argparse.Namespace) -> SystemConfig:
    n = args.n if args.n is not None else 2
    return SystemConfig(
        n=n,
        proposals=_parse_proposals(args.proposals or "", n),
        model=args.model or "regular",
        adversary=args.adversary or "round_robin",
        seed=args.seed if args.seed is not None else 0,
        max_events=args.max_events if args.max_events is not None else 100_000,
        crash_budget=args.crash_budget if args.crash_budget is not None else 0,
    )


def _print_verdicts(trace: Trace) -> bool:
    bad = False
    for verdict in run_standard_monitors(trace):
        witness = ",".join(str(w) for w in verdict.witness)
        note = f" ({verdict.note})" if verdict.note else ""
        extra = f" witness={witness}" if witness else ""
        print(f"{verdict.name}: {verdict.status}{extra}{note}")
        if verdict.status == "VIOLATION":
            bad = True
    return bad


def _cmd_run(args: argparse.Namespace) -> int:
    config = _system_config(args)
    trace = run_once(config)
    print(f"events={len(trace.events)}")
    print(f"capped={'yes' if trace.capped else 'no'}")
    if args.trace_out:
        Path(args.trace_out).write_text(serialize_trace(trace))
        print(f"trace_out={args.trace_out}")
    if args.no_check:
        return EXIT_OK
    return EXIT_VIOLATION if _print_verdicts(trace) else EXIT_OK


def _cmd_campaign(args: argparse.Namespace) -> int:
    config = _system_config(args)
    runs = args.runs if args.runs is not None else 1000
    stats = run_campaign(config, runs, config.seed)
    for line in stats.to_kv_lines():
        print(line)
    return EXIT_VIOLATION if stats.monitor_violations else EXIT_OK


def _cmd_explore(args: argparse.Namespace) -> int:
    n = args.n if args.n is not None else 2
    cfg = ExplorationConfig(
        n=n,
        proposals=_parse_proposals(args.proposals or "", n),
        model=args.model or "regular",
        max_events=args.max_events if args.max_events is not None else 200,
        round_cap=args.round_cap if args.round_cap is not None else 4,
        crash_budget=args.crash_budget if args.crash_budget is not None else 0,
        search_goal=args.goal,
        memoize=not args.no_memo,
        stop_on_witness=not args.all_witnesses,
        node_budget=args.node_budget,
    )
    report = explore(cfg)
    print(f"executions_explored={report.executions_explored}")
    print(f"truncated={report.truncated}")
    print(f"nodes={report.nodes}")
    print(f"unique_states={report.unique_states}")
    print(f"violations={sum(report.violation_counts.values())}")
    for name in sorted(report.violation_counts):
        print(f"violation.{name}={report.violation_counts[name]}")
    print(f"witnesses={report.witness_count}")
    if args.trace_out:
        out_dir = Path(args.trace_out)
        out_dir.mkdir(parents=True, exist_ok=True)
        for pos, (name, trace) in enumerate(report.violations):
            (out_dir / f"violation_{pos}_{name}.trace").write_text(serialize_trace(trace))
        for pos, (goal, trace) in enumerate(report.witnesses):
            (out_dir / f"witness_{pos}_{goal}.trace").write_text(serialize_trace(trace))
    return EXIT_VIOLATION if report.violation_counts else EXIT_OK


def _cmd_attack(args: argparse.Namespace) -> int:
    report = attack_demo(
        args.runs,
        args.seed if args.seed is not None else 0,
        n=args.n if args.n is not None else 2,
        model=args.model or "linearizable",
    )
    for line in report.to_kv_lines():
        print(line)
    ok = report.all_mismatched and report.all_completed_before_flip
    print(f"attack_reproduced={'yes' if ok else 'no'}")
    return EXIT_OK if ok else EXIT_VIOLATION


def _cmd_forced(args: argparse.Namespace) -> int:
    config = _system_config(args)
    runs = args.runs if args.runs is not None else 1000
    summary = forced_coin_experiment(
        config,
        args.round,
        runs,
        config.seed,
        invert=args.invert,
    )
    for line in summary.to_kv_lines():
        print(line)
    if args.invert:
        return EXIT_OK if summary.violation_runs == 0 else EXIT_VIOLATION
    ok = summary.all_fired and summary.all_pass_when_fired
    return EXIT_OK if ok else EXIT_VIOLATION


def _cmd_check(args: argparse.Namespace) -> int:
    try:
        trace = parse_trace(Path(args.trace).read_text())
    except (OSError, TraceFormatError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return EXIT_VIOLATION if _print_verdicts(trace) else EXIT_OK


def _add_common(parser: argparse.ArgumentParser, *, runs: bool = False) -> None:
    parser.add_argument("--n", type=int, default=None, help="number of processes")
    parser.add_argument("--proposals", default=None, help="comma-separated 0/1 proposals")
    parser.add_argument("--model", choices=MODELS, default=None)
    parser.add_argument("--adversary", choices=sorted(ADVERSARIES), default=None)
    parser.add_argument("--seed", type=int, default=None)
    parser.add_argument("--max-events", dest="max_events", type=int, default=None)
    parser.add_argument("--crash-budget", dest="crash_budget", type=int, default=None)
    parser.add_argument("--config", default=None, help="key=value config file")
    if runs:
        parser.add_argument("--runs", type=int, default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="regsim",
        description=(
            "Simulate randomized shared-memory consensus over atomic, regular,"
            " or linearizable registers, and check every claimed property on"
            " the resulting traces."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="one seeded run, with monitors")
    _add_common(p_run)
    p_run.add_argument("--trace-out", dest="trace_out", default=None)
    p_run.add_argument("--no-check", action="store_true", help="skip the monitor suite")
    p_run.set_defaults(func=_cmd_run)

    p_camp = sub.add_parser("campaign", help="seeded Monte Carlo campaign")
    _add_common(p_camp, runs=True)
    p_camp.set_defaults(func=_cmd_campaign)

    p_exp = sub.add_parser("explore", help="bounded exhaustive exploration")
    _add_common(p_exp)
    p_exp.add_argument("--round-cap", dest="round_cap", type=int, default=None)
    p_exp.add_argument("--goal", choices=GOALS, default=None)
    p_exp.add_argument("--no-memo", action="store_true")
    p_exp.add_argument("--all-witnesses", action="store_true")
    p_exp.add_argument("--node-budget", dest="node_budget", type=int, default=5_000_000)
    p_exp.add_argument("--trace-out", dest="trace_out", default=None)
    p_exp.set_defaults(func=_cmd_explore)

    p_atk = sub.add_parser("attack", help="scripted linearization attack demo")
    p_atk.add_argument("--runs", type=int, default=1000)
    p_atk.add_argument("--seed", type=int, default=None)
    p_atk.add_argument("--n", type=int, default=None)
    p_atk.add_argument("--model", choices=MODELS, default=None)
    p_atk.set_defaults(func=_cmd_attack)

    p_forced = sub.add_parser("forced", help="forced-coin conditional experiment")
    _add_common(p_forced, runs=True)
    p_forced.add_argument("--round", type=int, required=True, help="target round (>= 2)")
    p_forced.add_argument("--invert", action="store_true",
                          help="return the complement at the target round")
    p_forced.set_defaults(func=_cmd_forced)

    p_check = sub.add_parser("check", help="run all monitors over a trace file")
    p_check.add_argument("trace")
    p_check.set_defaults(func=_cmd_check)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        _apply_config_file(args)
        return args.func(args)
    except (ValueError, ScenarioBrokenError, BoundTooLargeError, TraceFormatError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
