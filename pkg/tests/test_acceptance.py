"""Acceptance suite: one test per acceptance criterion, at stated tolerances.

Each criterion prints a single PASS line once its assertions hold (run with
``pytest -s`` to see them). The Monte Carlo campaigns are shared across the
criteria that consume them. REGSIM_ACCEPTANCE_SCALE scales the run counts
down for quick development iterations; the default of 1 runs the full sizes.
"""

from __future__ import annotations

import os

import pytest

from trace_corpus import MUTATION_SUITE
from regsim import (
    ExplorationConfig,
    SystemConfig,
    attack_demo,
    explore,
    forced_coin_experiment,
    run_campaign,
    run_once,
    serialize_trace,
)
from regsim.adversary import GENERIC_ADVERSARIES
from regsim.monitors import run_standard_monitors

SCALE = float(os.environ.get("REGSIM_ACCEPTANCE_SCALE", "1"))


def scaled(count: int) -> int:
    return max(1, round(count * SCALE))


CAMPAIGN_RUNS = scaled(10_000)
FORCED_RUNS = scaled(1_000)
ATTACK_RUNS = scaled(1_000)
PROPOSALS = {2: (0, 1), 3: (0, 1, 0), 5: (0, 1, 0, 1, 0)}
SAFETY_MONITORS = ("validity", "agreement", "decision_round_uncontested")


def report(line: str) -> None:
    print(line, flush=True)


@pytest.fixture(scope="module")
def criterion1_reports():
    out = {}
    for budget in (0, 1):
        cfg = ExplorationConfig(
            n=2,
            proposals=(0, 1),
            model="regular",
            round_cap=4,
            max_events=200,
            crash_budget=budget,
            node_budget=20_000_000,
        )
        out[budget] = explore(cfg)
    return out


@pytest.fixture(scope="module")
def safety_campaigns():
    """Criterion 2 campaigns; the budget-0 halves feed criteria 3 and 4.

    Every generic adversary runs at crash budget 0; the only crash-capable
    scheduler (uniform_random) additionally runs at budget n-1, so safety is
    exercised under crashes too.
    """
    out = {}
    base_seed = 0
    for n, proposals in PROPOSALS.items():
        for adversary in GENERIC_ADVERSARIES:
            budgets = (0, n - 1) if adversary == "uniform_random" else (0,)
            for budget in budgets:
                cfg = SystemConfig(
                    n=n,
                    proposals=proposals,
                    model="regular",
                    adversary=adversary,
                    seed=0,
                    max_events=100_000,
                    crash_budget=budget,
                )
                out[(n, adversary, budget)] = run_campaign(cfg, CAMPAIGN_RUNS, base_seed)
                base_seed += CAMPAIGN_RUNS
    return out


def test_criterion_1_exhaustive_safety_at_desk_scale(criterion1_reports):
    for budget, rep in criterion1_reports.items():
        assert rep.executions_explored > 0
        for name in SAFETY_MONITORS:
            assert rep.violation_counts.get(name, 0) == 0, (budget, name)
        assert rep.violation_counts == {}, budget
    report(
        "ACCEPTANCE 1: PASS - exhaustive exploration (n=2, round cap 4, crash budgets 0/1)"
        f" found no safety violations over "
        f"{sum(r.nodes for r in criterion1_reports.values())} states"
    )


def test_criterion_2_monte_carlo_safety_and_monitor_suite(safety_campaigns):
    total = 0
    for key, stats in safety_campaigns.items():
        assert stats.monitor_violations == {}, key
        total += stats.runs
    report(
        f"ACCEPTANCE 2: PASS - {total} seeded runs across n in (2,3,5) x "
        f"{len(GENERIC_ADVERSARIES)} adversaries: every monitor PASS or VACUOUS"
    )


def test_criterion_3_termination_in_practice(safety_campaigns):
    capped = {
        key: stats.capped_runs
        for key, stats in safety_campaigns.items()
        if key[2] == 0
    }
    assert all(count == 0 for count in capped.values()), capped
    report(
        "ACCEPTANCE 3: PASS - zero runs hit the 100000-event cap in any"
        " crash-budget-0 campaign"
    )


def test_criterion_4_flip_match_probability_bound(safety_campaigns):
    stats = safety_campaigns[(3, "uniform_random", 0)]
    floor = scaled(5_000)
    assert stats.match_observations >= floor, stats.match_observations
    lower = stats.match_lower_bound(confidence=0.99)
    assert lower >= 0.125, (stats.match_successes, stats.match_observations, lower)
    report(
        f"ACCEPTANCE 4: PASS - per-round flip-match frequency "
        f"{stats.per_round_match_frequency:.3f} over {stats.match_observations}"
        f" observations; 99% lower bound {lower:.3f} >= 0.125"
    )


@pytest.mark.parametrize("target_round", [2, 3, 5])
def test_criterion_5_forced_coin_conditionals(target_round):
    cfg = SystemConfig(n=3, proposals=(0, 1, 0), model="regular", adversary="lockstep")
    summary = forced_coin_experiment(cfg, target_round, FORCED_RUNS, base_seed=7_000_000)
    assert summary.antecedent_fired == summary.runs == FORCED_RUNS
    assert summary.uncontested_pass == summary.runs
    assert summary.decide_pass == summary.runs
    assert summary.violation_runs == 0
    report(
        f"ACCEPTANCE 5 (round {target_round}): PASS - antecedent fired in"
        f" {summary.runs}/{summary.runs} forced runs, matched-flip monitors"
        " passed in all of them"
    )


def test_criterion_6_linearization_attack_reproduction():
    demo = attack_demo(ATTACK_RUNS, base_seed=8_000_000)
    assert demo.first_linearized_mismatches == demo.runs == ATTACK_RUNS
    assert demo.completed_before_flip == demo.runs
    assert demo.branch_checks_ok == demo.runs
    assert demo.coin_zero > 0 and demo.coin_one > 0
    report(
        f"ACCEPTANCE 6: PASS - in {demo.runs}/{demo.runs} runs the first-"
        "linearized round-1 write differs from the coin while the first"
        " real-time completion precedes the flip"
    )


def test_criterion_7_new_old_inversion_witness():
    regular = explore(
        ExplorationConfig(
            n=2, proposals=(0, 1), model="regular", round_cap=4, max_events=200,
            search_goal="new_old_inversion",
        )
    )
    assert regular.witness_count >= 1
    atomic = explore(
        ExplorationConfig(
            n=2, proposals=(0, 1), model="atomic", round_cap=4, max_events=200,
            search_goal="new_old_inversion", stop_on_witness=False,
            node_budget=20_000_000,
        )
    )
    assert atomic.witness_count == 0
    assert atomic.executions_explored > 0
    report(
        "ACCEPTANCE 7: PASS - the explorer finds a new-old inversion under the"
        f" regular model and none in {atomic.nodes} atomic-model states"
    )


def test_criterion_8_monitor_mutation_suite():
    detected = 0
    for name, cases in sorted(MUTATION_SUITE.items()):
        bad, good = cases()
        bad_verdicts = {
            v.name: v for v in run_standard_monitors(bad)
            if v.name == name or v.name.startswith(f"{name}[")
        }
        assert any(v.status == "VIOLATION" for v in bad_verdicts.values()), name
        assert all(v.witness for v in bad_verdicts.values() if v.status == "VIOLATION")
        good_verdicts = [
            v for v in run_standard_monitors(good)
            if v.name == name or v.name.startswith(f"{name}[")
        ]
        assert any(v.status == "PASS" for v in good_verdicts), name
        detected += 1
    report(
        f"ACCEPTANCE 8: PASS - all {detected} monitors flag their hand-built"
        " counterexamples and accept their witnesses"
    )


def test_criterion_9_deterministic_replay():
    configs = [
        SystemConfig(n=2, proposals=(0, 1), model="regular", adversary="uniform_random", seed=42),
        SystemConfig(n=3, proposals=(0, 1, 0), model="regular", adversary="round_robin", seed=7),
        SystemConfig(n=3, proposals=(1, 0, 1), model="atomic", adversary="stale_read", seed=3),
        SystemConfig(
            n=3, proposals=(0, 1, 0), model="regular", adversary="disagreement_maximizer",
            seed=11, crash_budget=2,
        ),
        SystemConfig(
            n=2, proposals=(0, 1), model="linearizable", adversary="uniform_random", seed=5
        ),
    ]
    for cfg in configs:
        first = serialize_trace(run_once(cfg)).encode()
        second = serialize_trace(run_once(cfg)).encode()
        assert first == second, cfg
    report(
        f"ACCEPTANCE 9: PASS - {len(configs)} (config, seed) pairs replay to"
        " byte-identical trace files"
    )
