import pytest

from conftest import build_trace
from trace_corpus import MUTATION_SUITE, new_old_inversion_trace
from regsim import (
    SystemConfig,
    run_once,
    run_standard_monitors,
)
from regsim.monitors import (
    check_agreement,
    check_decision_round_uncontested,
    check_matched_flips_decide,
    check_matched_flips_uncontested,
    check_switch_witness,
    check_switch_witness_general,
    check_uncontested_forces_decision,
    check_validity,
    check_value_ladder,
    check_well_formed,
    find_new_old_inversion,
    violations,
)


def verdict_for(name, trace):
    matches = [
        v
        for v in run_standard_monitors(trace)
        if v.name == name or v.name.startswith(f"{name}[")
    ]
    assert matches, f"no monitor named {name}"
    statuses = {v.status for v in matches}
    if "VIOLATION" in statuses:
        return next(v for v in matches if v.status == "VIOLATION")
    if "PASS" in statuses:
        return next(v for v in matches if v.status == "PASS")
    return matches[0]


class TestMutationSuite:
    """Every monitor flags its hand-built counterexample and accepts its witness."""

    @pytest.mark.parametrize("name", sorted(MUTATION_SUITE))
    def test_detects_counterexample(self, name):
        bad, _ = MUTATION_SUITE[name]()
        verdict = verdict_for(name, bad)
        assert verdict.status == "VIOLATION"
        assert verdict.witness, "violations carry witness event indices"

    @pytest.mark.parametrize("name", sorted(MUTATION_SUITE))
    def test_accepts_witness(self, name):
        _, good = MUTATION_SUITE[name]()
        assert verdict_for(name, good).status == "PASS"


class TestValidity:
    def test_no_decisions_is_vacuously_valid(self):
        trace = build_trace([(0, "iw", 0, (0, 1), "init")])
        verdict = check_validity(trace)
        assert verdict.status == "PASS"
        assert "vacuous" in verdict.note


class TestAgreement:
    def test_single_decision_passes(self):
        trace = build_trace([(0, "decide", None, (1, 1), "decide")], proposals=(1, 1))
        assert check_agreement(trace).status == "PASS"


class TestVacuousVerdicts:
    def test_switch_witness_vacuous_without_switches(self):
        trace = build_trace([(0, "iw", 0, (0, 1), "init"), (0, "iw", 0, (0, 2), "agree")])
        assert check_switch_witness(trace).status == "VACUOUS"
        assert check_switch_witness_general(trace).status == "VACUOUS"

    def test_adjacent_switch_monitor_ignores_gapped_switch(self):
        trace = build_trace([(0, "iw", 0, (0, 1), "init"), (0, "iw", 0, (1, 3), "coin")])
        assert check_switch_witness(trace).status == "VACUOUS"
        assert check_switch_witness_general(trace).status == "VIOLATION"

    def test_decision_round_uncontested_vacuous_without_decides(self):
        trace = build_trace([(0, "iw", 0, (0, 1), "init")])
        assert check_decision_round_uncontested(trace).status == "VACUOUS"

    def test_forced_decision_vacuous_on_capped_trace(self):
        steps = [
            (0, "iw", 0, (1, 1), "init"),
            (0, "iw", 0, (1, 2), "agree"),
            (0, "decide", None, (0, 2), "decide"),
        ]
        capped = build_trace(steps, proposals=(1, 1), max_events=3)
        assert check_uncontested_forces_decision(capped).status == "VACUOUS"
        assert check_matched_flips_decide(capped).status == "VACUOUS"

    def test_matched_flips_vacuous_when_flips_disagree(self):
        trace = build_trace(
            [
                (0, "iw", 0, (0, 1), "init"),
                (0, "rw", 0, (0, 1), "init"),
                (1, "flip", None, (1, 2), "coin"),
            ]
        )
        assert check_matched_flips_uncontested(trace).status == "VACUOUS"

    def test_empty_trace_ladder_passes(self):
        assert check_value_ladder(build_trace([])).status == "PASS"

    def test_live_processes_are_not_judged(self):
        # An undecided, uncrashed process at trace end cannot refute liveness.
        trace = build_trace(
            [
                (0, "iw", 0, (1, 1), "init"),
                (0, "rw", 0, (1, 1), "init"),
                (0, "iw", 0, (1, 2), "agree"),
            ],
            proposals=(1, 1),
        )
        assert check_uncontested_forces_decision(trace).status == "VACUOUS"


class TestNewOldInversion:
    def test_hand_built_inversion_found(self):
        verdict = find_new_old_inversion(new_old_inversion_trace())
        assert verdict.status == "PASS"
        assert len(verdict.witness) == 2

    def test_single_read_not_found(self):
        trace = build_trace(
            [
                (1, "iw", 1, (1, 1), "init"),
                (0, "ir", 1, None, "read"),
                (0, "rr", 1, (1, 1), "read"),
            ]
        )
        assert find_new_old_inversion(trace).status == "VACUOUS"

    def test_atomic_traces_never_invert(self):
        for seed in range(10):
            cfg = SystemConfig(
                n=2, proposals=(0, 1), model="atomic", adversary="uniform_random", seed=seed
            )
            assert find_new_old_inversion(run_once(cfg)).status == "VACUOUS"

    def test_register_scoped_search(self):
        trace = new_old_inversion_trace()
        assert find_new_old_inversion(trace, register=1).status == "PASS"
        assert find_new_old_inversion(trace, register=0).status == "VACUOUS"


class TestWellFormed:
    def test_event_after_decide_rejected(self):
        trace = build_trace(
            [
                (0, "iw", 0, (1, 1), "init"),
                (0, "rw", 0, (1, 1), "init"),
                (0, "decide", None, (1, 1), "decide"),
                (0, "iw", 0, (1, 2), "agree"),
            ],
            proposals=(1, 1),
        )
        # The decide itself is also out of place here (no view), so the
        # replay flags the first offending event.
        assert check_well_formed(trace).status == "VIOLATION"

    def test_wrong_first_write_rejected(self):
        trace = build_trace([(0, "iw", 0, (1, 1), "init")], proposals=(0, 1))
        assert check_well_formed(trace).status == "VIOLATION"

    def test_double_read_of_one_register_rejected(self):
        trace = build_trace(
            [
                (0, "iw", 0, (0, 1), "init"),
                (0, "rw", 0, (0, 1), "init"),
                (0, "ir", 1, None, "read"),
                (0, "rr", 1, (1, 1), "read"),
                (0, "ir", 1, None, "read"),
            ]
        )
        assert check_well_formed(trace).status == "VIOLATION"

    def test_simulated_traces_are_well_formed(self):
        for model in ("regular", "atomic", "linearizable"):
            cfg = SystemConfig(
                n=3, proposals=(0, 1, 0), model=model, adversary="uniform_random", seed=7,
                crash_budget=1,
            )
            assert check_well_formed(run_once(cfg)).status == "PASS"


class TestSuite:
    def test_monitors_are_pure(self):
        cfg = SystemConfig(n=2, proposals=(0, 1), adversary="uniform_random", seed=3)
        trace = run_once(cfg)
        assert run_standard_monitors(trace) == run_standard_monitors(trace)

    def test_simulator_traces_never_violate(self):
        for model in ("regular", "atomic", "linearizable"):
            for seed in range(8):
                cfg = SystemConfig(
                    n=3, proposals=(0, 1, 1), model=model, adversary="uniform_random",
                    seed=seed, crash_budget=2,
                )
                assert violations(run_standard_monitors(run_once(cfg))) == []
