from conftest import build_trace
from regsim import parse_trace, serialize_trace
from regsim.cli import EXIT_CONFIG, EXIT_OK, EXIT_VIOLATION, main


def run_cli(*argv):
    return main(list(argv))


class TestRunCommand:
    def test_run_writes_a_parseable_trace(self, tmp_path, capsys):
        out = tmp_path / "run.trace"
        code = run_cli(
            "run", "--n", "2", "--proposals", "0,1", "--seed", "3",
            "--adversary", "uniform_random", "--trace-out", str(out),
        )
        assert code == EXIT_OK
        trace = parse_trace(out.read_text())
        assert trace.config.seed == 3
        assert "validity: PASS" in capsys.readouterr().out

    def test_run_is_deterministic_at_the_file_level(self, tmp_path):
        a, b = tmp_path / "a.trace", tmp_path / "b.trace"
        for path in (a, b):
            assert run_cli(
                "run", "--n", "2", "--seed", "9", "--adversary", "stale_read",
                "--trace-out", str(path), "--no-check",
            ) == EXIT_OK
        assert a.read_bytes() == b.read_bytes()

    def test_bad_proposal_count_is_a_config_error(self):
        assert run_cli("run", "--n", "2", "--proposals", "0,1,0") == EXIT_CONFIG


class TestCheckCommand:
    def test_clean_trace_exits_zero(self, tmp_path):
        out = tmp_path / "ok.trace"
        run_cli("run", "--n", "2", "--seed", "1", "--trace-out", str(out), "--no-check")
        assert run_cli("check", str(out)) == EXIT_OK

    def test_violating_trace_exits_one(self, tmp_path):
        trace = build_trace(
            [(0, "decide", None, (0, 1), "decide"), (1, "decide", None, (1, 1), "decide")]
        )
        path = tmp_path / "bad.trace"
        path.write_text(serialize_trace(trace))
        assert run_cli("check", str(path)) == EXIT_VIOLATION

    def test_garbage_file_is_a_config_error(self, tmp_path):
        path = tmp_path / "garbage.trace"
        path.write_text("this is not a trace\n")
        assert run_cli("check", str(path)) == EXIT_CONFIG

    def test_missing_file_is_a_config_error(self):
        assert run_cli("check", "/nonexistent/file.trace") == EXIT_CONFIG


class TestCampaignCommand:
    def test_small_campaign(self, capsys):
        code = run_cli(
            "campaign", "--n", "2", "--runs", "20", "--seed", "0",
            "--adversary", "uniform_random",
        )
        assert code == EXIT_OK
        out = capsys.readouterr().out
        assert "runs=20" in out
        assert "capped_runs=0" in out


class TestExploreCommand:
    def test_tiny_exploration(self, capsys):
        code = run_cli(
            "explore", "--n", "2", "--proposals", "0,1", "--round-cap", "2",
            "--max-events", "80",
        )
        assert code == EXIT_OK
        out = capsys.readouterr().out
        assert "violations=0" in out

    def test_goal_search_writes_witness(self, tmp_path, capsys):
        out_dir = tmp_path / "witnesses"
        code = run_cli(
            "explore", "--n", "2", "--round-cap", "4", "--max-events", "200",
            "--goal", "new_old_inversion", "--trace-out", str(out_dir),
        )
        assert code == EXIT_OK
        assert "witnesses=1" in capsys.readouterr().out
        files = list(out_dir.glob("witness_*.trace"))
        assert len(files) == 1
        parse_trace(files[0].read_text())

    def test_node_budget_guard_is_a_config_error(self):
        assert run_cli(
            "explore", "--n", "2", "--round-cap", "4", "--node-budget", "20"
        ) == EXIT_CONFIG


class TestAttackCommand:
    def test_attack_demo(self, capsys):
        assert run_cli("attack", "--runs", "25", "--seed", "0") == EXIT_OK
        assert "attack_reproduced=yes" in capsys.readouterr().out

    def test_attack_under_regular_model_is_a_config_error(self):
        assert run_cli("attack", "--runs", "5", "--model", "regular") == EXIT_CONFIG


class TestForcedCommand:
    def test_forced_experiment(self, capsys):
        code = run_cli(
            "forced", "--n", "3", "--proposals", "0,1,0", "--round", "3",
            "--runs", "15", "--seed", "0",
        )
        assert code == EXIT_OK
        out = capsys.readouterr().out
        assert "antecedent_fired=15" in out

    def test_round_one_is_a_config_error(self):
        assert run_cli(
            "forced", "--n", "3", "--proposals", "0,1,0", "--round", "1", "--runs", "5"
        ) == EXIT_CONFIG


class TestConfigFile:
    def test_flags_fall_back_to_config_file(self, tmp_path, capsys):
        cfg = tmp_path / "sim.cfg"
        cfg.write_text("n=3\nproposals=0,1,0\nadversary=uniform_random\nseed=5\n")
        out = tmp_path / "run.trace"
        code = run_cli("run", "--config", str(cfg), "--trace-out", str(out), "--no-check")
        assert code == EXIT_OK
        trace = parse_trace(out.read_text())
        assert trace.config.n == 3
        assert trace.config.seed == 5
        assert trace.config.adversary == "uniform_random"

    def test_explicit_flags_win_over_config_file(self, tmp_path):
        cfg = tmp_path / "sim.cfg"
        cfg.write_text("n=3\nproposals=0,1,0\nseed=5\n")
        out = tmp_path / "run.trace"
        code = run_cli(
            "run", "--config", str(cfg), "--seed", "9", "--trace-out", str(out), "--no-check"
        )
        assert code == EXIT_OK
        assert parse_trace(out.read_text()).config.seed == 9
