import pytest

from regsim import (
    BOT,
    EventKind,
    RegisterValue,
    SystemConfig,
    evaluate,
    init_process,
    leaders,
    leaders_agree,
    next_pending_read_target,
    run_once,
)
from regsim.core import SITE_AGREE, SITE_COIN, SITE_INIT, SITE_PAUSE
from regsim.protocol import Phase


def view(**entries):
    # p0, p1, ... keyword shorthand for pid-keyed views
    return {int(k[1:]): RegisterValue(*v) for k, v in entries.items()}


class TestInitProcess:
    def test_first_action_writes_proposal_at_round_one(self):
        state = init_process(0, 1)
        assert state.phase is Phase.WRITE_INVOKE
        assert state.pending_value == RegisterValue(1, 1)
        assert state.pending_line == SITE_INIT

    def test_zero_proposal(self):
        assert init_process(1, 0).pending_value == RegisterValue(0, 1)

    def test_bot_proposal_rejected(self):
        with pytest.raises(ValueError):
            init_process(0, BOT)


class TestLeaders:
    def test_unique_max(self):
        assert leaders(view(p0=(1, 3), p1=(0, 2))) == {0}

    def test_tie(self):
        assert leaders(view(p0=(1, 2), p1=(0, 2))) == {0, 1}

    def test_paused_process_can_lead(self):
        v = view(p0=(BOT, 2), p1=(1, 2), p2=(0, 1))
        assert leaders(v) == {0, 1}


class TestLeadersAgree:
    def test_agreeing_leaders(self):
        assert leaders_agree(view(p0=(1, 3), p1=(1, 3))) == 1

    def test_disagreeing_leaders(self):
        assert leaders_agree(view(p0=(1, 3), p1=(0, 3))) is None

    def test_paused_leader_blocks_agreement(self):
        assert leaders_agree(view(p0=(BOT, 3))) is None


class TestEvaluate:
    def test_unanimous_round_one_decides(self):
        v = view(p0=(1, 1), p1=(1, 1))
        action = evaluate(0, v, v[0])
        assert action.kind == "decide"
        assert action.value == RegisterValue(1, 1)

    def test_leader_disagreement_pauses(self):
        v = view(p0=(1, 2), p1=(0, 2))
        action = evaluate(0, v, v[0])
        assert action.kind == "write"
        assert action.value == RegisterValue(BOT, 2)
        assert action.line == SITE_PAUSE

    def test_paused_process_flips(self):
        v = view(p0=(BOT, 2), p1=(0, 2))
        action = evaluate(0, v, v[0])
        assert action.kind == "flip"

    def test_disagreeing_laggard_does_not_block(self):
        v = view(p0=(1, 4), p1=(0, 2), p2=(1, 4))
        action = evaluate(0, v, v[0])
        assert action.kind == "decide"
        assert action.value == RegisterValue(1, 4)

    def test_disagreeing_near_process_blocks_decision(self):
        # p1 trails by one round, so p0 cannot decide, but p1 is not a leader
        # and the leaders still agree: p0 adopts their value.
        v = view(p0=(1, 4), p1=(0, 3), p2=(1, 4))
        action = evaluate(0, v, v[0])
        assert action.kind == "write"
        assert action.value == RegisterValue(1, 5)
        assert action.line == SITE_AGREE

    def test_disagreeing_near_leader_forces_pause(self):
        v = view(p0=(1, 4), p1=(0, 4), p2=(1, 4))
        action = evaluate(0, v, v[0])
        assert action.kind == "write"
        assert action.value == RegisterValue(BOT, 4)

    def test_agreeing_leaders_adopted(self):
        v = view(p0=(0, 1), p1=(1, 2))
        action = evaluate(0, v, v[0])
        assert action.kind == "write"
        assert action.value == RegisterValue(1, 2)
        assert action.line == SITE_AGREE

    def test_non_leader_with_paused_leader_flips_only_when_paused(self):
        # x != BOT always pauses before flipping
        v = view(p0=(0, 1), p1=(BOT, 2))
        action = evaluate(0, v, v[0])
        assert action.kind == "write"
        assert action.line == SITE_PAUSE

    def test_missing_self_entry_rejected(self):
        with pytest.raises(ValueError):
            evaluate(0, view(p1=(1, 1)), RegisterValue(1, 1))


class TestReadTargets:
    def test_next_target_follows_order(self):
        state = init_process(0, 1)
        state.read_order = (1, 0)
        state.read_pos = 0
        assert next_pending_read_target(state) == 1
        state.read_pos = 1
        assert next_pending_read_target(state) == 0

    def test_done_when_exhausted(self):
        state = init_process(0, 1)
        state.read_order = (1, 0)
        state.read_pos = 2
        assert next_pending_read_target(state) is None


class TestSelfReadExactness:
    @pytest.mark.parametrize("adversary", ["uniform_random", "stale_read", "disagreement_maximizer"])
    def test_self_reads_return_own_latest_write(self, adversary):
        # A process's own writes complete before its reads begin, so the legal
        # set for a self-read is the singleton last written value.
        for seed in range(6):
            cfg = SystemConfig(
                n=3, proposals=(0, 1, 0), model="regular", adversary=adversary, seed=seed
            )
            trace = run_once(cfg)
            last_write: dict[int, RegisterValue] = {}
            for ev in trace.events:
                if ev.kind is EventKind.RESPOND_WRITE:
                    last_write[ev.pid] = ev.value
                elif ev.kind is EventKind.RESPOND_READ and ev.target == ev.pid:
                    assert ev.value == last_write[ev.pid]


class TestFlipSites:
    def test_coin_write_round_is_captured_round_plus_one(self):
        cfg = SystemConfig(n=2, proposals=(0, 1), adversary="uniform_random", seed=2)
        trace = run_once(cfg)
        flips = [ev for ev in trace.events if ev.kind is EventKind.FLIP]
        assert flips, "expected at least one flip under leader disagreement"
        for flip in flips:
            follow = next(
                ev
                for ev in trace.events
                if ev.seq > flip.seq
                and ev.pid == flip.pid
                and ev.kind is EventKind.INVOKE_WRITE
            )
            assert follow.value == flip.value
            assert follow.line == SITE_COIN
