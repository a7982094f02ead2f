import random

import pytest
from hypothesis import given, settings, strategies as st

from ginga_drm.adm import TBV_MAX, TBV_MODULUS, EditingCommandMessage, TimeBaseMessage, TimeBaseStatus
from ginga_drm.errors import BadTbvLiteral, TbvOutOfRange
from ginga_drm.timebase import (
    EditingScheduler,
    TimeBaseConfig,
    TimeBaseState,
    format_tbv_literal,
    parse_tbv_literal,
    timebase_apply,
    timebase_tick,
)

from oracles import reference_schedule

RUN, PAUSE = TimeBaseStatus.RUNNING, TimeBaseStatus.PAUSED


def started(tbv, status=RUN):
    return timebase_apply(TimeBaseState(), TimeBaseMessage(status, False, tbv))


# --- literals -------------------------------------------------------------------

def test_literals():
    assert parse_tbv_literal("5000tbv") == 5000
    assert parse_tbv_literal("0tbv") == 0
    assert parse_tbv_literal(f"{TBV_MAX}tbv") == TBV_MAX
    with pytest.raises(TbvOutOfRange):
        parse_tbv_literal("8589934592tbv")


@pytest.mark.parametrize("text", ["5000tvb", "tbv", "-1tbv", "5000 tbv", " 5000tbv", "5e3tbv", "5000TBV", "0x10tbv"])
def test_bad_literals(text):
    with pytest.raises(BadTbvLiteral):
        parse_tbv_literal(text)


@given(st.integers(0, TBV_MAX))
def test_literal_round_trip(v):
    assert parse_tbv_literal(format_tbv_literal(v)) == v


# --- state machine -------------------------------------------------------------

def test_initialization():
    s = started(0)
    assert s.running and s.initialized and s.current_tbv == 0


def test_tick_requires_initialization():
    with pytest.raises(ValueError):
        timebase_tick(TimeBaseState())


def test_running_tick():
    assert timebase_tick(started(5000)).current_tbv == 6000


def test_pause_holds():
    s = timebase_apply(started(7000), TimeBaseMessage(PAUSE, False, 7000))
    assert not s.running
    for _ in range(50):
        s = timebase_tick(s)
    assert s.current_tbv == 7000


def test_discontinuity_jumps_and_suppresses():
    s = started(9000)
    s = timebase_apply(s, TimeBaseMessage(RUN, True, 100))
    assert s.current_tbv == 100 and s.suppress_events
    s = timebase_tick(s)
    assert s.current_tbv == 1100 and not s.suppress_events


def test_discontinuity_while_paused_stays_paused():
    s = timebase_apply(started(9000, PAUSE), TimeBaseMessage(PAUSE, True, 50))
    assert s.current_tbv == 50 and not s.running
    assert timebase_tick(s).current_tbv == 50


def test_wrap():
    s = timebase_tick(started(TBV_MAX))
    assert s.current_tbv == 999 and s.wraps == 1


def test_backward_leap_without_flag_is_a_violation():
    s = timebase_apply(started(20000), TimeBaseMessage(RUN, False, 10000))
    assert s.current_tbv == 20000 and s.drift_violations == 1


def test_forward_leap_beyond_window_jumps():
    s = timebase_apply(started(20000), TimeBaseMessage(RUN, False, 50000))
    assert s.current_tbv == 50000 and s.pending_drift == 0


def test_pause_within_window_snaps_forward_only():
    s = timebase_apply(started(7000), TimeBaseMessage(PAUSE, False, 8000))
    assert s.current_tbv == 8000 and not s.running
    s = timebase_apply(started(7000), TimeBaseMessage(PAUSE, False, 6000))
    assert s.current_tbv == 7000 and not s.running


def test_config_validation():
    assert TimeBaseConfig().horizon == 12
    with pytest.raises(ValueError):
        TimeBaseConfig(max_slew=1000)
    with pytest.raises(ValueError):
        TimeBaseConfig(elastic_window=-1)


@settings(max_examples=500)
@given(st.integers(0, TBV_MAX), st.integers(-3000, 3000), st.integers(1, 999), st.integers(0, 5000))
def test_in_window_drift_amortizes_without_rewinding(start, drift, slew, window_extra):
    cfg = TimeBaseConfig(elastic_window=3000 + window_extra, max_slew=slew)
    s = started(start)
    target = (start + drift) % TBV_MODULUS
    s = timebase_apply(s, TimeBaseMessage(RUN, False, target), cfg)
    assert s.current_tbv == start
    unwrapped = start
    for k in range(1, cfg.horizon + 1):
        s = timebase_tick(s, cfg)
        step = (s.current_tbv - unwrapped) % TBV_MODULUS
        assert 1000 - slew <= step <= 1000 + slew
        unwrapped += step
    assert s.pending_drift == 0
    assert s.current_tbv == (target + 1000 * cfg.horizon) % TBV_MODULUS


def test_randomized_walk_of_ten_thousand_steps():
    rnd = random.Random(2024)
    cfg = TimeBaseConfig()
    truth = rnd.randrange(TBV_MODULUS)
    s = started(truth)
    total_ticks = total_advance = 0
    last_drift_tick = 0
    for step in range(10_000):
        before = s
        if rnd.random() < 0.15:
            drift = rnd.randint(-cfg.elastic_window, cfg.elastic_window)
            truth = (s.current_tbv + drift) % TBV_MODULUS
            s = timebase_apply(s, TimeBaseMessage(RUN, False, truth), cfg)
            assert s.current_tbv == before.current_tbv and s.drift_violations == 0
            last_drift_tick = total_ticks
        else:
            s = timebase_tick(s, cfg)
            truth = (truth + 1000) % TBV_MODULUS
            adv = (s.current_tbv - before.current_tbv) % TBV_MODULUS
            assert 1000 - cfg.max_slew <= adv <= 1000 + cfg.max_slew
            total_ticks += 1
            total_advance += adv
            if total_ticks - last_drift_tick >= cfg.horizon:
                assert s.pending_drift == 0 and s.current_tbv == truth
        assert 0 <= s.current_tbv <= TBV_MAX
        assert abs(s.pending_drift) <= cfg.elastic_window
    assert abs(total_advance / total_ticks - 1000) < 5


# --- scheduler -----------------------------------------------------------------

def cmd(event_id, tbv=0, now=False):
    return EditingCommandMessage(event_id, do_it_now=now, tbv=tbv)


def test_do_it_now_is_immediate():
    sch = EditingScheduler()
    sch.offer(cmd(1, now=True))
    assert [m.event_id for m in sch.poll(0)] == [1]


def test_threshold():
    sch = EditingScheduler()
    sch.offer(cmd(1, 4000))
    assert sch.poll(3999) == []
    assert [m.event_id for m in sch.poll(4000)] == [1]
    assert sch.poll(5000) == []


def test_duplicate_event_id_emitted_once():
    sch = EditingScheduler()
    assert sch.offer(cmd(9, 10)) and not sch.offer(cmd(9, 10))
    assert [m.event_id for m in sch.poll(10)] == [9]
    assert not sch.offer(cmd(9, 10))
    assert sch.poll(20) == []


def test_suppressed_commands_are_discarded():
    sch = EditingScheduler()
    sch.offer(cmd(1, 100))
    sch.offer(cmd(2, 900))
    assert sch.poll(500, suppress_events=True) == []
    assert [m.event_id for m in sch.suppressed] == [1]
    assert [m.event_id for m in sch.poll(1000)] == [2]


@st.composite
def traces(draw):
    steps = []
    for _ in range(draw(st.integers(1, 40))):
        if draw(st.booleans()):
            steps.append(("offer", draw(st.integers(0, 8)), draw(st.booleans()), draw(st.integers(0, 5000))))
        else:
            steps.append(("poll", draw(st.integers(0, 6000)), draw(st.booleans())))
    return steps


def run_scheduler(trace):
    sch = EditingScheduler()
    out = []
    for step in trace:
        if step[0] == "offer":
            sch.offer(cmd(step[1], step[3], step[2]))
        else:
            out.extend(m.event_id for m in sch.poll(step[1], step[2]))
    return out


@settings(max_examples=1000)
@given(traces())
def test_scheduler_matches_reference(trace):
    got = run_scheduler(trace)
    assert got == reference_schedule(trace)
    assert len(got) == len(set(got))
