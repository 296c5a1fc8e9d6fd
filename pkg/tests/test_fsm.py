import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from depthgate.fsm import CounterState, EventKind, fsm_step, occupancy, reset
from depthgate.oracle import oracle_replay


def run(states, idle_timeout_frames=30, initial_occupancy=0):
    st_ = CounterState(
        idle_timeout_frames=idle_timeout_frames, initial_occupancy=initial_occupancy
    )
    events = []
    for i, d in enumerate(states):
        st_, emitted = fsm_step(st_, d, i, i * 1000)
        events.extend(emitted)
    return st_, events


def as_oracle_shape(state, events):
    counters = {
        "entries": state.entries,
        "exits": state.exits,
        "regret_enter": state.regret_enter,
        "regret_exit": state.regret_exit,
        "occupancy": state.occupancy,
    }
    return counters, [(e.seq, e.kind.value, e.frame_index) for e in events]


def test_empty_sequence_counts_nothing():
    state, events = run([])
    assert state.counts().to_dict() == {
        "entries": 0, "exits": 0, "regret_enter": 0, "regret_exit": 0, "occupancy": 0,
    }
    assert events == []


@pytest.mark.parametrize(
    "states,kind",
    [
        ([3, 2, 1], EventKind.ENTRY),
        ([1, 2, 3], EventKind.EXIT),
        ([1, 2, 1], EventKind.REGRET_EXIT),
        ([3, 2, 3], EventKind.REGRET_ENTER),
    ],
)
def test_canonical_patterns(states, kind):
    state, events = run(states)
    assert [e.kind for e in events] == [kind]
    assert events[0].seq == 1
    assert events[0].frame_index == 2


def test_full_visit_round_trip():
    state, events = run([3, 2, 1, 1, 2, 3])
    assert state.entries == 1 and state.exits == 1
    assert state.occupancy == 0
    assert [e.kind for e in events] == [EventKind.ENTRY, EventKind.EXIT]


@pytest.mark.parametrize("symbol", [0, 1, 2, 3])
def test_constant_sequences_emit_nothing(symbol):
    state, events = run([symbol] * 50)
    assert events == []
    assert (state.entries, state.exits, state.regret_enter, state.regret_exit) == (0, 0, 0, 0)


def test_middle_band_skip_is_ignored():
    state, events = run([1, 3, 1, 3])
    assert events == []
    assert not state.flag_1_2 and not state.flag_3_2


def test_idle_gap_shorter_than_timeout_preserves_crossing():
    state, events = run([3, 2] + [0] * 29 + [1], idle_timeout_frames=30)
    assert [e.kind for e in events] == [EventKind.ENTRY]


def test_idle_timeout_clears_flags():
    state, events = run([3, 2] + [0] * 30 + [1], idle_timeout_frames=30)
    assert events == []
    assert state.entries == 0


def test_idle_frames_reset_by_activity():
    # 0-runs that never individually reach the timeout keep the flags alive
    states = [3, 2] + [0] * 29 + [2] + [0] * 29 + [1]
    state, events = run(states, idle_timeout_frames=30)
    assert [e.kind for e in events] == [EventKind.ENTRY]


def test_resume_across_idle_same_state_is_no_event():
    state, events = run([3, 2, 0, 0, 2, 1])
    assert [e.kind for e in events] == [EventKind.ENTRY]
    state, events = run([1, 0, 0, 1])
    assert events == []


def test_event_clears_both_flags_and_regret_counts():
    state, events = run([1, 2, 1, 2, 3])
    # regret-exit at the third step, then 1->2 re-arms and completes an exit
    assert [e.kind for e in events] == [EventKind.REGRET_EXIT, EventKind.EXIT]
    assert state.regret_exit == 1 and state.exits == 1


def test_both_flags_priority_full_traversal_wins():
    armed = CounterState(cur_state=2, resume_state=2, flag_1_2=True, flag_3_2=True)
    to_inside, events = fsm_step(armed, 1, 10, 10_000)
    assert [e.kind for e in events] == [EventKind.ENTRY]
    assert not to_inside.flag_1_2 and not to_inside.flag_3_2
    to_outside, events = fsm_step(armed, 3, 10, 10_000)
    assert [e.kind for e in events] == [EventKind.EXIT]
    assert not to_outside.flag_1_2 and not to_outside.flag_3_2


def test_initial_occupancy_offsets_occupancy():
    state, _ = run([1, 2, 3], initial_occupancy=5)
    assert state.occupancy == 4
    assert occupancy(state) == 4


def test_negative_occupancy_reported_not_clamped():
    state, _ = run([1, 2, 3])
    assert state.occupancy == -1


def test_rejects_invalid_dominant():
    with pytest.raises(ValueError, match="dominant"):
        fsm_step(CounterState(), 4, 0, 0)


def test_event_metadata():
    state, events = run([3, 2, 1])
    e = events[0]
    assert (e.seq, e.frame_index, e.timestamp_us) == (1, 2, 2000)
    assert e.counts_after.entries == 1
    assert e.counts_after.occupancy == 1
    assert e.snapshot_id is None


def test_reset_zeroes_counters_keeps_seq():
    state, events = run([3, 2, 1, 1, 2, 3])
    assert state.event_seq == 2
    r = reset(state)
    assert (r.entries, r.exits, r.regret_enter, r.regret_exit) == (0, 0, 0, 0)
    assert not r.flag_1_2 and not r.flag_3_2
    assert r.event_seq == 2
    nxt, emitted = fsm_step(r, 3, 50, 0)
    nxt, emitted = fsm_step(nxt, 2, 51, 0)
    nxt, emitted = fsm_step(nxt, 1, 52, 0)
    assert emitted[0].seq == 3  # numbering continues after reset


@pytest.mark.parametrize("timeout", [1, 2, 3])
def test_exhaustive_oracle_equivalence_short_sequences(timeout):
    # every sequence of length <= 5 with an aggressive idle timeout, so the
    # timeout path is exercised heavily
    for n in range(6):
        for seq in itertools.product((0, 1, 2, 3), repeat=n):
            state, events = run(seq, idle_timeout_frames=timeout)
            want = oracle_replay(seq, idle_timeout_frames=timeout)
            assert as_oracle_shape(state, events) == want, seq


@given(
    st.lists(st.integers(0, 3), max_size=60),
    st.sampled_from([1, 2, 5, 30]),
    st.integers(-2, 5),
)
@settings(max_examples=300, deadline=None)
def test_oracle_equivalence_random(seq, timeout, initial):
    state, events = run(seq, idle_timeout_frames=timeout, initial_occupancy=initial)
    counters, ev = oracle_replay(seq, idle_timeout_frames=timeout, initial_occupancy=initial)
    assert as_oracle_shape(state, events) == (counters, ev)


@given(st.lists(st.integers(0, 3), max_size=80))
@settings(max_examples=200, deadline=None)
def test_counter_monotonicity_and_identity(seq):
    st_ = CounterState()
    prev = st_
    for i, d in enumerate(seq):
        st_, _ = fsm_step(st_, d, i, 0)
        assert st_.entries >= prev.entries
        assert st_.exits >= prev.exits
        assert st_.regret_enter >= prev.regret_enter
        assert st_.regret_exit >= prev.regret_exit
        assert st_.occupancy == st_.initial_occupancy + st_.entries - st_.exits
        prev = st_


@given(st.lists(st.integers(0, 3), max_size=60))
@settings(max_examples=200, deadline=None)
def test_event_conservation(seq):
    state, events = run(seq)
    deltas = state.entries + state.exits + state.regret_enter + state.regret_exit
    assert len(events) == deltas
    assert [e.seq for e in events] == list(range(1, deltas + 1))


@given(st.lists(st.integers(0, 3), max_size=40))
@settings(max_examples=200, deadline=None)
def test_determinism(seq):
    a = as_oracle_shape(*run(seq))
    b = as_oracle_shape(*run(seq))
    assert a == b


@given(st.lists(st.integers(0, 3), max_size=25), st.integers(2, 4))
@settings(max_examples=200, deadline=None)
def test_repetition_insensitivity(seq, dup):
    # duplicating symbols in place never changes the event kinds, as long as
    # the duplication cannot push an idle run across the timeout boundary
    timeout = 25 * dup + 1
    doubled = [d for d in seq for _ in range(dup)]
    _, events_a = run(seq, idle_timeout_frames=timeout)
    _, events_b = run(doubled, idle_timeout_frames=timeout)
    assert [e.kind for e in events_a] == [e.kind for e in events_b]


def test_flag_hygiene_after_every_event():
    for seq in itertools.product((0, 1, 2, 3), repeat=6):
        st_ = CounterState(idle_timeout_frames=2)
        for i, d in enumerate(seq):
            st_, emitted = fsm_step(st_, d, i, 0)
            if emitted:
                assert not st_.flag_1_2 and not st_.flag_3_2
