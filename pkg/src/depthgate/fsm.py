"""Crossing counter over the dominant-state stream.

The counter watches the published dominant ROI (0 = idle, 1 = inside band,
2 = middle, 3 = outside band) and emits at most one event per step:

  1 -> 2            arms flag_1_2 (started moving out)
  3 -> 2            arms flag_3_2 (started moving in)
  2 -> 1, flag_3_2  Entry          (completed 3 -> 2 -> 1)
  2 -> 1, flag_1_2  RegretExit     (turned back: 1 -> 2 -> 1)
  2 -> 3, flag_1_2  Exit           (completed 1 -> 2 -> 3)
  2 -> 3, flag_3_2  RegretEnter    (turned back: 3 -> 2 -> 3)
  1 <-> 3           nothing (middle band skipped: treated as noise)

On a 2 -> terminal step with both flags armed the completed full traversal
wins (the opposite-side flag is checked first). Both flags clear after any
emitted event. Idle (state 0) frames leave the flags and the resume state
untouched until idle_timeout_frames consecutive idle frames have elapsed,
at which point both flags clear; the rules are then evaluated against the
last non-idle state when activity resumes. Occupancy is
initial_occupancy + entries - exits and is reported, never clamped.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from enum import Enum


class EventKind(str, Enum):
    ENTRY = "entry"
    EXIT = "exit"
    REGRET_ENTER = "regret_enter"
    REGRET_EXIT = "regret_exit"


@dataclass(frozen=True, slots=True)
class CountsSnapshot:
    entries: int = 0
    exits: int = 0
    regret_enter: int = 0
    regret_exit: int = 0
    occupancy: int = 0

    def to_dict(self) -> dict:
        return {
            "entries": self.entries,
            "exits": self.exits,
            "regret_enter": self.regret_enter,
            "regret_exit": self.regret_exit,
            "occupancy": self.occupancy,
        }


@dataclass(frozen=True, slots=True)
class CrossingEvent:
    seq: int
    kind: EventKind
    frame_index: int
    timestamp_us: int
    counts_after: CountsSnapshot
    snapshot_id: str | None = None


@dataclass(frozen=True, slots=True)
class CounterState:
    """FSM registers. resume_state is the last non-idle dominant state; the
    transition rules are evaluated against it so brief idle gaps do not break
    a traversal. event_seq survives reset: events are never renumbered."""

    cur_state: int = 0
    resume_state: int = 0
    flag_1_2: bool = False
    flag_3_2: bool = False
    entries: int = 0
    exits: int = 0
    regret_enter: int = 0
    regret_exit: int = 0
    initial_occupancy: int = 0
    idle_frames: int = 0
    idle_timeout_frames: int = 30
    event_seq: int = 0

    @property
    def occupancy(self) -> int:
        return self.initial_occupancy + self.entries - self.exits

    def counts(self) -> CountsSnapshot:
        return CountsSnapshot(
            entries=self.entries,
            exits=self.exits,
            regret_enter=self.regret_enter,
            regret_exit=self.regret_exit,
            occupancy=self.occupancy,
        )


def fsm_step(
    state: CounterState,
    next_dominant: int,
    frame_index: int,
    timestamp_us: int,
) -> tuple[CounterState, list[CrossingEvent]]:
    """Advance the counter by one published dominant state.

    Returns the successor state and the (at most one) emitted event.
    """
    if next_dominant not in (0, 1, 2, 3):
        raise ValueError(f"dominant state must be in 0..3, got {next_dominant}")

    if next_dominant == 0:
        idle = state.idle_frames + 1
        f12, f32 = state.flag_1_2, state.flag_3_2
        if idle >= state.idle_timeout_frames:
            f12 = f32 = False
        new = replace(state, cur_state=0, idle_frames=idle, flag_1_2=f12, flag_3_2=f32)
        return new, []

    f12, f32 = state.flag_1_2, state.flag_3_2
    entries, exits = state.entries, state.exits
    regret_enter, regret_exit = state.regret_enter, state.regret_exit
    res = state.resume_state
    kind: EventKind | None = None

    if res != 0 and next_dominant != res:
        if res == 1 and next_dominant == 2:
            f12 = True
        elif res == 3 and next_dominant == 2:
            f32 = True
        elif res == 2 and next_dominant == 1:
            if f32:
                kind = EventKind.ENTRY
                entries += 1
            elif f12:
                kind = EventKind.REGRET_EXIT
                regret_exit += 1
            if kind is not None:
                f12 = f32 = False
        elif res == 2 and next_dominant == 3:
            if f12:
                kind = EventKind.EXIT
                exits += 1
            elif f32:
                kind = EventKind.REGRET_ENTER
                regret_enter += 1
            if kind is not None:
                f12 = f32 = False
        # 1 <-> 3 jumps fall through: no event, flags unchanged

    seq = state.event_seq
    events: list[CrossingEvent] = []
    new = CounterState(
        cur_state=next_dominant,
        resume_state=next_dominant,
        flag_1_2=f12,
        flag_3_2=f32,
        entries=entries,
        exits=exits,
        regret_enter=regret_enter,
        regret_exit=regret_exit,
        initial_occupancy=state.initial_occupancy,
        idle_frames=0,
        idle_timeout_frames=state.idle_timeout_frames,
        event_seq=seq + 1 if kind is not None else seq,
    )
    if kind is not None:
        events.append(
            CrossingEvent(
                seq=seq + 1,
                kind=kind,
                frame_index=frame_index,
                timestamp_us=timestamp_us,
                counts_after=new.counts(),
            )
        )

    # counter monotonicity, occupancy identity and flag hygiene; stripped with -O
    assert new.entries >= state.entries and new.exits >= state.exits
    assert new.regret_enter >= state.regret_enter and new.regret_exit >= state.regret_exit
    assert new.occupancy == new.initial_occupancy + new.entries - new.exits
    assert len(events) <= 1
    assert not events or (not new.flag_1_2 and not new.flag_3_2)
    return new, events


def occupancy(state: CounterState) -> int:
    """initial_occupancy + entries - exits; negative values are reported
    as-is and flagged inconsistent in status reporting."""
    return state.occupancy


def reset(state: CounterState) -> CounterState:
    """Zero the counters, flags and idle register; keep the event sequence."""
    return CounterState(
        initial_occupancy=state.initial_occupancy,
        idle_timeout_frames=state.idle_timeout_frames,
        event_seq=state.event_seq,
    )
