"""Brute-force replay oracle for the crossing counter.

A direct, unoptimized transcription of the counting rules, written and
maintained separately from fsm.fsm_step so the two can be checked against
each other exhaustively. Keep this file free of imports from fsm.py.
"""

from __future__ import annotations


def oracle_replay(
    dominants,
    idle_timeout_frames: int = 30,
    initial_occupancy: int = 0,
) -> tuple[dict, list[tuple[int, str, int]]]:
    """Replay a dominant-state sequence; return final counters and events.

    Events are (seq, kind, frame_index) with frame_index the position in the
    sequence. Rules transcribed one by one:

    * only a change of state does anything; state 0 is "idle"
    * 1 then 2 arms flag 1_2; 3 then 2 arms flag 3_2
    * from 2 to 1: entry if flag 3_2, else regret-exit if flag 1_2
    * from 2 to 3: exit if flag 1_2, else regret-enter if flag 3_2
    * any emitted event clears both flags
    * jumping 1 <-> 3 does nothing
    * idle frames keep flags and the last active state; once
      idle_timeout_frames consecutive idle frames accumulate, both flags
      are dropped
    * occupancy = initial + entries - exits
    """
    entries = 0
    exits = 0
    regret_enter = 0
    regret_exit = 0
    flag_1_2 = False
    flag_3_2 = False
    last_active = 0
    idle_run = 0
    seq = 0
    events: list[tuple[int, str, int]] = []

    for i, d in enumerate(dominants):
        if d not in (0, 1, 2, 3):
            raise ValueError(f"bad dominant {d} at {i}")
        if d == 0:
            idle_run += 1
            if idle_run >= idle_timeout_frames:
                flag_1_2 = False
                flag_3_2 = False
            continue
        idle_run = 0
        kind = None
        if last_active != 0 and d != last_active:
            if last_active == 1 and d == 2:
                flag_1_2 = True
            if last_active == 3 and d == 2:
                flag_3_2 = True
            if last_active == 2 and d == 1 and flag_3_2:
                kind = "entry"
                entries += 1
            elif last_active == 2 and d == 1 and flag_1_2:
                kind = "regret_exit"
                regret_exit += 1
            if last_active == 2 and d == 3 and flag_1_2:
                kind = "exit"
                exits += 1
            elif last_active == 2 and d == 3 and flag_3_2:
                kind = "regret_enter"
                regret_enter += 1
            if kind is not None:
                flag_1_2 = False
                flag_3_2 = False
        if kind is not None:
            seq += 1
            events.append((seq, kind, i))
        last_active = d

    counters = {
        "entries": entries,
        "exits": exits,
        "regret_enter": regret_enter,
        "regret_exit": regret_exit,
        "occupancy": initial_occupancy + entries - exits,
    }
    return counters, events
