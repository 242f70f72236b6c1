"""Silent rhythm-matching game.

Grasping the robot starts a round: three vibration pulses are played, then
the user reproduces the rhythm by squeezing. Listening opens when the prompt
ends; the reproduced rhythm is expected to start ``response_lead_ms`` later
(the response-phase start). Each note counts as matched if a squeeze lands
within ``tolerance_ms`` of its onset, measured from the response-phase start.
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Literal, Sequence, Union

import numpy as np

__all__ = [
    "SENSOR_NAMES",
    "AttemptScored",
    "GameAttempt",
    "GameConfig",
    "Ignored",
    "ListeningStarted",
    "PatternConfig",
    "Phase",
    "RhythmPattern",
    "RoundAborted",
    "RoundStarted",
    "RoundState",
    "StarVisualization",
    "TouchFrame",
    "VibrationCommand",
    "brute_force_matches",
    "generate_pattern",
    "grasp_detected",
    "round_step",
    "score_attempt",
]

log = logging.getLogger(__name__)

SENSOR_NAMES = ("side_left", "side_right", "front", "back_left", "back_right")
_SIDE_SENSORS = (0, 1)


@dataclass(frozen=True, slots=True)
class TouchFrame:
    sensors: tuple[bool, bool, bool, bool, bool]

    def __post_init__(self) -> None:
        if len(self.sensors) != len(SENSOR_NAMES):
            raise ValueError(f"expected {len(SENSOR_NAMES)} sensor channels, got {len(self.sensors)}")

    @classmethod
    def of(cls, *active: str) -> TouchFrame:
        unknown = set(active) - set(SENSOR_NAMES)
        if unknown:
            raise ValueError(f"unknown sensors: {sorted(unknown)}")
        return cls(tuple(name in active for name in SENSOR_NAMES))  # type: ignore[arg-type]


def grasp_detected(frame: TouchFrame) -> bool:
    """At least two pads touched, one of them on a side."""
    return sum(frame.sensors) >= 2 and any(frame.sensors[i] for i in _SIDE_SENSORS)


@dataclass(frozen=True, slots=True)
class PatternConfig:
    min_gap_ms: int = 400
    max_gap_ms: int = 1200
    note_duration_ms: int = 120

    def __post_init__(self) -> None:
        if self.min_gap_ms <= 0 or self.note_duration_ms <= 0:
            raise ValueError("gaps and note duration must be positive")
        if self.min_gap_ms > self.max_gap_ms:
            raise ValueError(f"min_gap_ms={self.min_gap_ms} > max_gap_ms={self.max_gap_ms}")
        if self.note_duration_ms > self.min_gap_ms:
            raise ValueError("note_duration_ms must not exceed min_gap_ms")


@dataclass(frozen=True, slots=True)
class RhythmPattern:
    note_onsets_ms: tuple[int, int, int]
    note_duration_ms: int

    def __post_init__(self) -> None:
        onsets = self.note_onsets_ms
        if len(onsets) != 3:
            raise ValueError("a rhythm pattern has exactly three notes")
        gaps = [b - a for a, b in itertools.pairwise(onsets)]
        if any(g < self.note_duration_ms or g <= 0 for g in gaps):
            raise ValueError(f"onsets {onsets} too close for {self.note_duration_ms} ms notes")

    @property
    def length_ms(self) -> int:
        return self.note_onsets_ms[-1] + self.note_duration_ms


def generate_pattern(rng: np.random.Generator, config: PatternConfig = PatternConfig()) -> RhythmPattern:
    gaps = rng.integers(config.min_gap_ms, config.max_gap_ms, size=2, endpoint=True)
    first, second = int(gaps[0]), int(gaps[1])
    return RhythmPattern((0, first, first + second), config.note_duration_ms)


@dataclass(frozen=True, slots=True)
class GameAttempt:
    pattern: RhythmPattern
    squeeze_onsets_ms: tuple[int, ...]
    per_note_matched: tuple[bool, bool, bool]

    @property
    def matched(self) -> int:
        return sum(self.per_note_matched)

    @property
    def accuracy(self) -> float:
        return self.matched / 3


def score_attempt(
    pattern: RhythmPattern, squeezes: Sequence[int], tolerance_ms: int = 150
) -> GameAttempt:
    """Greedy in-order matching of squeezes to notes.

    Each note takes the earliest remaining squeeze inside its window; squeezes
    that fall before a note's window can never match a later note and are
    skipped.
    """
    if tolerance_ms <= 0:
        raise ValueError("tolerance_ms must be positive")
    if any(b < a for a, b in itertools.pairwise(squeezes)):
        raise ValueError("squeeze timestamps must be sorted ascending")

    matched: list[bool] = []
    j = 0
    for onset in pattern.note_onsets_ms:
        while j < len(squeezes) and squeezes[j] < onset - tolerance_ms:
            j += 1
        if j < len(squeezes) and squeezes[j] <= onset + tolerance_ms:
            matched.append(True)
            j += 1
        else:
            matched.append(False)
    return GameAttempt(pattern, tuple(squeezes), tuple(matched))  # type: ignore[arg-type]


def brute_force_matches(onsets: Sequence[int], squeezes: Sequence[int], tolerance_ms: int) -> int:
    """Largest number of notes matchable by any one-to-one assignment."""
    best = 0
    slots = [None, *range(len(squeezes))]
    for choice in itertools.product(slots, repeat=len(onsets)):
        used = [c for c in choice if c is not None]
        if len(used) != len(set(used)):
            continue
        if all(c is None or abs(squeezes[c] - o) <= tolerance_ms for o, c in zip(onsets, choice)):
            best = max(best, len(used))
    return best


# ---------------------------------------------------------------------------
# Round state machine


class Phase(str, Enum):
    IDLE = "idle"
    PROMPTING = "prompting"
    LISTENING = "listening"
    SCORED = "scored"


EventKind = Literal["grasp", "release", "squeeze", "timer"]


@dataclass(frozen=True, slots=True)
class GameConfig:
    pattern: PatternConfig = field(default_factory=PatternConfig)
    tolerance_ms: int = 150
    response_lead_ms: int = 500  # cue gap between prompt end and the reproduced first note
    response_tail_ms: int = 2000
    tutorial: bool = False

    def __post_init__(self) -> None:
        if self.tolerance_ms <= 0 or self.response_tail_ms <= 0:
            raise ValueError("tolerance_ms and response_tail_ms must be positive")
        if self.response_lead_ms < 0:
            raise ValueError("response_lead_ms must be >= 0")


@dataclass(frozen=True, slots=True)
class VibrationCommand:
    t_ms: int
    round_id: int
    note_index: int
    duration_ms: int


@dataclass(frozen=True, slots=True)
class StarVisualization:
    t_ms: int
    round_id: int
    note_index: int


@dataclass(frozen=True, slots=True)
class RoundStarted:
    t_ms: int
    round_id: int
    pattern: RhythmPattern


@dataclass(frozen=True, slots=True)
class ListeningStarted:
    t_ms: int
    round_id: int


@dataclass(frozen=True, slots=True)
class AttemptScored:
    t_ms: int
    round_id: int
    attempt: GameAttempt


@dataclass(frozen=True, slots=True)
class RoundAborted:
    t_ms: int
    round_id: int
    reason: str


@dataclass(frozen=True, slots=True)
class Ignored:
    t_ms: int
    event: str
    phase: Phase


Emission = Union[
    VibrationCommand, StarVisualization, RoundStarted, ListeningStarted, AttemptScored, RoundAborted, Ignored
]


@dataclass(frozen=True, slots=True)
class RoundState:
    phase: Phase = Phase.IDLE
    round_id: int = 0  # id of the current or most recent round
    pattern: RhythmPattern | None = None
    response_start_ms: int | None = None  # squeeze offsets are measured from here
    deadline_ms: int | None = None  # end of prompt or end of response window
    squeezes: tuple[int, ...] = ()
    last_event_ms: int | None = None


def _advance(state: RoundState, now_ms: int, config: GameConfig, out: list[Emission]) -> RoundState:
    """Fire every deadline that has passed by ``now_ms``."""
    while state.deadline_ms is not None and now_ms >= state.deadline_ms:
        assert state.pattern is not None
        if state.phase is Phase.PROMPTING:
            listen = state.deadline_ms
            response = listen + config.response_lead_ms
            state = replace(
                state,
                phase=Phase.LISTENING,
                response_start_ms=response,
                deadline_ms=response + state.pattern.note_onsets_ms[-1] + config.response_tail_ms,
            )
            out.append(ListeningStarted(listen, state.round_id))
        elif state.phase is Phase.LISTENING:
            attempt = score_attempt(state.pattern, state.squeezes, config.tolerance_ms)
            out.append(AttemptScored(state.deadline_ms, state.round_id, attempt))
            state = replace(state, phase=Phase.SCORED, deadline_ms=None)
        else:  # pragma: no cover - deadlines only exist in the two active phases
            raise AssertionError(f"deadline set in phase {state.phase}")
    return state


def round_step(
    state: RoundState,
    event: EventKind,
    now_ms: int,
    config: GameConfig,
    rng: np.random.Generator,
) -> tuple[RoundState, list[Emission]]:
    """Feed one input event to the round machine.

    Returns the new state and the records emitted while getting there. Timer
    events only serve to fire due deadlines; any event does the same first.
    """
    if state.last_event_ms is not None and now_ms < state.last_event_ms:
        raise ValueError(f"event at {now_ms} ms precedes previous event at {state.last_event_ms} ms")
    out: list[Emission] = []
    state = _advance(replace(state, last_event_ms=now_ms), now_ms, config, out)

    if state.phase is Phase.SCORED:
        state = replace(state, phase=Phase.IDLE, pattern=None, response_start_ms=None, squeezes=())

    phase = state.phase
    if event == "timer":
        return state, out

    if phase is Phase.IDLE:
        if event != "grasp":
            log.debug("ignoring %s while idle at %d ms", event, now_ms)
            out.append(Ignored(now_ms, event, phase))
            return state, out
        pattern = generate_pattern(rng, config.pattern)
        round_id = state.round_id + 1
        out.append(RoundStarted(now_ms, round_id, pattern))
        for i, onset in enumerate(pattern.note_onsets_ms):
            out.append(VibrationCommand(now_ms + onset, round_id, i, pattern.note_duration_ms))
            if config.tutorial:
                out.append(StarVisualization(now_ms + onset, round_id, i))
        state = replace(
            state,
            phase=Phase.PROMPTING,
            round_id=round_id,
            pattern=pattern,
            deadline_ms=now_ms + pattern.length_ms,
            squeezes=(),
        )
        return state, out

    # PROMPTING or LISTENING
    if event == "release":
        out.append(RoundAborted(now_ms, state.round_id, "released"))
        state = replace(
            state, phase=Phase.IDLE, pattern=None, response_start_ms=None, deadline_ms=None, squeezes=()
        )
    elif event == "squeeze" and phase is Phase.LISTENING:
        assert state.response_start_ms is not None
        state = replace(state, squeezes=state.squeezes + (now_ms - state.response_start_ms,))
    else:
        log.debug("ignoring %s during %s at %d ms", event, phase.value, now_ms)
        out.append(Ignored(now_ms, event, phase))
    return state, out
