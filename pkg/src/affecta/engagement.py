"""Feedback strategies: synthetic emotions versus points.

Under ``EMOTIONS`` a completed game feeds the mood model and the face shows
the resulting mood. Under ``POINTS`` each completed game pays a fixed award
shown as a spinning coin while the mood stays pinned at its maximum.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from enum import Enum
from typing import Union

from .affect import EngineParams, MoodState, new_state, on_interaction, tick
from .expression import ExpressionConfig, FaceDescriptor, face_for_mood
from .game import GameAttempt

__all__ = [
    "CoinAward",
    "EngagementSession",
    "FaceUpdate",
    "FeedbackEvent",
    "PointsLedger",
    "StrategyConfig",
    "StrategyKind",
    "idle_heartbeat",
    "initial_mood",
    "on_game_scored",
]

COIN_ANIMATION = "coin-spin"


class StrategyKind(str, Enum):
    EMOTIONS = "emotions"
    POINTS = "points"


@dataclass(frozen=True, slots=True)
class StrategyConfig:
    kind: StrategyKind
    points_per_completion: int = 1000
    pinned_mood: float = 100.0
    positive_threshold: float = 1 / 3  # minimum accuracy counted as a positive interaction
    face_delta: float = 0.5  # mood units between emitted face updates

    def __post_init__(self) -> None:
        if self.points_per_completion <= 0:
            raise ValueError("points_per_completion must be positive")
        if self.face_delta < 0:
            raise ValueError("face_delta must be >= 0")


@dataclass(frozen=True, slots=True)
class FaceUpdate:
    mood: float
    face: FaceDescriptor


@dataclass(frozen=True, slots=True)
class CoinAward:
    points: int
    animation: str = COIN_ANIMATION


@dataclass(frozen=True, slots=True)
class FeedbackEvent:
    timestamp_ms: int
    payload: Union[FaceUpdate, CoinAward]


@dataclass(frozen=True, slots=True)
class PointsLedger:
    total_points: int = 0
    award_count: int = 0

    def award(self, points: int) -> PointsLedger:
        return PointsLedger(self.total_points + points, self.award_count + 1)


def initial_mood(strategy: StrategyConfig, params: EngineParams, now_ms: int) -> MoodState:
    state = new_state(params, now_ms)
    if strategy.kind is StrategyKind.POINTS:
        if strategy.pinned_mood != params.mood_max:
            raise ValueError("points strategy pins mood at mood_max")
        state = replace(state, mood=strategy.pinned_mood)
    return state


def _face(mood: float, params: EngineParams, expression: ExpressionConfig | None) -> FaceUpdate:
    cfg = expression or ExpressionConfig(mood_min=params.mood_min, mood_max=params.mood_max)
    return FaceUpdate(mood, face_for_mood(mood, cfg))


def on_game_scored(
    strategy: StrategyConfig,
    attempt: GameAttempt,
    mood: MoodState,
    ledger: PointsLedger,
    params: EngineParams,
    now_ms: int,
    expression: ExpressionConfig | None = None,
) -> tuple[MoodState, FeedbackEvent, PointsLedger]:
    if strategy.kind is StrategyKind.POINTS:
        ledger = ledger.award(strategy.points_per_completion)
        return mood, FeedbackEvent(now_ms, CoinAward(strategy.points_per_completion)), ledger

    # Failed attempts carry no negative update; the face just shows current mood.
    if attempt.accuracy >= strategy.positive_threshold:
        mood = on_interaction(mood, params, now_ms)
    else:
        mood = tick(mood, params, now_ms)
    return mood, FeedbackEvent(now_ms, _face(mood.mood, params, expression)), ledger


def idle_heartbeat(
    strategy: StrategyConfig,
    mood: MoodState,
    params: EngineParams,
    now_ms: int,
    last_face_mood: float | None,
    expression: ExpressionConfig | None = None,
) -> tuple[MoodState, FeedbackEvent | None]:
    """Advance passive decay; emit a face update only on a visible change."""
    if strategy.kind is StrategyKind.POINTS:
        return mood, None
    mood = tick(mood, params, now_ms)
    # Nothing rendered yet (last_face_mood is None): always draw.
    if last_face_mood is not None and abs(mood.mood - last_face_mood) < strategy.face_delta:
        return mood, None
    return mood, FeedbackEvent(now_ms, _face(mood.mood, params, expression))


class EngagementSession:
    """Per-session strategy state: mood, ledger and the last rendered face."""

    def __init__(
        self,
        strategy: StrategyConfig,
        params: EngineParams = EngineParams(),
        start_ms: int = 0,
        expression: ExpressionConfig | None = None,
    ) -> None:
        self.strategy = strategy
        self.params = params
        self.expression = expression
        self.mood = initial_mood(strategy, params, start_ms)
        self.ledger = PointsLedger()
        self.last_face_mood: float | None = None

    def start(self, now_ms: int) -> FeedbackEvent:
        """Initial face shown when the session begins."""
        event = FeedbackEvent(now_ms, _face(self.mood.mood, self.params, self.expression))
        self.last_face_mood = self.mood.mood
        return event

    def game_scored(self, attempt: GameAttempt, now_ms: int) -> FeedbackEvent:
        self.mood, event, self.ledger = on_game_scored(
            self.strategy, attempt, self.mood, self.ledger, self.params, now_ms, self.expression
        )
        if isinstance(event.payload, FaceUpdate):
            self.last_face_mood = event.payload.mood
        return event

    def heartbeat(self, now_ms: int) -> FeedbackEvent | None:
        self.mood, event = idle_heartbeat(
            self.strategy, self.mood, self.params, now_ms, self.last_face_mood, self.expression
        )
        if event is not None:
            assert isinstance(event.payload, FaceUpdate)
            self.last_face_mood = event.payload.mood
        return event
