"""Homeostatic mood model.

A scalar mood in [1, 100] decays passively on a fixed 1 s grid with a decay
rate that slowly grows, and is lifted by interactions whose potency (impact)
accrues with idle time and is damped each time it is spent.

Everything here is a pure function of explicit millisecond timestamps; the
engine never reads a clock.
"""

from __future__ import annotations

import hashlib
import math
import struct
import sys
from dataclasses import asdict, dataclass, replace
from typing import Iterable

__all__ = [
    "EngineParams",
    "MoodState",
    "TimeRegressionError",
    "impact_at",
    "interaction_gain",
    "new_state",
    "on_interaction",
    "params_digest",
    "tick",
    "trajectory_digest",
]

# Multiplicative damping can drive the decay rate towards underflow on long
# sub-second bursts; never let it reach exactly zero.
_DECAY_FLOOR = sys.float_info.min


class TimeRegressionError(ValueError):
    """Raised when an operation is given a timestamp earlier than an anchor."""


@dataclass(frozen=True, slots=True)
class EngineParams:
    mood_init: float = 50.0
    decay_init: float = 1e-5  # mood units per ms
    impact_init: float = 0.0
    tick_interval_ms: int = 1000
    decay_increment: float = 1e-7  # per tick
    decay_cap: float = 1e-4
    impact_growth_per_s: float = 0.75
    impact_plateau_s: float = 3600.0
    impact_plateau_bonus: float = 2700.0
    mood_gain_factor: float = 50.0
    decay_damp_factor: float = 0.0005
    impact_damp_factor: float = 0.75
    mood_min: float = 1.0
    mood_max: float = 100.0

    def __post_init__(self) -> None:
        positive = (
            "decay_init",
            "tick_interval_ms",
            "decay_increment",
            "decay_cap",
            "impact_growth_per_s",
            "impact_plateau_s",
            "impact_plateau_bonus",
            "mood_gain_factor",
            "decay_damp_factor",
            "impact_damp_factor",
            "mood_min",
            "mood_max",
        )
        for name in positive:
            value = getattr(self, name)
            if not (isinstance(value, (int, float)) and math.isfinite(value) and value > 0):
                raise ValueError(f"{name} must be a finite positive number, got {value!r}")
        if not isinstance(self.tick_interval_ms, int):
            raise ValueError("tick_interval_ms must be an integer")
        if self.mood_min >= self.mood_max:
            raise ValueError("mood_min must be smaller than mood_max")
        if not self.mood_min <= self.mood_init <= self.mood_max:
            raise ValueError(
                f"mood_init={self.mood_init} outside [{self.mood_min}, {self.mood_max}]"
            )
        if self.decay_init > self.decay_cap:
            raise ValueError("decay_init exceeds decay_cap")
        if not (math.isfinite(self.impact_init) and self.impact_init >= 0):
            raise ValueError("impact_init must be >= 0")

    def to_dict(self) -> dict[str, float | int]:
        return asdict(self)

    @classmethod
    def from_overrides(cls, overrides: dict[str, str | float | int]) -> EngineParams:
        """Build params from ``key=value`` style overrides; unknown keys are rejected."""
        known = {f: type(v) for f, v in asdict(cls()).items()}
        values: dict[str, float | int] = {}
        for key, raw in overrides.items():
            if key not in known:
                raise ValueError(f"unknown engine parameter {key!r}")
            values[key] = int(raw) if known[key] is int else float(raw)
        return cls(**values)


@dataclass(frozen=True, slots=True)
class MoodState:
    mood: float
    decay_rate: float
    impact: float  # value stored at the last interaction, already damped
    last_interaction_ms: int
    last_decay_tick_ms: int

    def pack(self) -> bytes:
        return struct.pack(
            "<dddqq",
            self.mood,
            self.decay_rate,
            self.impact,
            self.last_interaction_ms,
            self.last_decay_tick_ms,
        )


def params_digest(params: EngineParams) -> str:
    items = sorted(params.to_dict().items())
    text = ";".join(f"{k}={v!r}" for k, v in items)
    return hashlib.sha256(text.encode()).hexdigest()


def trajectory_digest(states: Iterable[MoodState]) -> str:
    h = hashlib.sha256()
    for state in states:
        h.update(state.pack())
    return h.hexdigest()


def new_state(params: EngineParams, now_ms: int) -> MoodState:
    return MoodState(
        mood=float(params.mood_init),
        decay_rate=float(params.decay_init),
        impact=float(params.impact_init),
        last_interaction_ms=now_ms,
        last_decay_tick_ms=now_ms,
    )


def tick(state: MoodState, params: EngineParams, now_ms: int) -> MoodState:
    """Apply every decay step that is due at ``now_ms``.

    Each step first grows the decay rate by one increment (capped), then
    subtracts ``decay_rate * tick_interval`` from the mood (floored).
    """
    elapsed = now_ms - state.last_decay_tick_ms
    if elapsed < 0:
        raise TimeRegressionError(
            f"tick at {now_ms} ms precedes last decay tick {state.last_decay_tick_ms} ms"
        )
    steps = elapsed // params.tick_interval_ms
    if steps == 0:
        return state

    dt = params.tick_interval_ms
    mood, decay = state.mood, state.decay_rate
    cap, inc, floor = params.decay_cap, params.decay_increment, params.mood_min
    for _ in range(steps):
        if mood == floor and decay == cap:
            break  # fixed point: remaining steps change nothing
        decay = min(decay + inc, cap)
        mood = max(floor, mood - decay * dt)

    # direct construction: this is the hot path of long replays
    return MoodState(mood, decay, state.impact, state.last_interaction_ms, state.last_decay_tick_ms + steps * dt)


def impact_at(state: MoodState, params: EngineParams, now_ms: int) -> float:
    elapsed_ms = now_ms - state.last_interaction_ms
    if elapsed_ms < 0:
        raise TimeRegressionError(
            f"impact queried at {now_ms} ms before last interaction {state.last_interaction_ms} ms"
        )
    tau = elapsed_ms / 1000.0
    if tau < params.impact_plateau_s:
        return state.impact + params.impact_growth_per_s * tau
    return state.impact + params.impact_plateau_bonus


def on_interaction(state: MoodState, params: EngineParams, now_ms: int) -> MoodState:
    """Register a positive interaction at ``now_ms``.

    Due decay steps are applied first, so an interaction landing exactly on a
    tick boundary sees the decayed mood.
    """
    if now_ms < state.last_interaction_ms:
        raise TimeRegressionError(
            f"interaction at {now_ms} ms precedes previous interaction "
            f"{state.last_interaction_ms} ms"
        )
    state = tick(state, params, now_ms)
    gained = impact_at(state, params, now_ms)
    return replace(
        state,
        mood=min(params.mood_max, state.mood + gained * params.mood_gain_factor),
        decay_rate=max(_DECAY_FLOOR, state.decay_rate * params.decay_damp_factor),
        impact=max(0.0, gained * params.impact_damp_factor),
        last_interaction_ms=now_ms,
    )


def interaction_gain(state: MoodState, params: EngineParams, now_ms: int) -> float:
    """Mood increase caused by an interaction at ``now_ms``, excluding decay."""
    before = tick(state, params, now_ms).mood
    return on_interaction(state, params, now_ms).mood - before
