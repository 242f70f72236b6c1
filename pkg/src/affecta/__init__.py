"""Mood-model and points engagement engines for a pocket tactile robot, with
session simulation and the statistics used to compare the two strategies."""

from .affect import EngineParams, MoodState, impact_at, new_state, on_interaction, tick
from .engagement import StrategyConfig, StrategyKind
from .expression import FaceDescriptor, face_for_mood

__version__ = "0.1.0"

__all__ = [
    "EngineParams",
    "FaceDescriptor",
    "MoodState",
    "StrategyConfig",
    "StrategyKind",
    "face_for_mood",
    "impact_at",
    "new_state",
    "on_interaction",
    "tick",
]
