"""Stepless mood-to-face mapping.

The face has no mouth; it is drawn from eyebrow tilt and eye arc only. Both
parameters are affine in mood, so every mood value renders a distinct face.
"""

from __future__ import annotations

from dataclasses import dataclass

__all__ = ["ExpressionConfig", "FaceDescriptor", "face_for_mood", "mood_for_face"]


@dataclass(frozen=True, slots=True)
class ExpressionConfig:
    mood_min: float = 1.0
    mood_max: float = 100.0
    max_eyebrow_angle: float = 30.0  # degrees, symmetric around 0
    max_eye_curvature: float = 1.0  # +1 smile arc, -1 frown arc

    def __post_init__(self) -> None:
        if self.mood_min >= self.mood_max:
            raise ValueError("mood_min must be smaller than mood_max")
        if self.max_eyebrow_angle <= 0 or self.max_eye_curvature <= 0:
            raise ValueError("expression ranges must be positive")


@dataclass(frozen=True, slots=True)
class FaceDescriptor:
    eyebrow_angle: float
    eye_curvature: float

    def to_dict(self) -> dict[str, float]:
        return {"eyebrow_angle": self.eyebrow_angle, "eye_curvature": self.eye_curvature}


DEFAULT_EXPRESSION = ExpressionConfig()


def _unit(mood: float, config: ExpressionConfig) -> float:
    """Mood rescaled to [-1, 1]."""
    if not config.mood_min <= mood <= config.mood_max:
        raise ValueError(f"mood {mood} outside [{config.mood_min}, {config.mood_max}]")
    span = config.mood_max - config.mood_min
    return 2.0 * (mood - config.mood_min) / span - 1.0


def face_for_mood(mood: float, config: ExpressionConfig = DEFAULT_EXPRESSION) -> FaceDescriptor:
    u = _unit(mood, config)
    return FaceDescriptor(
        eyebrow_angle=u * config.max_eyebrow_angle,
        eye_curvature=u * config.max_eye_curvature,
    )


def mood_for_face(face: FaceDescriptor, config: ExpressionConfig = DEFAULT_EXPRESSION) -> float:
    """Invert :func:`face_for_mood` using the eyebrow channel."""
    u = face.eyebrow_angle / config.max_eyebrow_angle
    return config.mood_min + (u + 1.0) * (config.mood_max - config.mood_min) / 2.0
