import pytest
from hypothesis import given
from hypothesis import strategies as st

from affecta.expression import ExpressionConfig, FaceDescriptor, face_for_mood, mood_for_face

moods = st.floats(1, 100, allow_nan=False)


@pytest.mark.parametrize(
    ("mood", "angle", "curve"),
    [(100, 30, 1), (1, -30, -1), (50.5, 0, 0)],
)
def test_endpoints_and_midpoint(mood, angle, curve):
    face = face_for_mood(mood)
    assert face.eyebrow_angle == pytest.approx(angle, abs=1e-12)
    assert face.eye_curvature == pytest.approx(curve, abs=1e-12)


@pytest.mark.parametrize("mood", [0.99, 100.01, -5])
def test_out_of_range(mood):
    with pytest.raises(ValueError):
        face_for_mood(mood)


@given(moods, moods)
def test_strictly_increasing(m1, m2):
    if m1 == m2:
        return
    lo, hi = sorted((m1, m2))
    f_lo, f_hi = face_for_mood(lo), face_for_mood(hi)
    assert f_lo.eyebrow_angle < f_hi.eyebrow_angle or hi - lo < 1e-13
    assert f_lo.eye_curvature < f_hi.eye_curvature or hi - lo < 1e-13


@given(moods, st.floats(0, 1))
def test_lipschitz(mood, eps):
    other = min(100.0, mood + eps)
    delta = abs(face_for_mood(other).eyebrow_angle - face_for_mood(mood).eyebrow_angle)
    assert delta <= 60 / 99 * (other - mood) + 1e-12


@given(moods)
def test_round_trip(mood):
    assert mood_for_face(face_for_mood(mood)) == pytest.approx(mood, abs=1e-10)


def test_configurable_ranges():
    cfg = ExpressionConfig(max_eyebrow_angle=45, max_eye_curvature=0.5)
    assert face_for_mood(100, cfg) == FaceDescriptor(45.0, 0.5)
    with pytest.raises(ValueError):
        ExpressionConfig(mood_min=10, mood_max=5)
