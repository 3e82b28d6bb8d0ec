import math

import pytest

from cotrain.geometry import Pose2, Rect, wrap_angle


def test_wrap_angle_range():
    assert wrap_angle(math.pi) == pytest.approx(math.pi)
    assert wrap_angle(-math.pi) == pytest.approx(math.pi)
    assert wrap_angle(3 * math.pi) == pytest.approx(math.pi)
    assert wrap_angle(0.5) == pytest.approx(0.5)


def test_compose_with_inverse_is_identity():
    p = Pose2(0.3, -0.2, 2.5)
    assert p.compose(p.inverse()).is_close(Pose2.identity(), 1e-12)
    assert p.inverse().compose(p).is_close(Pose2.identity(), 1e-12)


def test_relative_to_recovers_pose():
    frame = Pose2(0.1, 0.4, -1.1)
    p = Pose2(0.5, 0.2, 0.7)
    assert frame.compose(p.relative_to(frame)).is_close(p, 1e-12)


def test_compose_translates_in_rotated_frame():
    p = Pose2(1.0, 0.0, math.pi / 2).compose(Pose2(1.0, 0.0, 0.0))
    assert p.x == pytest.approx(1.0)
    assert p.y == pytest.approx(1.0)
    assert p.theta == pytest.approx(math.pi / 2)


def test_pose_rejects_non_finite():
    with pytest.raises(ValueError):
        Pose2(float("nan"), 0.0, 0.0)


def test_rect_iou_and_inner():
    r = Rect(0.0, 0.0, 1.0, 1.0)
    assert r.iou(r) == 1.0
    assert r.iou(Rect(2.0, 2.0, 3.0, 3.0)) == 0.0
    assert r.iou(Rect(0.5, 0.0, 1.5, 1.0)) == pytest.approx(1 / 3)
    assert r.inner(0.2).area == pytest.approx(0.04)
    assert r.inner(0.2).center == r.center


def test_rect_clamp_and_union():
    r = Rect(0.0, 0.0, 0.8, 0.8)
    assert r.clamp(-1.0, 0.5) == (0.0, 0.5)
    assert r.bounds_union(Rect(0.5, 0.5, 1.0, 0.9)) == Rect(0.0, 0.0, 1.0, 0.9)
