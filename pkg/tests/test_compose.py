import math

import pytest

from cotrain.compose import dataset_stats, diff, open_loop_gap, summarize
from cotrain.factors import CameraConfig, DynamicsParams
from cotrain.geometry import Pose2, Rect
from cotrain.trajectory.types import CompositionManifest
from cotrain.world.collect import collect_demos
from cotrain.world.presets import get_preset


@pytest.fixture(scope="module")
def dc_demos():
    return collect_demos(get_preset("dc_cup_pnp"), 2, seed=3)


def test_diff_against_digital_cousin(cup_demos, dc_demos):
    delta = diff(summarize(cup_demos), summarize(dc_demos))
    assert delta.camera_translation_delta == pytest.approx(0.0111803, abs=1e-6)
    assert delta.camera_rotation_delta == pytest.approx(1.1459156, abs=1e-6)
    assert delta.init_region_iou == pytest.approx(1.0)
    assert delta.category_overlap == (1, 0, 0)
    assert delta.texture_overlap == (0, 1, 1)
    assert delta.task_overlap == (1, 0, 0)
    assert delta.dynamics_delta["action_noise_std"] == pytest.approx(0.001)
    assert "init region IoU" in delta.table()


def test_self_diff_is_zero(cup_demos):
    m = summarize(cup_demos)
    delta = diff(m, m)
    assert delta.camera_translation_delta == 0.0
    assert delta.camera_rotation_delta == 0.0
    assert all(v == 0.0 for v in delta.dynamics_delta.values())
    assert delta.to_dict()["texture_overlap"] == {"shared": 1, "a_only": 0, "b_only": 0}


def test_dataset_stats(cup_demos):
    stats = dataset_stats(cup_demos)
    assert stats["trajectories"] == 4
    assert stats["frames"] == cup_demos.frame_count
    assert stats["min_length"] <= stats["mean_length"] <= stats["max_length"]
    assert stats["mean_success"] == 1.0
    assert stats["object_categories"] == ["cup"]
    assert stats["tasks"] == ["cup_to_plate"]
    assert stats["init_region_area_m2"] == pytest.approx(0.3 * 0.25)


def test_replay_in_recording_world_has_no_gap(cup_demos, cup_world):
    gap = open_loop_gap(cup_demos, cup_world)
    assert gap.episodes == 4
    assert gap.max_final_ee_error == pytest.approx(0.0, abs=1e-12)
    assert gap.replay_success_rate == 1.0
    assert open_loop_gap(cup_demos, cup_world, limit=2).episodes == 2


def _manifest(region, center, categories=("cup",), textures=("default",), noise=0.0):
    return CompositionManifest(
        object_categories=frozenset(categories),
        instances={c: (f"{c}_a",) for c in categories},
        init_region=Rect(*region),
        camera=CameraConfig(center=center),
        texture_ids=frozenset(textures),
        dynamics=DynamicsParams(action_noise_std=noise),
        task_ids=frozenset({"cup_to_plate"}),
    )


def test_region_iou_and_camera_deltas():
    a = _manifest((0.0, 0.0, 1.0, 1.0), Pose2(0.4, 0.4, 0.0))
    b = _manifest((0.5, 0.0, 1.5, 1.0), Pose2(0.7, 0.4, math.radians(20.0)))
    delta = diff(a, b)
    assert delta.init_region_iou == pytest.approx(1.0 / 3.0)
    assert delta.camera_translation_delta == pytest.approx(0.3)
    assert delta.camera_rotation_delta == pytest.approx(20.0)


def test_diff_is_symmetric():
    a = _manifest((0.1, 0.1, 0.4, 0.4), Pose2(0.4, 0.4, 0.1), categories=("cup", "can"), noise=0.002)
    b = _manifest((0.2, 0.2, 0.5, 0.6), Pose2(0.45, 0.3, -0.2), categories=("cup", "bottle", "lemon"), textures=("cousin",))
    ab, ba = diff(a, b), diff(b, a)
    assert ab.camera_translation_delta == ba.camera_translation_delta
    assert ab.camera_rotation_delta == pytest.approx(ba.camera_rotation_delta, abs=1e-12)
    assert ab.init_region_iou == ba.init_region_iou
    assert ab.dynamics_delta == ba.dynamics_delta
    for field in ("category_overlap", "task_overlap", "texture_overlap"):
        shared, a_only, b_only = getattr(ab, field)
        assert getattr(ba, field) == (shared, b_only, a_only)
    assert ab.category_overlap == (1, 1, 2)


def test_camera_translation_obeys_triangle_inequality():
    region = (0.1, 0.1, 0.4, 0.4)
    centers = [Pose2(0.4, 0.4, 0.0), Pose2(0.55, 0.2, 0.3), Pose2(0.1, 0.65, -0.4), Pose2(0.4, 0.4, 0.2)]
    manifests = [_manifest(region, c) for c in centers]
    for a in manifests:
        for b in manifests:
            for c in manifests:
                ab = diff(a, b).camera_translation_delta
                bc = diff(b, c).camera_translation_delta
                ac = diff(a, c).camera_translation_delta
                assert ac <= ab + bc + 1e-12
