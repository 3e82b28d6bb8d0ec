import numpy as np
import pytest

from cotrain.errors import OutOfWorkspace, UnsegmentableDemo
from cotrain.geometry import Pose2
from cotrain.mimicgen.generate import execute_plan, generate, plan_actions
from cotrain.mimicgen.segment import TARGET_REGION_ID, BoundaryKind, segment_source
from cotrain.mimicgen.transform import connect, segment_actions, transform_segment, trim_approach
from cotrain.trajectory.types import GeneratorKind, SourceTag
from cotrain.world.collect import collect_demos, replay_episode
from cotrain.world.sim import reset
from cotrain.world.state import DOOR_ID


def _segments(world, traj):
    return segment_source(traj, replay_episode(world, traj), world.task)


def test_pick_place_segments_cover_every_frame(cup_world, cup_demos):
    for traj in cup_demos.trajectories:
        segs = _segments(cup_world, traj)
        assert segs[0].start == 0
        assert segs[-1].end == len(traj)
        for a, b in zip(segs, segs[1:]):
            assert a.end == b.start
        assert segs[0].boundary.kind == BoundaryKind.GRASP
        assert segs[0].reference_object == "obj0"
        assert segs[-1].reference_object == TARGET_REGION_ID


def test_door_demo_is_one_segment(door_world, door_demos):
    segs = _segments(door_world, door_demos.trajectories[0])
    assert len(segs) == 1
    assert segs[0].boundary.kind == BoundaryKind.DOOR_CONTACT_END
    assert segs[0].reference_object == DOOR_ID


def test_demo_without_events_is_unsegmentable(cup_world, cup_demos):
    traj = cup_demos.trajectories[0]
    frozen = [replay_episode(cup_world, traj)[0]] * (len(traj) + 1)
    with pytest.raises(UnsegmentableDemo):
        segment_source(traj, frozen, cup_world.task)


def test_transform_preserves_relative_poses(cup_world, cup_demos):
    new_pose = Pose2(0.3, 0.4, 0.6)
    for traj in cup_demos.trajectories:
        for seg in _segments(cup_world, traj):
            moved = transform_segment(seg, new_pose)
            for before, after in zip(seg.ee_path, moved.ee_path):
                assert after.relative_to(new_pose).is_close(before.relative_to(seg.reference_pose), 1e-9)


def test_transform_outside_table(cup_world, cup_demos):
    seg = _segments(cup_world, cup_demos.trajectories[0])[0]
    with pytest.raises(OutOfWorkspace):
        transform_segment(seg, Pose2(5.0, 5.0, 0.0), cup_world.table)


def test_segment_actions_reproduce_path(cup_world, cup_demos):
    seg = _segments(cup_world, cup_demos.trajectories[0])[0]
    deltas = segment_actions(seg)
    assert deltas.shape == (len(seg), 4)
    end = np.array(seg.ee_path[0].xy) + deltas[:, :2].sum(axis=0)
    assert np.allclose(end, seg.ee_path[-1].xy, atol=1e-12)


def test_identity_replay_reproduces_source(cup_world, cup_demos):
    for traj in cup_demos.trajectories:
        segs = _segments(cup_world, traj)
        start = reset(cup_world, traj.seed)
        plan = plan_actions(segs, start, cup_world, approach_radius=None)
        generated, _ = execute_plan(cup_world, traj.seed, plan, SourceTag.DIGITAL_COUSIN)
        assert generated.success == 1.0
        assert len(generated) == len(traj)
        assert np.allclose(generated.proprio[:, :2], traj.proprio[:, :2], atol=1e-6)


def test_connect_steps():
    assert connect(Pose2(0.1, 0.1, 0.0), Pose2(0.1, 0.1, 0.0)) == []
    actions = connect(Pose2(0.1, 0.1, 0.0), Pose2(0.2, 0.1, 0.0), max_step=0.02, gripper=0.0)
    assert len(actions) == 5
    assert all(np.hypot(a.delta[0], a.delta[1]) <= 0.02 + 1e-12 for a in actions)
    assert all(a.gripper == 0.0 for a in actions)
    assert sum(a.delta[0] for a in actions) == pytest.approx(0.1, abs=1e-12)
    turning = connect(Pose2(0.1, 0.1, 0.0), Pose2(0.1, 0.1, 1.0), max_step=0.02)
    assert len(turning) == 5
    with pytest.raises(ValueError):
        connect(Pose2(), Pose2(0.1, 0.0, 0.0), max_step=0.0)


def test_generate_multiplies_sources(cup_world, cup_demos):
    data, report = generate(cup_demos, cup_world, 5, seed=11, threads=1)
    assert len(data) == 5
    assert report.successes == 5
    assert report.attempts == report.successes + report.discards
    assert report.generation_success_rate >= 0.5
    assert data.source == SourceTag.DIGITAL_COUSIN
    assert all(t.generator == GeneratorKind.MIMICGEN_LITE for t in data.trajectories)
    assert all(t.success == 1.0 for t in data.trajectories)


def test_generate_ignores_thread_count(cup_world, cup_demos):
    serial, serial_report = generate(cup_demos, cup_world, 3, seed=5, threads=1)
    parallel, parallel_report = generate(cup_demos, cup_world, 3, seed=5, threads=2)
    assert serial.trajectories == parallel.trajectories
    assert serial_report.per_attempt_seeds == parallel_report.per_attempt_seeds


def test_generate_needs_sources(cup_world, cup_demos):
    with pytest.raises(ValueError):
        generate(cup_demos.head(0), cup_world, 1, seed=0)


def test_trim_approach_keeps_the_object_relative_tail(cup_world, cup_demos):
    for traj in cup_demos.trajectories:
        for seg in _segments(cup_world, traj):
            tail = trim_approach(seg, 0.05)
            assert tail.end == seg.end
            assert tail.ee_path[-1] == seg.ee_path[-1]
            assert tail.gripper[-1] == seg.gripper[-1]
            assert len(tail.ee_path) == len(tail) + 1
            assert all(p.distance_to(tail.ee_path[-1]) <= 0.05 for p in tail.ee_path[1:-1])


def test_trim_approach_leaves_door_segments(door_world, door_demos):
    seg = _segments(door_world, door_demos.trajectories[0])[0]
    assert trim_approach(seg, 0.05) is seg


def test_trimmed_plan_heads_for_the_new_object(cup_world, cup_demos):
    segs = _segments(cup_world, cup_demos.trajectories[0])
    for seed in range(100, 110):
        start = reset(cup_world, seed)
        plan = plan_actions(segs, start, cup_world)
        goal = np.array(start.objects[0].pose.xy) - np.array(start.ee_pose.xy)
        first = plan[0, :2]
        cosine = float(first @ goal / (np.linalg.norm(first) * np.linalg.norm(goal)))
        assert cosine > 0.7
        # the bridge ends on the retargeted tail, next to the object
        tail = transform_segment(trim_approach(segs[0], 0.05), start.objects[0].pose)
        assert tail.ee_path[0].distance_to(start.objects[0].pose) <= 0.05 + 0.03


def test_execute_plan_stops_at_horizon(cup_world):
    short = cup_world.evolve(episode_horizon=7)
    still = np.tile([0.0, 0.0, 0.0, 1.0], (50, 1))
    traj, states = execute_plan(short, 0, still, SourceTag.DIGITAL_COUSIN)
    assert len(traj) == 7
    assert len(states) == 8
    assert traj.success == 0.0


@pytest.mark.slow
def test_ten_sources_yield_a_hundred_demos(cup_world):
    sources = collect_demos(cup_world, 10, seed=13)
    data, report = generate(sources, cup_world, 100, seed=17, threads=2)
    assert len(data) == 100
    assert report.successes == 100
    assert not report.budget_exhausted
    assert len(set(report.source_indices)) >= 8
    assert all(t.success == 1.0 for t in data.trajectories)
