"""TwinWorld: the deterministic 2D tabletop used as both real-proxy and simulation domain."""
from cotrain.world.collect import Controller, collect_demos, observe, replay_episode, rollout
from cotrain.world.expert import ExpertController, scripted_expert
from cotrain.world.objects import ObjectSpec, get_object_spec
from cotrain.world.presets import get_preset, load_world_file, world_from_entry
from cotrain.world.render import render
from cotrain.world.sim import check_success, reset, step
from cotrain.world.spec import GapConfig, TaskKind, TaskSpec, WorldConfig
from cotrain.world.state import ObjectState, State

__all__ = [
    "Controller",
    "ExpertController",
    "GapConfig",
    "ObjectSpec",
    "ObjectState",
    "State",
    "TaskKind",
    "TaskSpec",
    "WorldConfig",
    "check_success",
    "collect_demos",
    "get_object_spec",
    "get_preset",
    "load_world_file",
    "observe",
    "render",
    "replay_episode",
    "reset",
    "rollout",
    "scripted_expert",
    "step",
    "world_from_entry",
]
