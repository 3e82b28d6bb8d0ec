import os
from dataclasses import dataclass
from typing import Tuple


default_seed = 12345


@dataclass
class WorkbenchConfig:
    # Table bounds in meters: (x0, y0, x1, y1).
    table: Tuple[float, float, float, float] = (0.0, 0.0, 0.8, 0.8)
    grasp_radius: float = 0.03
    # Rendered frames (rows, cols); the policy pools them down to image_grid x image_grid.
    image_height: int = 32
    image_width: int = 32
    image_grid: int = 8
    # Per-step action bounds: dx, dy (m), dtheta (rad), gripper command.
    action_low: Tuple[float, float, float, float] = (-0.05, -0.05, -0.2, 0.0)
    action_high: Tuple[float, float, float, float] = (0.05, 0.05, 0.2, 1.0)
    episode_horizon: int = 120
    # scripted expert
    expert_jitter_std: float = 0.005
    expert_max_speed: float = 0.03
    # mimicgen-lite
    connect_max_step: float = 0.02
    # retargeted grasp/release segments keep only the poses within this distance of their end
    approach_radius: float = 0.05
    generation_budget_factor: int = 20
    collect_budget_factor: int = 10
    seed: int = default_seed
    threads: int = 1


DEFAULTS = WorkbenchConfig()


def thread_cap() -> int:
    """Parallel worker cap from COTRAIN_THREADS (default: DEFAULTS.threads)."""
    raw = os.environ.get("COTRAIN_THREADS", "")
    try:
        value = int(raw) if raw else DEFAULTS.threads
    except ValueError:
        value = DEFAULTS.threads
    return max(1, value)
