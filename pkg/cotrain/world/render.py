"""Off-screen rasterization of TwinWorld states with pygame."""
from __future__ import annotations

import math
import os
from typing import Tuple

os.environ.setdefault("PYGAME_HIDE_SUPPORT_PROMPT", "1")

import numpy as np
import pygame

from cotrain.factors import CameraConfig
from cotrain.geometry import Pose2, Rect
from cotrain.world.palettes import Palette, get_palette
from cotrain.world.sim import door_tip
from cotrain.world.spec import TABLE, GapConfig
from cotrain.world.state import State

DOOR_LENGTH = 0.25
EE_MARK = 1  # half-size of the ee cross, in pixels


class ViewProjector:
    """Maps table coordinates to pixel coordinates for one camera view."""

    def __init__(self, view: Pose2, window: Tuple[float, float], resolution: Tuple[int, int]) -> None:
        self.to_local = view.inverse()
        self.window = window
        self.rows, self.cols = resolution

    def project(self, x: float, y: float) -> Tuple[float, float]:
        lx, ly = self.to_local.transform_point(x, y)
        col = (lx / self.window[0] + 0.5) * self.cols
        row = (0.5 - ly / self.window[1]) * self.rows
        return col, row

    def pixel(self, x: float, y: float) -> Tuple[int, int]:
        col, row = self.project(x, y)
        return int(math.floor(col)), int(math.floor(row))

    def radius_px(self, radius: float) -> int:
        return max(1, int(round(radius * self.cols / self.window[0])))


def render(
    s: State,
    cam: CameraConfig,
    gap: GapConfig,
    table: Rect = TABLE,
    door_length: float = DOOR_LENGTH,
) -> np.ndarray:
    """Render `s` as an (H, W, 3) uint8 image seen through cam ⊕ gap.camera_offset."""
    palette: Palette = get_palette(gap.palette_id)
    view = cam.center.compose(gap.camera_offset)
    proj = ViewProjector(view, cam.window, cam.resolution)

    surface = pygame.Surface((proj.cols, proj.rows))
    surface.fill(palette.background)
    pygame.draw.polygon(surface, palette.table, [proj.pixel(x, y) for x, y in table.corners()])

    door = s.door
    if door is not None and s.door_angle is not None:
        tip = door_tip(door.pose, s.door_angle, door_length)
        pygame.draw.line(surface, palette.door, proj.pixel(*door.pose.xy), proj.pixel(*tip), 2)

    for obj in s.objects:
        if obj.is_door:
            continue
        color = palette.object_color(obj.category, obj.color)
        pygame.draw.circle(surface, color, proj.pixel(*obj.pose.xy), proj.radius_px(obj.radius))

    ee_color = palette.ee_open if s.gripper_open else palette.ee_closed
    cx, cy = proj.pixel(*s.ee_pose.xy)
    pygame.draw.line(surface, ee_color, (cx - EE_MARK, cy), (cx + EE_MARK, cy))
    pygame.draw.line(surface, ee_color, (cx, cy - EE_MARK), (cx, cy + EE_MARK))

    # surfarray is column-major (W, H, 3)
    return np.ascontiguousarray(pygame.surfarray.array3d(surface).transpose(1, 0, 2), dtype=np.uint8)
