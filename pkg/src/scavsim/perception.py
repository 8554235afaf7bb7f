"""Depth-map, panorama, and LIDAR observations by ray casting.

No rendering: depths are Euclidean distances from the eye to the first
static-geometry hit (terrain, building slabs, obstacles, water surface).
Agents are not part of the static scene and never appear in depth output.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .world import WorldMap

DEFAULT_WIDTH = 10
DEFAULT_HEIGHT = 10
DEFAULT_FOV = 90.0
DEFAULT_MAX_RANGE = 100.0

_MODES = ("frustum", "panorama")


@dataclass(frozen=True)
class CameraSpec:
    mode: str = "frustum"
    width: int = DEFAULT_WIDTH
    height: int = DEFAULT_HEIGHT
    horizontal_fov: float = DEFAULT_FOV
    vertical_fov: float = DEFAULT_FOV
    max_range: float = DEFAULT_MAX_RANGE

    def __post_init__(self):
        if self.mode not in _MODES:
            raise ValueError(f"camera mode must be one of {_MODES}")
        if self.width < 1 or self.height < 1:
            raise ValueError("camera resolution must be >= 1x1")
        if self.mode == "frustum" and not (0.0 < self.horizontal_fov < 180.0):
            raise ValueError("frustum horizontal_fov must lie in (0, 180)")
        if not (0.0 < self.vertical_fov < 180.0):
            raise ValueError("vertical_fov must lie in (0, 180)")
        if self.max_range <= 0.0:
            raise ValueError("max_range must be positive")


@dataclass(frozen=True)
class Pose:
    """Eye position plus view angles; yaw wraps, pitch is clamped."""

    position: tuple[float, float, float]
    yaw: float = 0.0
    pitch: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "yaw", self.yaw % 360.0)
        object.__setattr__(self, "pitch", min(89.0, max(-89.0, self.pitch)))


@dataclass(frozen=True)
class DepthMap:
    values: np.ndarray  # (height, width) meters; max_range encodes no-hit
    camera: CameraSpec
    pose: Pose


@dataclass(frozen=True)
class LidarScan:
    ranges: np.ndarray
    beam_azimuths: np.ndarray
    beam_elevation: float = 0.0
    max_range: float = DEFAULT_MAX_RANGE  # ranges equal to this mean no hit


def direction_from_angles(yaw_deg: float, pitch_deg: float) -> np.ndarray:
    """Unit view vector; yaw 0 = +x turning toward +z, pitch + = up."""
    yaw = math.radians(yaw_deg)
    pitch = math.radians(pitch_deg)
    cp = math.cos(pitch)
    return np.array([cp * math.cos(yaw), math.sin(pitch), cp * math.sin(yaw)])


def cast_ray(world: WorldMap, origin, direction, max_range: float) -> float:
    """Distance to the first static-geometry hit, or max_range."""
    d = np.asarray(direction, dtype=np.float64)
    norm = float(np.linalg.norm(d))
    if abs(norm - 1.0) > 1e-9:
        raise ValueError(f"direction must be unit length, |d| = {norm}")
    return world.geometry.cast_ray(tuple(origin), tuple(d), max_range)


def _frustum_directions(pose: Pose, camera: CameraSpec) -> np.ndarray:
    fwd = direction_from_angles(pose.yaw, pose.pitch)
    right = direction_from_angles(pose.yaw + 90.0, 0.0)
    up = np.cross(right, fwd)
    up /= np.linalg.norm(up)
    tan_h = math.tan(math.radians(camera.horizontal_fov) / 2.0)
    tan_v = math.tan(math.radians(camera.vertical_fov) / 2.0)
    j = (2.0 * (np.arange(camera.width) + 0.5) / camera.width - 1.0) * tan_h
    i = (1.0 - 2.0 * (np.arange(camera.height) + 0.5) / camera.height) * tan_v
    dirs = (fwd[None, None, :]
            + j[None, :, None] * right[None, None, :]
            + i[:, None, None] * up[None, None, :])
    dirs /= np.linalg.norm(dirs, axis=2, keepdims=True)
    return dirs


def _panorama_directions(pose: Pose, camera: CameraSpec) -> np.ndarray:
    az = pose.yaw + 360.0 * (np.arange(camera.width) + 0.5) / camera.width
    el = pose.pitch + camera.vertical_fov * (
        0.5 - (np.arange(camera.height) + 0.5) / camera.height)
    dirs = np.empty((camera.height, camera.width, 3))
    for row, e in enumerate(el):
        for col, a in enumerate(az):
            dirs[row, col] = direction_from_angles(a, e)
    return dirs


def render_depth(world: WorldMap, pose: Pose,
                 camera: CameraSpec | None = None) -> DepthMap:
    """Per-pixel first-hit Euclidean distances from the eye."""
    camera = camera or CameraSpec()
    if camera.mode == "frustum":
        dirs = _frustum_directions(pose, camera)
    else:
        dirs = _panorama_directions(pose, camera)
    flat = dirs.reshape(-1, 3)
    depths = world.geometry.cast_rays(pose.position, flat, camera.max_range)
    values = np.maximum(depths, 1e-6).reshape(camera.height, camera.width)
    return DepthMap(values, camera, pose)


def lidar_scan(world: WorldMap, pose: Pose, beams: int,
               max_range: float = DEFAULT_MAX_RANGE) -> LidarScan:
    """Equally spaced horizontal beams starting at the pose yaw."""
    if beams < 1:
        raise ValueError("beams must be >= 1")
    az = pose.yaw + 360.0 * np.arange(beams) / beams
    dirs = np.stack([np.cos(np.radians(az)),
                     np.zeros(beams),
                     np.sin(np.radians(az))], axis=1)
    ranges = world.geometry.cast_rays(pose.position, dirs, max_range)
    return LidarScan(np.maximum(ranges, 1e-6), az % 360.0, 0.0, max_range)
