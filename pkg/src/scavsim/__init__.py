"""Headless deterministic open-world scavenger FPS environment."""

from .dynamics import Action, AgentState, SimParams
from .mapio import load_map, save_map
from .pcg import PcgConfig, SupplyProfile, benchmark_configs, generate_map
from .perception import CameraSpec, Pose, cast_ray, lidar_scan, render_depth
from .tasks import EvalMetrics, Observation, TaskSpec, evaluate, reset, step
from .world import WorldMap, ground_height, is_walkable, segment_blocked

__version__ = "0.1.0"

__all__ = [
    "Action", "AgentState", "SimParams",
    "load_map", "save_map",
    "PcgConfig", "SupplyProfile", "benchmark_configs", "generate_map",
    "CameraSpec", "Pose", "cast_ray", "lidar_scan", "render_depth",
    "EvalMetrics", "Observation", "TaskSpec", "evaluate", "reset", "step",
    "WorldMap", "ground_height", "is_walkable", "segment_blocked",
]
