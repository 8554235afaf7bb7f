"""Per-agent kinematics on a fixed 0.3 s tick.

Each tick is integrated in substeps short enough (<= 0.5 m horizontal) that
endpoint disc tests cannot tunnel through the thinnest solids. Horizontal
motion resolves x then z, sliding along whichever axis is blocked; the
collision body is the core band [feet + step_up, feet + height] of the
agent cylinder, which is what makes automatic step-up work.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import geometry
from .world import SupplyBox, WorldMap

MOTION_ON_GROUND = "on_ground"
MOTION_IN_AIR = "in_air"


class ActionRangeError(ValueError):
    """Action field outside its allowed range (message names the field)."""


@dataclass
class Action:
    walk_dir: float = 0.0      # degrees in [0, 360], world bearing
    walk_speed: int = 0        # integer m/s in [0, 10]
    turn_lr_delta: float = 0.0
    look_ud_delta: float = 0.0
    jump: bool = False
    pickup: bool = False
    shoot: bool = False
    reload: bool = False


def validate_action(action: Action) -> None:
    if not (0.0 <= action.walk_dir <= 360.0):
        raise ActionRangeError(
            f"walk_dir {action.walk_dir} outside [0, 360]")
    if not isinstance(action.walk_speed, (int, np.integer)):
        raise ActionRangeError("walk_speed must be an integer")
    if not (0 <= action.walk_speed <= 10):
        raise ActionRangeError(
            f"walk_speed {action.walk_speed} outside [0, 10]")
    if not (math.isfinite(action.turn_lr_delta)
            and math.isfinite(action.look_ud_delta)):
        raise ActionRangeError("camera deltas must be finite")


@dataclass(frozen=True)
class SimParams:
    dt: float = 0.3                 # seconds per tick
    gravity: float = 9.8
    jump_speed: float = 4.0
    agent_radius: float = geometry.AGENT_RADIUS
    agent_height: float = geometry.AGENT_HEIGHT
    step_up_limit: float = geometry.STEP_UP_LIMIT
    pickup_radius: float = 1.0
    substeps: int = 6


@dataclass
class AgentState:
    agent_id: int
    position: np.ndarray            # feet center, (3,) float64
    yaw: float = 0.0
    pitch: float = 0.0
    vertical_velocity: float = 0.0
    motion_state: str = MOTION_ON_GROUND
    health: int = 100
    clip_ammo: int = 20
    spare_ammo: int = 60
    supplies: int = 0
    alive: bool = True
    respawn_timer: int = 0
    # combat bookkeeping
    shots_fired: int = 0
    last_shot_tick: int = -10**9
    reload_until: int = -1
    kills: int = 0
    deaths: int = 0

    def __post_init__(self):
        self.position = np.asarray(self.position, dtype=np.float64).copy()

    @property
    def on_ground(self) -> bool:
        return self.motion_state == MOTION_ON_GROUND


def bearing_to_world(walk_dir_deg: float, yaw_deg: float) -> tuple[float, float]:
    """Unit horizontal displacement for a WALK_DIR bearing.

    WALK_DIR is an absolute world bearing (0 deg = +x, increasing toward
    +z); yaw is accepted so a camera-relative convention could be swapped
    in here without touching callers.
    """
    rad = math.radians(walk_dir_deg)
    return math.cos(rad), math.sin(rad)


def apply_action(state: AgentState, action: Action,
                 params: SimParams) -> np.ndarray:
    """Turn, pitch, jump, and compute the intended horizontal displacement.

    Collision resolution happens later in integrate_tick. Dead agents are
    a no-op and intend zero displacement.
    """
    if not state.alive:
        return np.zeros(2)
    state.yaw = (state.yaw + action.turn_lr_delta) % 360.0
    state.pitch = min(89.0, max(-89.0, state.pitch + action.look_ud_delta))
    if action.jump and state.on_ground:
        state.vertical_velocity = params.jump_speed
        state.motion_state = MOTION_IN_AIR
    ux, uz = bearing_to_world(action.walk_dir, state.yaw)
    dist = float(action.walk_speed) * params.dt
    return np.array([ux * dist, uz * dist])


def integrate_tick(world: WorldMap, state: AgentState, intended: np.ndarray,
                   params: SimParams) -> None:
    """Advance one tick: slide, step up/down, gravity, land."""
    if not state.alive:
        return
    geom = world.geometry
    r = params.agent_radius
    h = params.agent_height
    su = params.step_up_limit
    n = params.substeps
    dts = params.dt / n
    hx = float(intended[0]) / n
    hz = float(intended[1]) / n
    x, feet, z = state.position

    for _ in range(n):
        for dx_, dz_ in ((hx, 0.0), (0.0, hz)):
            if dx_ == 0.0 and dz_ == 0.0:
                continue
            nx, nz = x + dx_, z + dz_
            new_feet = feet
            if state.on_ground:
                s, kind = geom.support_height(nx, nz, feet + su + 1e-6)
                if kind == geometry.SUPPORT_NONE:
                    continue  # off the map edge
                if kind == geometry.SUPPORT_WATER:
                    continue  # lakes block walking
                if s >= feet - su:
                    new_feet = s
                elif geom.disc_blocked(nx, nz, s + su, s + h, r):
                    continue  # ledge drop into a pocket that cannot fit us
            if geom.disc_blocked(nx, nz, new_feet + su, new_feet + h, r):
                continue
            x, z, feet = nx, nz, new_feet

        if state.on_ground:
            s, kind = geom.support_height(x, z, feet + 1e-6)
            if kind in (geometry.SUPPORT_NONE, geometry.SUPPORT_WATER):
                s = geometry.WATER_LEVEL if kind == geometry.SUPPORT_WATER \
                    else feet
            if s < feet - 1e-9:
                if feet - s <= su:
                    feet = s
                else:
                    state.motion_state = MOTION_IN_AIR
                    state.vertical_velocity = 0.0
        if not state.on_ground:
            state.vertical_velocity -= params.gravity * dts
            vv = state.vertical_velocity
            new_feet = feet + vv * dts
            if vv > 0.0:
                ceil = geom.ceiling_height(x, z, r, feet + h - 0.5)
                if new_feet + h > ceil:
                    new_feet = ceil - h
                    state.vertical_velocity = 0.0
            else:
                # landing may step up by the usual limit: lateral drift in
                # flight can leave the feet slightly inside a rising slope
                s, kind = geom.support_height(x, z, feet + su + 1e-6)
                if kind == geometry.SUPPORT_NONE:
                    th = geom.terrain_height(x, z)
                    s = th if th > feet else -1e9  # embedded: pop up
                elif kind == geometry.SUPPORT_WATER:
                    s = geometry.WATER_LEVEL
                if new_feet <= s:
                    new_feet = s
                    state.vertical_velocity = 0.0
                    state.motion_state = MOTION_ON_GROUND
                    if geom.disc_blocked(x, z, s + su, s + h, r):
                        x, z, new_feet = _nudge_clear(geom, x, z, s,
                                                      su, h, r)
                elif geom.disc_blocked(x, z, new_feet + su, new_feet + h, r):
                    # descending past a solid whose top enters the band:
                    # shove sideways rather than clip through the edge
                    x, z = _nudge_clear_air(geom, x, z, new_feet, su, h, r)
            feet = new_feet

    state.position[0] = x
    state.position[1] = feet
    state.position[2] = z


def _nudge_clear(geom, x, z, feet, su, h, r):
    """Deterministic sideways shove out of a pocket reached by air drift."""
    for dist in (0.15, 0.3, 0.45, 0.6):
        for k in range(8):
            ang = k * math.pi / 4.0
            nx = x + dist * math.cos(ang)
            nz = z + dist * math.sin(ang)
            s, kind = geom.support_height(nx, nz, feet + su + 1e-6)
            if kind in (geometry.SUPPORT_NONE, geometry.SUPPORT_WATER):
                continue
            if abs(s - feet) > su:
                continue
            if not geom.disc_blocked(nx, nz, s + su, s + h, r):
                return nx, nz, s
    return x, z, feet


def _nudge_clear_air(geom, x, z, feet, su, h, r):
    """Mid-fall variant: find clear air nearby, no support requirement."""
    for dist in (0.15, 0.3, 0.45, 0.6):
        for k in range(8):
            ang = k * math.pi / 4.0
            nx = x + dist * math.cos(ang)
            nz = z + dist * math.sin(ang)
            if not geom.disc_blocked(nx, nz, feet + su, feet + h, r):
                return nx, nz
    return x, z


def resolve_pickup(world: WorldMap, boxes: list[SupplyBox],
                   state: AgentState,
                   params: SimParams) -> tuple[list[int], int]:
    """Open every unopened box within pickup radius; returns (ids, qty)."""
    if not state.alive:
        return [], 0
    collected = []
    total = 0
    px, py, pz = state.position
    for box in boxes:
        if box.opened:
            continue
        bx, by, bz = box.location
        d2 = (bx - px) ** 2 + (by - py) ** 2 + (bz - pz) ** 2
        if d2 <= params.pickup_radius ** 2:
            box.opened = True
            collected.append(box.id)
            total += box.quantity
    state.supplies += total
    return collected, total
