"""SHOOT/RELOAD resolution, damage, death drops, and respawn.

Shots are deterministic hitscan rays from the shooter's eye along the
camera direction; the first thing hit among static geometry and alive
agent bodies wins. No spread or recoil: determinism is a repo-wide
contract.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import geometry
from .dynamics import MOTION_ON_GROUND, AgentState, SimParams
from .geometry import _ray_vertical_cylinder
from .perception import direction_from_angles
from .world import SupplyBox, WorldMap, is_walkable

DROP_FRACTION = 0.5
RESPAWN_DELAY_TICKS = 10


@dataclass(frozen=True)
class WeaponSpec:
    clip_size: int = 20
    starting_spare: int = 60
    damage: int = 25
    fire_cooldown: int = 1     # ticks between shots
    reload_duration: int = 3   # ticks before the transfer completes
    hit_range: float = 100.0


@dataclass(frozen=True)
class HitEvent:
    shooter_id: int
    target_id: int
    damage: int
    lethal: bool
    tick: int


@dataclass(frozen=True)
class DropEvent:
    dead_agent_id: int
    dropped_quantity: int
    drop_location: tuple[float, float, float]


def eye_point(state: AgentState) -> np.ndarray:
    p = state.position.copy()
    p[1] += geometry.EYE_HEIGHT
    return p


def can_shoot(state: AgentState, spec: WeaponSpec, tick: int) -> str | None:
    """None if a shot may fire now, else the reason it cannot."""
    if not state.alive:
        return "dead"
    if state.reload_until >= 0 and tick < state.reload_until:
        return "reloading"
    if tick - state.last_shot_tick < spec.fire_cooldown:
        return "cooldown"
    if state.clip_ammo <= 0:
        return "empty_clip"
    return None


def resolve_shot(world: WorldMap, agents: list[AgentState], shooter_id: int,
                 spec: WeaponSpec, tick: int) -> HitEvent | None:
    """Fire one hitscan round; applies damage but not the death pipeline.

    A body counts as hittable only while its center is in line of sight —
    the same rule that governs enemy visibility, so what can be seen and
    what can be shot stay one concept.
    """
    shooter = agents[shooter_id]
    shooter.clip_ammo -= 1
    shooter.shots_fired += 1
    shooter.last_shot_tick = tick
    eye = eye_point(shooter)
    d = direction_from_angles(shooter.yaw, shooter.pitch)
    best = world.geometry.cast_ray(tuple(eye), tuple(d), spec.hit_range)
    target = None
    for other in agents:
        if other.agent_id == shooter_id or not other.alive:
            continue
        ox, oy, oz = other.position
        t = _ray_vertical_cylinder(
            eye[0], eye[1], eye[2], d[0], d[1], d[2],
            ox, oz, geometry.AGENT_RADIUS, oy, oy + geometry.AGENT_HEIGHT,
            spec.hit_range)
        if t < best:
            center = (ox, oy + geometry.AGENT_HEIGHT / 2.0, oz)
            if world.geometry.segment_blocked(tuple(eye), center):
                continue
            best = t
            target = other
    if target is None:
        return None
    target.health = max(0, target.health - spec.damage)
    return HitEvent(shooter_id, target.agent_id, spec.damage,
                    target.health <= 0, tick)


def reload_transfer(state: AgentState, spec: WeaponSpec) -> None:
    """Move rounds from spare into the clip (instantaneous arithmetic)."""
    take = min(spec.clip_size - state.clip_ammo, state.spare_ammo)
    state.clip_ammo += take
    state.spare_ammo -= take


def request_reload(state: AgentState, spec: WeaponSpec,
                   tick: int) -> str | None:
    """Begin a timed reload; returns a reason string when nothing happens."""
    if not state.alive:
        return "dead"
    if state.reload_until >= 0 and tick < state.reload_until:
        return "reloading"
    if state.clip_ammo >= spec.clip_size:
        return "clip_full"
    if state.spare_ammo <= 0:
        return "no_ammo"
    state.reload_until = tick + spec.reload_duration
    return None


def finish_reloads(agents: list[AgentState], spec: WeaponSpec,
                   tick: int) -> None:
    for state in agents:
        if state.reload_until >= 0 and tick >= state.reload_until:
            reload_transfer(state, spec)
            state.reload_until = -1


def on_death(state: AgentState, next_box_id: int,
             drop_fraction: float = DROP_FRACTION
             ) -> tuple[DropEvent | None, SupplyBox | None]:
    """Drop half the supplies (floored) at the death point and go down.

    The agent keeps the remainder, so total supplies are conserved exactly
    across deaths.
    """
    dropped = math.floor(state.supplies * drop_fraction)
    state.supplies -= dropped
    state.alive = False
    state.health = 0
    state.deaths += 1
    state.respawn_timer = RESPAWN_DELAY_TICKS
    state.vertical_velocity = 0.0
    if dropped < 1:
        return None, None
    loc = (float(state.position[0]), float(state.position[1]),
           float(state.position[2]))
    box = SupplyBox(next_box_id, loc, dropped, False)
    return DropEvent(state.agent_id, dropped, loc), box


def respawn(world: WorldMap, state: AgentState, spec: WeaponSpec,
            rng: np.random.Generator) -> None:
    """Revive at a random spawn-region point with a fresh loadout."""
    for _ in range(256):
        region = world.spawn_regions[int(rng.integers(len(world.spawn_regions)))]
        x0, z0, x1, z1 = region
        x = rng.uniform(x0 + 0.6, x1 - 0.6)
        z = rng.uniform(z0 + 0.6, z1 - 0.6)
        s, _ = world.geometry.support_height(x, z, 1e9)
        if is_walkable(world, (x, s, z)):
            break
    state.position = np.array([x, s, z])
    state.alive = True
    state.health = 100
    state.clip_ammo = spec.clip_size
    state.spare_ammo = spec.starting_spare
    state.shots_fired = 0
    state.reload_until = -1
    state.last_shot_tick = -10**9
    state.vertical_velocity = 0.0
    state.motion_state = MOTION_ON_GROUND
    state.respawn_timer = 0
