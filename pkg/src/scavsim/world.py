"""Static world model: terrain, buildings, supplies, and spatial queries.

A ``WorldMap`` is immutable after construction and safe to share across any
number of concurrent game instances. Coordinates are y-up with x/z
horizontal, units in meters. All float fields are quantized to f32 so the
in-memory map round-trips exactly through the binary file format.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from functools import cached_property

import numpy as np

from . import geometry
from .geometry import (
    AGENT_HEIGHT,
    AGENT_RADIUS,
    STEP_UP_LIMIT,
    SUPPORT_BOX,
    SUPPORT_NONE,
    SUPPORT_TERRAIN,
    SUPPORT_WATER,
    StaticGeometry,
    WATER_LEVEL,
)

STOREY_HEIGHT = 3.0
WALL_THICKNESS = 0.2
SLAB_THICKNESS = 0.15
RAMP_THICKNESS = 0.3
DOOR_WIDTH = 1.0
DOOR_HEIGHT = 2.2
MAX_STOREYS = 4
MAX_TERRAIN_ABS = 20.0
MAX_BOUNDS = 300
VALID_SIZES = (100, 200, 500)

# headroom an agent needs when passing under a slab edge on a stair ramp
_STAIR_HEADROOM = 1.95
_STAIR_HOLE_MARGIN = 0.55


class OutOfBoundsError(ValueError):
    """Spatial query outside the map bounds."""


def _q(x: float) -> float:
    """Quantize to f32 so saved and in-memory values are identical."""
    return float(np.float32(x))


@dataclass(frozen=True)
class Heightfield:
    resolution: int
    cell_size: float
    heights: np.ndarray  # (res, res) float32, sampled at cell centers

    def __post_init__(self):
        h = np.ascontiguousarray(self.heights, dtype=np.float32)
        object.__setattr__(self, "heights", h)

    def __eq__(self, other):
        return (isinstance(other, Heightfield)
                and self.resolution == other.resolution
                and self.cell_size == other.cell_size
                and np.array_equal(self.heights, other.heights))


@dataclass(frozen=True)
class Opening:
    kind: str  # "door" | "window"; windows stay opaque and non-traversable
    c0: float  # range along the wall's long axis
    c1: float
    y0: float
    y1: float


@dataclass(frozen=True)
class Wall:
    x0: float
    x1: float
    y0: float
    y1: float
    z0: float
    z1: float
    openings: tuple[Opening, ...] = ()

    @property
    def along_x(self) -> bool:
        return (self.x1 - self.x0) >= (self.z1 - self.z0)


@dataclass(frozen=True)
class StairRamp:
    x0: float
    x1: float
    z0: float
    z1: float
    y_start: float  # surface height at the low-coordinate edge of `axis`
    y_end: float    # surface height at the high-coordinate edge
    axis: int       # 0: runs along x, 1: runs along z


@dataclass(frozen=True)
class Building:
    footprint: tuple[float, float, float, float]  # x0, z0, x1, z1
    base_y: float
    storeys: int
    walls: tuple[Wall, ...]
    stairs: tuple[StairRamp, ...]


@dataclass
class SupplyBox:
    id: int
    location: tuple[float, float, float]
    quantity: int
    indoor: bool
    opened: bool = False


@dataclass(frozen=True)
class Obstacle:
    kind: str  # "tree" | "rock"
    center: tuple[float, float]
    radius: float
    height: float


@dataclass
class WorldMap:
    map_id: int
    size: int
    bounds: int  # half extent in meters
    terrain: Heightfield
    buildings: tuple[Building, ...]
    obstacles: tuple[Obstacle, ...]
    supply_boxes: list[SupplyBox]
    spawn_regions: tuple[tuple[float, float, float, float], ...]
    _walk_labels: np.ndarray | None = field(default=None, repr=False)

    @cached_property
    def geometry(self) -> StaticGeometry:
        boxes = []
        for b in self.buildings:
            boxes.extend(building_boxes(b))
        box_arr = (np.array(boxes, dtype=np.float64)
                   if boxes else np.empty((0, 8)))
        cyls = []
        for ob in self.obstacles:
            cx, cz = ob.center
            base = float(geometry._terrain_height(
                np.ascontiguousarray(self.terrain.heights, dtype=np.float64),
                self.terrain.cell_size, float(self.bounds), cx, cz))
            cyls.append((cx, cz, ob.radius, base - 0.5, base + ob.height))
        cyl_arr = (np.array(cyls, dtype=np.float64)
                   if cyls else np.empty((0, 5)))
        return StaticGeometry(self.terrain.heights, self.terrain.cell_size,
                              float(self.bounds), box_arr, cyl_arr)


# ---------------------------------------------------------------------------
# building solids
# ---------------------------------------------------------------------------

def _aabb(x0, x1, y0, y1, z0, z1):
    return (x0, x1, z0, z1, 0.0, 0.0, y0, y1)


def wall_boxes(w: Wall) -> list[tuple]:
    """Cut door/window openings out of a wall slab.

    Windows are kept as metadata only: they stay opaque and block movement,
    so only door openings produce actual holes.
    """
    doors = sorted((o for o in w.openings if o.kind == "door"),
                   key=lambda o: o.c0)
    if not doors:
        return [_aabb(w.x0, w.x1, w.y0, w.y1, w.z0, w.z1)]
    out = []
    if w.along_x:
        cur = w.x0
        for o in doors:
            if o.c0 > cur:
                out.append(_aabb(cur, o.c0, w.y0, w.y1, w.z0, w.z1))
            if o.y1 < w.y1:  # lintel
                out.append(_aabb(o.c0, o.c1, o.y1, w.y1, w.z0, w.z1))
            if o.y0 > w.y0:  # sill
                out.append(_aabb(o.c0, o.c1, w.y0, o.y0, w.z0, w.z1))
            cur = o.c1
        if cur < w.x1:
            out.append(_aabb(cur, w.x1, w.y0, w.y1, w.z0, w.z1))
    else:
        cur = w.z0
        for o in doors:
            if o.c0 > cur:
                out.append(_aabb(w.x0, w.x1, w.y0, w.y1, cur, o.c0))
            if o.y1 < w.y1:
                out.append(_aabb(w.x0, w.x1, o.y1, w.y1, o.c0, o.c1))
            if o.y0 > w.y0:
                out.append(_aabb(w.x0, w.x1, w.y0, o.y0, o.c0, o.c1))
            cur = o.c1
        if cur < w.z1:
            out.append(_aabb(w.x0, w.x1, w.y0, w.y1, cur, w.z1))
    return out


def _subtract_rect(rects, hole):
    """Remove hole (x0,z0,x1,z1) from each rect, splitting into pieces."""
    hx0, hz0, hx1, hz1 = hole
    out = []
    for (x0, z0, x1, z1) in rects:
        ix0, ix1 = max(x0, hx0), min(x1, hx1)
        iz0, iz1 = max(z0, hz0), min(z1, hz1)
        if ix0 >= ix1 or iz0 >= iz1:
            out.append((x0, z0, x1, z1))
            continue
        if x0 < ix0:
            out.append((x0, z0, ix0, z1))
        if ix1 < x1:
            out.append((ix1, z0, x1, z1))
        if z0 < iz0:
            out.append((ix0, z0, ix1, iz0))
        if iz1 < z1:
            out.append((ix0, iz1, ix1, z1))
    return out


def stairwell_hole(b: Building, ramp: StairRamp) -> tuple:
    """Opening in the slab at the ramp's top floor, sized for headroom.

    The hole never extends past the ramp's top edge along the run, so the
    slab starts exactly where the agent steps off the ramp.
    """
    top = max(ramp.y_start, ramp.y_end)
    cut_from = top - _STAIR_HEADROOM
    m = _STAIR_HOLE_MARGIN
    if ramp.axis == 0:
        grad = (ramp.y_end - ramp.y_start) / (ramp.x1 - ramp.x0)
        xc = ramp.x0 + (cut_from - ramp.y_start) / grad
        if grad >= 0:
            hole = (xc - m, ramp.z0 - m, ramp.x1, ramp.z1 + m)
        else:
            hole = (ramp.x0, ramp.z0 - m, xc + m, ramp.z1 + m)
    else:
        grad = (ramp.y_end - ramp.y_start) / (ramp.z1 - ramp.z0)
        zc = ramp.z0 + (cut_from - ramp.y_start) / grad
        if grad >= 0:
            hole = (ramp.x0 - m, zc - m, ramp.x1 + m, ramp.z1)
        else:
            hole = (ramp.x0 - m, ramp.z0, ramp.x1 + m, zc + m)
    fx0, fz0, fx1, fz1 = b.footprint
    return (max(hole[0], fx0 + WALL_THICKNESS),
            max(hole[1], fz0 + WALL_THICKNESS),
            min(hole[2], fx1 - WALL_THICKNESS),
            min(hole[3], fz1 - WALL_THICKNESS))


def floor_slab_boxes(b: Building) -> list[tuple]:
    """Horizontal slabs for storeys 1..S (the top one is the roof)."""
    fx0, fz0, fx1, fz1 = b.footprint
    out = []
    for level in range(1, b.storeys + 1):
        slab_y = b.base_y + level * STOREY_HEIGHT
        rects = [(fx0, fz0, fx1, fz1)]
        for ramp in b.stairs:
            if abs(max(ramp.y_start, ramp.y_end) - slab_y) < 0.5:
                rects = _subtract_rect(rects, stairwell_hole(b, ramp))
        for (x0, z0, x1, z1) in rects:
            out.append(_aabb(x0, x1, slab_y - SLAB_THICKNESS, slab_y, z0, z1))
    return out


def ramp_box(ramp: StairRamp) -> tuple:
    if ramp.axis == 0:
        g = (ramp.y_end - ramp.y_start) / (ramp.x1 - ramp.x0)
        w1 = ramp.y_start - g * ramp.x0
        return (ramp.x0, ramp.x1, ramp.z0, ramp.z1, g, 0.0,
                w1 - RAMP_THICKNESS, w1)
    g = (ramp.y_end - ramp.y_start) / (ramp.z1 - ramp.z0)
    w1 = ramp.y_start - g * ramp.z0
    return (ramp.x0, ramp.x1, ramp.z0, ramp.z1, 0.0, g,
            w1 - RAMP_THICKNESS, w1)


def building_boxes(b: Building) -> list[tuple]:
    out = []
    for w in b.walls:
        out.extend(wall_boxes(w))
    out.extend(floor_slab_boxes(b))
    for ramp in b.stairs:
        out.append(ramp_box(ramp))
    return out


def door_world_info(b: Building) -> list[tuple]:
    """Ground-level door centers with outward normals: (px, pz, nx, nz)."""
    fx0, fz0, fx1, fz1 = b.footprint
    cx, cz = 0.5 * (fx0 + fx1), 0.5 * (fz0 + fz1)
    out = []
    for w in b.walls:
        for o in w.openings:
            if o.kind != "door" or o.y0 > b.base_y + 0.5:
                continue
            if w.along_x:
                px = 0.5 * (o.c0 + o.c1)
                pz = 0.5 * (w.z0 + w.z1)
                nz = 1.0 if pz > cz else -1.0
                out.append((px, pz, 0.0, nz))
            else:
                px = 0.5 * (w.x0 + w.x1)
                pz = 0.5 * (o.c0 + o.c1)
                nx = 1.0 if px > cx else -1.0
                out.append((px, pz, nx, 0.0))
    return out


# ---------------------------------------------------------------------------
# spatial queries
# ---------------------------------------------------------------------------

def ground_height(world: WorldMap, x: float, z: float) -> float:
    """Bilinear terrain elevation; exact at cell centers."""
    half = float(world.bounds)
    if not (-half <= x <= half and -half <= z <= half):
        raise OutOfBoundsError(f"({x}, {z}) outside map half-extent {half}")
    return world.geometry.terrain_height(x, z)


def is_walkable(world: WorldMap, p, agent_radius: float = AGENT_RADIUS) -> bool:
    """True iff an agent disc can stand at p (support gap <= 0.1 m)."""
    x, y, z = float(p[0]), float(p[1]), float(p[2])
    half = float(world.bounds)
    if not (-half <= x <= half and -half <= z <= half):
        return False
    geom = world.geometry
    support, kind = geom.support_height(x, z, y + 0.1)
    if kind in (SUPPORT_NONE, SUPPORT_WATER):
        return False
    if y - support > 0.1 or support - y > 0.1:
        return False
    return not geom.disc_blocked(x, z, support + STEP_UP_LIMIT,
                                 support + AGENT_HEIGHT, agent_radius)


def segment_blocked(world: WorldMap, a, b) -> bool:
    """True iff the open segment (a, b) intersects static geometry."""
    return world.geometry.segment_blocked(a, b)


def support_at(world: WorldMap, x: float, z: float, y_max: float):
    """(height, kind) of the highest standable surface not above y_max."""
    return world.geometry.support_height(x, z, y_max)


def inside_building(world: WorldMap, x: float, z: float) -> Building | None:
    for b in world.buildings:
        fx0, fz0, fx1, fz1 = b.footprint
        if fx0 <= x <= fx1 and fz0 <= z <= fz1:
            return b
    return None


def copy_boxes(world: WorldMap) -> list[SupplyBox]:
    """Fresh per-episode mutable copies of the map's supply boxes."""
    return [replace(box) for box in world.supply_boxes]
