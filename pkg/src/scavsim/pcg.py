"""Seed-driven procedural map generation.

All randomness flows from named, independent PCG64 streams spawned off the
config seed, so a config generates byte-identical maps on every platform.
The map header format has no field for the generator algorithm, so the
identifier is exposed here as ``RNG_ALGORITHM`` instead.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, replace

import numpy as np
from scipy import ndimage

from .world import (
    Building,
    DOOR_HEIGHT,
    DOOR_WIDTH,
    Heightfield,
    Obstacle,
    Opening,
    STOREY_HEIGHT,
    StairRamp,
    SupplyBox,
    WALL_THICKNESS,
    Wall,
    WorldMap,
    _q,
    door_world_info,
    inside_building,
    is_walkable,
)

logger = logging.getLogger(__name__)

RNG_ALGORITHM = "pcg64"

TERRAIN_CELL = 2.0
MAX_PLACEMENT_ATTEMPTS = 10_000
_LATTICE = 0.5

STAIR_WIDTH = 1.6
STAIR_RUN = 4.0

DENSITY_GAP = {"low": 8.0, "high": 2.0}
OBSTACLE_COUNTS = {"none": 0.0, "low": 3e-4, "high": 1.2e-3}  # per m^2

_SPAWN_REGION_SIZE = 6.0
_SPAWN_REGION_COUNT = 4


class GenerationError(RuntimeError):
    """Rejection sampling exhausted its attempt budget."""


class ConfigurationError(ValueError):
    """Config asks for something the map cannot satisfy."""


@dataclass(frozen=True)
class SupplyProfile:
    outdoor_box_count: int
    indoor_box_count: int
    outdoor_quantity_range: tuple[int, int]
    indoor_quantity_range: tuple[int, int]
    radial_sigma_fraction: float = 0.5

    def __post_init__(self):
        if self.indoor_quantity_range[0] <= self.outdoor_quantity_range[1]:
            raise ConfigurationError(
                "indoor quantity range must sit strictly above outdoor range")


@dataclass(frozen=True)
class PcgConfig:
    map_id: int
    size: int
    house_count: int
    house_density: str  # "low" | "high"
    storey_range: tuple[int, int]
    supply_profile: SupplyProfile
    obstacle_density: str = "low"  # "none" | "low" | "high"
    seed: int = 0

    def __post_init__(self):
        if self.house_count < 0:
            raise ConfigurationError("house_count < 0")
        lo, hi = self.storey_range
        if not (1 <= lo <= hi <= 4):
            raise ConfigurationError("storey_range must sit inside [1, 4]")
        if self.house_density not in DENSITY_GAP:
            raise ConfigurationError(f"unknown density {self.house_density}")
        if self.obstacle_density not in OBSTACLE_COUNTS:
            raise ConfigurationError(
                f"unknown obstacle density {self.obstacle_density}")


def default_supply_profile(size: int, house_count: int) -> SupplyProfile:
    outdoor = {100: 25, 200: 70, 500: 180}[size]
    return SupplyProfile(
        outdoor_box_count=outdoor,
        indoor_box_count=3 * house_count,
        outdoor_quantity_range=(1, 3),
        indoor_quantity_range=(5, 10),
        radial_sigma_fraction=0.5,
    )


def benchmark_configs() -> list[PcgConfig]:
    """The six reference map configurations (id, size, houses, density, storeys)."""
    rows = [
        (8, 500, 12, "low", (2, 3)),
        (14, 500, 15, "high", (2, 3)),
        (101, 200, 4, "low", (1, 1)),
        (102, 200, 8, "high", (2, 3)),
        (103, 100, 2, "low", (1, 1)),
        (104, 100, 4, "high", (2, 3)),
    ]
    return [
        PcgConfig(map_id=mid, size=size, house_count=houses,
                  house_density=density, storey_range=storeys,
                  supply_profile=default_supply_profile(size, houses),
                  obstacle_density="low", seed=mid)
        for mid, size, houses, density, storeys in rows
    ]


def config_to_json(cfg: PcgConfig) -> dict:
    return {
        "map_id": cfg.map_id,
        "size": cfg.size,
        "house_count": cfg.house_count,
        "house_density": cfg.house_density,
        "storey_range": list(cfg.storey_range),
        "obstacle_density": cfg.obstacle_density,
        "seed": cfg.seed,
        "supply_profile": {
            "outdoor_box_count": cfg.supply_profile.outdoor_box_count,
            "indoor_box_count": cfg.supply_profile.indoor_box_count,
            "outdoor_quantity_range": list(
                cfg.supply_profile.outdoor_quantity_range),
            "indoor_quantity_range": list(
                cfg.supply_profile.indoor_quantity_range),
            "radial_sigma_fraction": cfg.supply_profile.radial_sigma_fraction,
        },
    }


def config_from_json(data: dict) -> PcgConfig:
    prof_data = data.get("supply_profile")
    if prof_data is None:
        profile = default_supply_profile(int(data["size"]),
                                         int(data["house_count"]))
    else:
        profile = SupplyProfile(
            outdoor_box_count=int(prof_data["outdoor_box_count"]),
            indoor_box_count=int(prof_data["indoor_box_count"]),
            outdoor_quantity_range=tuple(prof_data["outdoor_quantity_range"]),
            indoor_quantity_range=tuple(prof_data["indoor_quantity_range"]),
            radial_sigma_fraction=float(
                prof_data.get("radial_sigma_fraction", 0.5)),
        )
    return PcgConfig(
        map_id=int(data["map_id"]),
        size=int(data["size"]),
        house_count=int(data["house_count"]),
        house_density=data["house_density"],
        storey_range=tuple(data["storey_range"]),
        supply_profile=profile,
        obstacle_density=data.get("obstacle_density", "low"),
        seed=int(data.get("seed", 0)),
    )


# ---------------------------------------------------------------------------
# helpers
# ---------------------------------------------------------------------------

def _stream(seed: int, key: int, extra: int = 0) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(
        np.random.SeedSequence(entropy=seed, spawn_key=(key, extra))))


def _snap(x: float) -> float:
    return round(x / _LATTICE) * _LATTICE


def _rect_gap(a, b) -> float:
    ax0, az0, ax1, az1 = a
    bx0, bz0, bx1, bz1 = b
    dx = max(bx0 - ax1, ax0 - bx1, 0.0)
    dz = max(bz0 - az1, az0 - bz1, 0.0)
    return float(np.hypot(dx, dz))


def _point_rect_gap(x, z, rect) -> float:
    x0, z0, x1, z1 = rect
    dx = max(x0 - x, x - x1, 0.0)
    dz = max(z0 - z, z - z1, 0.0)
    return float(np.hypot(dx, dz))


def _synth_terrain(size: int, rng: np.random.Generator) -> np.ndarray:
    res = int(size // TERRAIN_CELL)
    half = size / 2.0
    centers = -half + (np.arange(res) + 0.5) * TERRAIN_CELL
    gx, gz = np.meshgrid(centers, centers, indexing="ij")
    n_hills = max(5, size // 25)
    # positive base keeps lakes occasional dips rather than oceans
    h = np.full((res, res), 1.5)
    for _ in range(n_hills):
        cx = rng.uniform(-half, half)
        cz = rng.uniform(-half, half)
        sigma = rng.uniform(10.0, size / 3.0)
        amp = rng.uniform(-2.5, 3.0)
        d2 = (gx - cx) ** 2 + (gz - cz) ** 2
        h += amp * np.exp(-d2 / (2.0 * sigma * sigma))
    return 16.0 * np.tanh(h / 16.0)


def _terrain_window(heights, half, rect):
    """Index slice of heightfield cells whose centers fall inside rect."""
    x0, z0, x1, z1 = rect
    res = heights.shape[0]
    i0 = max(0, int(np.floor((x0 + half) / TERRAIN_CELL - 0.5)) + 1)
    i1 = min(res, int(np.ceil((x1 + half) / TERRAIN_CELL - 0.5)) + 1)
    j0 = max(0, int(np.floor((z0 + half) / TERRAIN_CELL - 0.5)) + 1)
    j1 = min(res, int(np.ceil((z1 + half) / TERRAIN_CELL - 0.5)) + 1)
    return i0, i1, j0, j1


def _flatten_pad(heights, half, footprint, pad_h):
    """Level terrain under the footprint (+1 m) and blend over 4 m."""
    x0, z0, x1, z1 = footprint
    res = heights.shape[0]
    i0, i1, j0, j1 = _terrain_window(
        heights, half, (x0 - 5.5, z0 - 5.5, x1 + 5.5, z1 + 5.5))
    for i in range(i0, i1):
        cx = -half + (i + 0.5) * TERRAIN_CELL
        for j in range(j0, j1):
            cz = -half + (j + 0.5) * TERRAIN_CELL
            d = _point_rect_gap(cx, cz, (x0 - 1.0, z0 - 1.0,
                                         x1 + 1.0, z1 + 1.0))
            if d <= 0.0:
                heights[i, j] = pad_h
            elif d < 4.0:
                t = 1.0 - d / 4.0
                w = t * t * (3.0 - 2.0 * t)
                heights[i, j] = w * pad_h + (1.0 - w) * heights[i, j]
    return res


def _pad_stats(heights, half, footprint):
    x0, z0, x1, z1 = footprint
    i0, i1, j0, j1 = _terrain_window(
        heights, half, (x0 - 5.0, z0 - 5.0, x1 + 5.0, z1 + 5.0))
    if i0 >= i1 or j0 >= j1:
        return None
    window = heights[i0:i1, j0:j1]
    return float(window.mean()), float(window.min()), float(window.max())


# ---------------------------------------------------------------------------
# house templates (the asset pool)
# ---------------------------------------------------------------------------

def _perimeter_walls(fp, base, top):
    x0, z0, x1, z1 = fp
    t = WALL_THICKNESS
    return {
        "south": Wall(_q(x0), _q(x1), _q(base), _q(top), _q(z0), _q(z0 + t)),
        "north": Wall(_q(x0), _q(x1), _q(base), _q(top), _q(z1 - t), _q(z1)),
        "west": Wall(_q(x0), _q(x0 + t), _q(base), _q(top),
                     _q(z0 + t), _q(z1 - t)),
        "east": Wall(_q(x1 - t), _q(x1), _q(base), _q(top),
                     _q(z0 + t), _q(z1 - t)),
    }


def _with_door(wall: Wall, base: float) -> Wall:
    if wall.along_x:
        c = _snap(0.5 * (wall.x0 + wall.x1))
    else:
        c = _snap(0.5 * (wall.z0 + wall.z1))
    opening = Opening("door", _q(c - DOOR_WIDTH / 2), _q(c + DOOR_WIDTH / 2),
                      _q(base), _q(base + DOOR_HEIGHT))
    return replace(wall, openings=wall.openings + (opening,))


def _stair_flight(fp, base, storeys, side: str) -> tuple[StairRamp, ...]:
    """Switchback ramp stack along one interior side of the footprint.

    Consecutive flights occupy two parallel bands, so a flight never
    hangs over the top of the one below it (headroom stays clear the
    whole way up).
    """
    x0, z0, x1, z1 = fp
    ramps = []
    if side in ("north", "south"):
        if side == "north":
            band_edge = z1 - WALL_THICKNESS
            bands = ((band_edge - STAIR_WIDTH, band_edge),
                     (band_edge - 2 * STAIR_WIDTH, band_edge - STAIR_WIDTH))
        else:
            band_edge = z0 + WALL_THICKNESS
            bands = ((band_edge, band_edge + STAIR_WIDTH),
                     (band_edge + STAIR_WIDTH, band_edge + 2 * STAIR_WIDTH))
        xa = x0 + 1.2
        xb = xa + STAIR_RUN
        for k in range(storeys - 1):
            y_lo = _q(base + k * STOREY_HEIGHT)
            y_hi = _q(base + (k + 1) * STOREY_HEIGHT)
            z_lo, z_hi = bands[k % 2]
            if k % 2 == 0:
                ramps.append(StairRamp(_q(xa), _q(xb), _q(z_lo), _q(z_hi),
                                       y_lo, y_hi, 0))
            else:
                ramps.append(StairRamp(_q(xa), _q(xb), _q(z_lo), _q(z_hi),
                                       y_hi, y_lo, 0))
    else:
        if side == "east":
            band_edge = x1 - WALL_THICKNESS
            bands = ((band_edge - STAIR_WIDTH, band_edge),
                     (band_edge - 2 * STAIR_WIDTH, band_edge - STAIR_WIDTH))
        else:
            band_edge = x0 + WALL_THICKNESS
            bands = ((band_edge, band_edge + STAIR_WIDTH),
                     (band_edge + STAIR_WIDTH, band_edge + 2 * STAIR_WIDTH))
        za = z0 + 1.2
        zb = za + STAIR_RUN
        for k in range(storeys - 1):
            y_lo = _q(base + k * STOREY_HEIGHT)
            y_hi = _q(base + (k + 1) * STOREY_HEIGHT)
            x_lo, x_hi = bands[k % 2]
            if k % 2 == 0:
                ramps.append(StairRamp(_q(x_lo), _q(x_hi), _q(za), _q(zb),
                                       y_lo, y_hi, 1))
            else:
                ramps.append(StairRamp(_q(x_lo), _q(x_hi), _q(za), _q(zb),
                                       y_hi, y_lo, 1))
    return tuple(ramps)


# door wall(s) / stair side per template variant; >= 3 variants per storey
HOUSE_TEMPLATES = (
    {"doors": ("south",), "stairs": "north"},
    {"doors": ("east",), "stairs": "south"},
    {"doors": ("south", "north"), "stairs": "west"},
)


def build_house(fp, base_y: float, storeys: int, variant: int) -> Building:
    spec = HOUSE_TEMPLATES[variant % len(HOUSE_TEMPLATES)]
    base = _q(base_y)
    top = _q(base + storeys * STOREY_HEIGHT)
    walls = _perimeter_walls(fp, base, top)
    for name in spec["doors"]:
        walls[name] = _with_door(walls[name], base)
    stairs = (_stair_flight(fp, base, storeys, spec["stairs"])
              if storeys > 1 else ())
    fp_q = tuple(_q(v) for v in fp)
    return Building(fp_q, base, storeys,
                    tuple(walls[k] for k in ("south", "north", "west", "east")),
                    stairs)


# ---------------------------------------------------------------------------
# outdoor connectivity
# ---------------------------------------------------------------------------

def outdoor_labels(world: WorldMap):
    """(labels, main_label) on the 1 m outdoor walkability grid.

    Cached on the world so episode resets can sample reachable points
    without recomputing. Cells inside building footprints count as indoor
    and get label 0.
    """
    if world._walk_labels is not None:
        return world._walk_labels
    half = float(world.bounds)
    n = world.size
    centers = -half + 0.5 + np.arange(n, dtype=np.float64)
    _, walk = world.geometry.walkable_grid(centers, centers)
    for b in world.buildings:
        x0, z0, x1, z1 = b.footprint
        i0 = max(0, int(np.floor(x0 + half - 0.5)))
        i1 = min(n, int(np.ceil(x1 + half + 0.5)))
        j0 = max(0, int(np.floor(z0 + half - 0.5)))
        j1 = min(n, int(np.ceil(z1 + half + 0.5)))
        walk[i0:i1, j0:j1] = False
    labels, _ = ndimage.label(walk)
    if world.spawn_regions:
        spawn_labels = []
        for (x0, z0, x1, z1) in world.spawn_regions:
            i = int(np.clip(0.5 * (x0 + x1) + half - 0.5, 0, n - 1))
            j = int(np.clip(0.5 * (z0 + z1) + half - 0.5, 0, n - 1))
            spawn_labels.append(labels[i, j])
        main = int(np.bincount([s for s in spawn_labels if s > 0]).argmax()
                   if any(s > 0 for s in spawn_labels) else 0)
    else:
        counts = np.bincount(labels.ravel())
        counts[0] = 0
        main = int(counts.argmax()) if counts.size > 1 else 0
    world._walk_labels = (labels, main)
    return world._walk_labels


def on_main_component(world: WorldMap, x: float, z: float) -> bool:
    labels, main = outdoor_labels(world)
    half = float(world.bounds)
    n = world.size
    i = int(np.clip(x + half - 0.5 + 0.5, 0, n - 1))
    j = int(np.clip(z + half - 0.5 + 0.5, 0, n - 1))
    return main > 0 and labels[i, j] == main


def sample_outdoor_point(world: WorldMap, rng: np.random.Generator,
                         sigma: float | None = None,
                         attempts: int = MAX_PLACEMENT_ATTEMPTS):
    """Walkable outdoor point on the main component: (x, support_y, z)."""
    half = float(world.bounds)
    for _ in range(attempts):
        if sigma is None:
            x = rng.uniform(-half + 2.0, half - 2.0)
            z = rng.uniform(-half + 2.0, half - 2.0)
        else:
            x = rng.normal(0.0, sigma)
            z = rng.normal(0.0, sigma)
            if abs(x) > half - 2.0 or abs(z) > half - 2.0:
                continue
        if inside_building(world, x, z) is not None:
            continue
        if not on_main_component(world, x, z):
            continue
        s, _ = world.geometry.support_height(x, z, 1e9)
        if is_walkable(world, (x, s, z)):
            return float(x), float(s), float(z)
    raise GenerationError("no walkable outdoor point found")


# ---------------------------------------------------------------------------
# generation
# ---------------------------------------------------------------------------

def _place_buildings(cfg: PcgConfig, heights, half, rng):
    buildings = []
    rects = []
    gap = DENSITY_GAP[cfg.house_density]
    lo, hi = cfg.storey_range
    for _house in range(cfg.house_count):
        storeys = int(rng.integers(lo, hi + 1))
        variant = int(rng.integers(0, len(HOUSE_TEMPLATES)))
        w = _snap(rng.uniform(8.0, 13.0))
        d = _snap(rng.uniform(8.0, 13.0))
        placed = False
        for _ in range(MAX_PLACEMENT_ATTEMPTS):
            x0 = _snap(rng.uniform(-half + 6.0, half - 6.0 - w))
            z0 = _snap(rng.uniform(-half + 6.0, half - 6.0 - d))
            rect = (x0, z0, x0 + w, z0 + d)
            if any(_rect_gap(rect, r) < gap for r in rects):
                continue
            stats = _pad_stats(heights, half, rect)
            if stats is None:
                continue
            mean_h, min_h, max_h = stats
            if min_h < -0.2 or mean_h < 0.2:
                continue
            if max_h - mean_h > 1.2 or mean_h - min_h > 1.2:
                continue
            pad_h = _q(mean_h)
            _flatten_pad(heights, half, rect, pad_h)
            buildings.append(build_house(rect, pad_h, storeys, variant))
            rects.append(rect)
            placed = True
            break
        if not placed:
            raise GenerationError(
                f"could not place building {_house} after "
                f"{MAX_PLACEMENT_ATTEMPTS} attempts")
    return buildings, rects


def _place_obstacles(cfg: PcgConfig, heights, half, rects, rng):
    count = int(round(OBSTACLE_COUNTS[cfg.obstacle_density]
                      * cfg.size * cfg.size))
    obstacles = []
    placed_pts = []
    for _k in range(count):
        placed = False
        for _ in range(MAX_PLACEMENT_ATTEMPTS):
            if rng.random() < 0.5:
                kind, radius, height = "tree", rng.uniform(0.3, 0.8), \
                    rng.uniform(2.0, 6.0)
            else:
                kind, radius, height = "rock", rng.uniform(0.5, 2.0), \
                    rng.uniform(0.5, 1.5)
            x = rng.uniform(-half + 3.0, half - 3.0)
            z = rng.uniform(-half + 3.0, half - 3.0)
            res = heights.shape[0]
            i = int(np.clip((x + half) / TERRAIN_CELL - 0.5, 0, res - 1))
            j = int(np.clip((z + half) / TERRAIN_CELL - 0.5, 0, res - 1))
            if heights[i, j] < -0.3:
                continue
            if any(_point_rect_gap(x, z, r) < radius + 1.5 for r in rects):
                continue
            if any(np.hypot(x - px, z - pz) < radius + pr + 1.2
                   for px, pz, pr in placed_pts):
                continue
            obstacles.append(Obstacle(kind, (_q(x), _q(z)),
                                      _q(radius), _q(height)))
            placed_pts.append((x, z, radius))
            placed = True
            break
        if not placed:
            raise GenerationError("could not place obstacle")
    return obstacles


def _place_spawn_regions(heights, half, rects, obstacles, rng):
    regions = []
    s = _SPAWN_REGION_SIZE / 2.0
    for _k in range(_SPAWN_REGION_COUNT):
        placed = False
        for _ in range(MAX_PLACEMENT_ATTEMPTS):
            cx = _snap(rng.uniform(-half + 6.0, half - 6.0))
            cz = _snap(rng.uniform(-half + 6.0, half - 6.0))
            rect = (cx - s, cz - s, cx + s, cz + s)
            if any(_rect_gap(rect, r) < 2.0 for r in rects):
                continue
            if any(_point_rect_gap(ob.center[0], ob.center[1], rect)
                   < ob.radius + 1.0 for ob in obstacles):
                continue
            i0, i1, j0, j1 = _terrain_window(heights, half, rect)
            window = heights[i0:i1, j0:j1]
            if window.size == 0 or window.min() < 0.0:
                continue
            if window.max() - window.min() > 0.4:
                continue
            if regions and min(_rect_gap(rect, r) for r in regions) < half / 4:
                continue
            regions.append(rect)
            placed = True
            break
        if not placed:
            raise GenerationError("could not place spawn region")
    return [tuple(_q(v) for v in r) for r in regions]


def place_supplies(world: WorldMap, profile: SupplyProfile,
                   rng: np.random.Generator) -> WorldMap:
    """Populate supply boxes; outdoor placement is center-biased Gaussian."""
    if profile.indoor_box_count > 0 and not world.buildings:
        raise ConfigurationError("indoor boxes requested on a map "
                                 "without buildings")
    half = float(world.bounds)
    sigma = profile.radial_sigma_fraction * half
    boxes: list[SupplyBox] = []
    qlo, qhi = profile.outdoor_quantity_range
    for _ in range(profile.outdoor_box_count):
        x, y, z = sample_outdoor_point(world, rng, sigma=sigma)
        qty = int(rng.integers(qlo, qhi + 1))
        boxes.append(SupplyBox(len(boxes), (_q(x), _q(y), _q(z)), qty, False))

    if profile.indoor_box_count > 0:
        candidates = []
        for b in world.buildings:
            x0, z0, x1, z1 = b.footprint
            margin = WALL_THICKNESS + 0.8
            xs = np.arange(np.ceil(x0 + margin), np.floor(x1 - margin) + 0.5)
            zs = np.arange(np.ceil(z0 + margin), np.floor(z1 - margin) + 0.5)
            for level in range(b.storeys):
                floor_y = b.base_y + level * STOREY_HEIGHT
                for cx in xs:
                    for cz in zs:
                        s, _ = world.geometry.support_height(
                            cx, cz, floor_y + 0.2)
                        if abs(s - floor_y) > 0.1:
                            continue
                        if is_walkable(world, (cx, s, cz)):
                            candidates.append((float(cx), float(s), float(cz)))
        if len(candidates) < profile.indoor_box_count:
            raise ConfigurationError(
                f"only {len(candidates)} indoor cells for "
                f"{profile.indoor_box_count} indoor boxes")
        picks = rng.choice(len(candidates), size=profile.indoor_box_count,
                           replace=False)
        qlo, qhi = profile.indoor_quantity_range
        for idx in sorted(int(i) for i in picks):
            x, y, z = candidates[idx]
            qty = int(rng.integers(qlo, qhi + 1))
            boxes.append(SupplyBox(len(boxes), (_q(x), _q(y), _q(z)),
                                   qty, True))

    total = sum(b.quantity for b in boxes)
    logger.info("placed %d supply boxes holding %d supplies total",
                len(boxes), total)
    return WorldMap(world.map_id, world.size, world.bounds, world.terrain,
                    world.buildings, world.obstacles, boxes,
                    world.spawn_regions)


def generate_map(cfg: PcgConfig) -> WorldMap:
    """Deterministic in (config, seed); raises GenerationError on failure."""
    half = cfg.size / 2.0
    last_err: Exception | None = None
    for layout_try in range(20):
        heights = _synth_terrain(cfg.size, _stream(cfg.seed, 0, layout_try))
        try:
            buildings, rects = _place_buildings(
                cfg, heights, half, _stream(cfg.seed, 1, layout_try))
            obstacles = _place_obstacles(
                cfg, heights, half, rects, _stream(cfg.seed, 2, layout_try))
            spawns = _place_spawn_regions(
                heights, half, rects, obstacles,
                _stream(cfg.seed, 3, layout_try))
            terrain = Heightfield(heights.shape[0], TERRAIN_CELL,
                                  heights.astype(np.float32))
            world = WorldMap(cfg.map_id, cfg.size, int(half), terrain,
                             tuple(buildings), tuple(obstacles), [],
                             tuple(spawns))
            for b in buildings:
                for (px, pz, nx, nz) in door_world_info(b):
                    fx = px + nx * 1.2
                    fz = pz + nz * 1.2
                    if not on_main_component(world, fx, fz):
                        raise GenerationError(
                            "building door disconnected from spawn component")
            return place_supplies(world, cfg.supply_profile,
                                  _stream(cfg.seed, 4, layout_try))
        except GenerationError as err:
            last_err = err
            continue
    raise GenerationError(f"map generation failed after 20 layouts: "
                          f"{last_err}")
