"""Binary map file format.

Little-endian layout:

    magic "WSCV", version u16=1, map_id u32, size_m u16, bounds_m u16,
    heightfield (resolution u16, cell_size f32, heights f32[res*res]),
    building count u16 + building records,
    obstacle count u16 + obstacle records,
    supply count u16 + supply records (location 3*f32, quantity u16, indoor u8),
    spawn-region count u8 + rectangle records.

Every record is u16 length-prefixed; loaders skip unknown trailing bytes
inside a record, so fields can be appended without breaking old readers.
"""

from __future__ import annotations

import io
import struct

import numpy as np

from .world import (
    Building,
    Heightfield,
    MAX_BOUNDS,
    MAX_STOREYS,
    MAX_TERRAIN_ABS,
    Obstacle,
    Opening,
    STOREY_HEIGHT,
    StairRamp,
    SupplyBox,
    VALID_SIZES,
    Wall,
    WorldMap,
    is_walkable,
)

MAGIC = b"WSCV"
VERSION = 1

_OPENING_KINDS = ("door", "window")
_OBSTACLE_KINDS = ("tree", "rock")


class MapFormatError(ValueError):
    """File is not a readable map: bad magic, truncation, bad enum."""


class MapValidationError(ValueError):
    """Decoded map violates a world invariant (message names it)."""


def _record(body: bytes) -> bytes:
    if len(body) > 0xFFFF:
        raise MapFormatError(f"record too large: {len(body)} bytes")
    return struct.pack("<H", len(body)) + body


class _Reader:
    def __init__(self, data: bytes):
        self._buf = data
        self._pos = 0

    def take(self, n: int) -> bytes:
        if self._pos + n > len(self._buf):
            raise MapFormatError("truncated file")
        out = self._buf[self._pos:self._pos + n]
        self._pos += n
        return out

    def unpack(self, fmt: str):
        return struct.unpack(fmt, self.take(struct.calcsize(fmt)))

    def record(self) -> "_Reader":
        (n,) = self.unpack("<H")
        return _Reader(self.take(n))


def _encode_wall(w: Wall) -> bytes:
    body = struct.pack("<6fB", w.x0, w.x1, w.y0, w.y1, w.z0, w.z1,
                       len(w.openings))
    for o in w.openings:
        body += struct.pack("<B4f", _OPENING_KINDS.index(o.kind),
                            o.c0, o.c1, o.y0, o.y1)
    return _record(body)


def _decode_wall(r: _Reader) -> Wall:
    rec = r.record()
    x0, x1, y0, y1, z0, z1, n_open = rec.unpack("<6fB")
    openings = []
    for _ in range(n_open):
        kind, c0, c1, oy0, oy1 = rec.unpack("<B4f")
        if kind >= len(_OPENING_KINDS):
            raise MapFormatError(f"unknown opening kind {kind}")
        openings.append(Opening(_OPENING_KINDS[kind], c0, c1, oy0, oy1))
    return Wall(x0, x1, y0, y1, z0, z1, tuple(openings))


def _encode_ramp(s: StairRamp) -> bytes:
    return _record(struct.pack("<6fB", s.x0, s.z0, s.x1, s.z1,
                               s.y_start, s.y_end, s.axis))


def _decode_ramp(r: _Reader) -> StairRamp:
    rec = r.record()
    x0, z0, x1, z1, y_start, y_end, axis = rec.unpack("<6fB")
    if axis not in (0, 1):
        raise MapFormatError(f"unknown ramp axis {axis}")
    return StairRamp(x0, x1, z0, z1, y_start, y_end, axis)


def _encode_building(b: Building) -> bytes:
    fx0, fz0, fx1, fz1 = b.footprint
    body = struct.pack("<4fB", fx0, fz0, fx1, fz1, b.storeys)
    body += struct.pack("<H", len(b.walls))
    for w in b.walls:
        body += _encode_wall(w)
    body += struct.pack("<B", len(b.stairs))
    for s in b.stairs:
        body += _encode_ramp(s)
    return _record(body)


def _decode_building(r: _Reader) -> Building:
    rec = r.record()
    fx0, fz0, fx1, fz1, storeys = rec.unpack("<4fB")
    (n_walls,) = rec.unpack("<H")
    walls = tuple(_decode_wall(rec) for _ in range(n_walls))
    (n_stairs,) = rec.unpack("<B")
    stairs = tuple(_decode_ramp(rec) for _ in range(n_stairs))
    if not walls:
        raise MapFormatError("building without walls")
    base_y = min(w.y0 for w in walls)
    return Building((fx0, fz0, fx1, fz1), base_y, storeys, walls, stairs)


def save_bytes(world: WorldMap) -> bytes:
    out = io.BytesIO()
    out.write(MAGIC)
    out.write(struct.pack("<HIHH", VERSION, world.map_id, world.size,
                          world.bounds))
    hf = world.terrain
    out.write(struct.pack("<Hf", hf.resolution, hf.cell_size))
    out.write(np.ascontiguousarray(hf.heights, dtype="<f4").tobytes())
    out.write(struct.pack("<H", len(world.buildings)))
    for b in world.buildings:
        out.write(_encode_building(b))
    out.write(struct.pack("<H", len(world.obstacles)))
    for ob in world.obstacles:
        out.write(_record(struct.pack("<B4f", _OBSTACLE_KINDS.index(ob.kind),
                                      ob.center[0], ob.center[1],
                                      ob.radius, ob.height)))
    out.write(struct.pack("<H", len(world.supply_boxes)))
    for box in world.supply_boxes:
        out.write(_record(struct.pack("<3fHB", box.location[0],
                                      box.location[1], box.location[2],
                                      box.quantity, 1 if box.indoor else 0)))
    out.write(struct.pack("<B", len(world.spawn_regions)))
    for (x0, z0, x1, z1) in world.spawn_regions:
        out.write(_record(struct.pack("<4f", x0, z0, x1, z1)))
    return out.getvalue()


def load_bytes(data: bytes, validate: bool = True) -> WorldMap:
    r = _Reader(data)
    if r.take(4) != MAGIC:
        raise MapFormatError("bad magic header")
    version, map_id, size, bounds = r.unpack("<HIHH")
    if version != VERSION:
        raise MapFormatError(f"unsupported version {version}")
    res, cell = r.unpack("<Hf")
    if res < 2 or res > 4096:
        raise MapFormatError(f"implausible heightfield resolution {res}")
    heights = np.frombuffer(r.take(4 * res * res), dtype="<f4")
    heights = heights.reshape(res, res).copy()
    terrain = Heightfield(res, cell, heights)

    (n_buildings,) = r.unpack("<H")
    buildings = tuple(_decode_building(r) for _ in range(n_buildings))
    (n_obstacles,) = r.unpack("<H")
    obstacles = []
    for _ in range(n_obstacles):
        rec = r.record()
        kind, cx, cz, radius, height = rec.unpack("<B4f")
        if kind >= len(_OBSTACLE_KINDS):
            raise MapFormatError(f"unknown obstacle kind {kind}")
        obstacles.append(Obstacle(_OBSTACLE_KINDS[kind], (cx, cz),
                                  radius, height))
    (n_supplies,) = r.unpack("<H")
    boxes = []
    for i in range(n_supplies):
        rec = r.record()
        x, y, z, qty, indoor = rec.unpack("<3fHB")
        boxes.append(SupplyBox(i, (x, y, z), qty, bool(indoor)))
    (n_spawns,) = r.unpack("<B")
    spawns = []
    for _ in range(n_spawns):
        rec = r.record()
        spawns.append(tuple(rec.unpack("<4f")))

    world = WorldMap(map_id, size, bounds, terrain, buildings,
                     tuple(obstacles), boxes, tuple(spawns))
    if validate:
        validate_world(world)
    return world


def save_map(world: WorldMap, path) -> None:
    with open(path, "wb") as f:
        f.write(save_bytes(world))


def load_map(path, validate: bool = True) -> WorldMap:
    with open(path, "rb") as f:
        data = f.read()
    return load_bytes(data, validate=validate)


def _rects_overlap(a, b) -> bool:
    ax0, az0, ax1, az1 = a
    bx0, bz0, bx1, bz1 = b
    return ax0 < bx1 and bx0 < ax1 and az0 < bz1 and bz0 < az1


def validate_world(world: WorldMap) -> None:
    """Raise MapValidationError naming the first violated invariant."""
    if world.size not in VALID_SIZES:
        raise MapValidationError(f"size {world.size} not in {VALID_SIZES}")
    if world.bounds > MAX_BOUNDS:
        raise MapValidationError(f"bounds {world.bounds} > {MAX_BOUNDS}")
    h = world.terrain.heights
    if not np.all(np.isfinite(h)):
        raise MapValidationError("heights not finite")
    if float(np.abs(h).max()) > MAX_TERRAIN_ABS:
        raise MapValidationError(f"|height| > {MAX_TERRAIN_ABS}")
    if abs(world.terrain.resolution * world.terrain.cell_size
           - 2.0 * world.bounds) > 1e-3:
        raise MapValidationError("heightfield does not cover map bounds")

    half = float(world.bounds)
    for i, b in enumerate(world.buildings):
        if b.storeys > MAX_STOREYS:
            raise MapValidationError("storeys > 4")
        if b.storeys < 1:
            raise MapValidationError("storeys < 1")
        fx0, fz0, fx1, fz1 = b.footprint
        if fx0 < -half or fz0 < -half or fx1 > half or fz1 > half:
            raise MapValidationError("building footprint outside bounds")
        for other in world.buildings[i + 1:]:
            if _rects_overlap(b.footprint, other.footprint):
                raise MapValidationError("building footprints overlap")
        doors = [o for w in b.walls for o in w.openings
                 if o.kind == "door" and o.y0 <= b.base_y + 0.5]
        if not doors:
            raise MapValidationError("building has no ground-level door")
        # structural stair connectivity: every storey needs a ramp landing
        for level in range(1, b.storeys):
            target = b.base_y + level * STOREY_HEIGHT
            if not any(abs(max(s.y_start, s.y_end) - target) < 0.5
                       for s in b.stairs):
                raise MapValidationError(
                    f"storey {level} unreachable: no stair ramp tops at it")

    for ob in world.obstacles:
        if not (0.3 <= ob.radius <= 2.0):
            raise MapValidationError(f"obstacle radius {ob.radius} "
                                     "outside [0.3, 2.0]")

    for box in world.supply_boxes:
        if box.quantity < 1:
            raise MapValidationError("supply quantity < 1")
        if not is_walkable(world, box.location):
            raise MapValidationError(
                f"supply box {box.id} location not walkable")

    for (x0, z0, x1, z1) in world.spawn_regions:
        cx, cz = 0.5 * (x0 + x1), 0.5 * (z0 + z1)
        ground, _ = world.geometry.support_height(cx, cz, 1e9)
        if not is_walkable(world, (cx, ground, cz)):
            raise MapValidationError("spawn region center not walkable")
