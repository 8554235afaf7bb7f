"""Brute-force 1 mm ray-marching oracle, independent of the DDA caster.

Membership test per sample point: below the (clamped bilinear) terrain
surface, under still water, inside any generalized box, or inside any
cylinder. The oracle shares only the *surface definitions* with the
production code; the intersection method (fixed-step marching) is its
own, as is its spatial index (a 16 m bucket grid, nothing like the
production 8 m DDA index).
"""

from __future__ import annotations

import numpy as np
from numba import njit, prange

STEP = 1e-3
WATER_Y = -0.5
BUCKET = 16.0


@njit(cache=True)
def _oracle_terrain(heights, cell, half, x, z):
    res = heights.shape[0]
    u = (x + half) / cell - 0.5
    v = (z + half) / cell - 0.5
    u = min(max(u, 0.0), res - 1.0)
    v = min(max(v, 0.0), res - 1.0)
    i = min(int(u), res - 2)
    j = min(int(v), res - 2)
    fu = u - i
    fv = v - j
    return ((1 - fu) * (1 - fv) * heights[i, j]
            + fu * (1 - fv) * heights[i + 1, j]
            + (1 - fu) * fv * heights[i, j + 1]
            + fu * fv * heights[i + 1, j + 1])


@njit(cache=True)
def _inside(heights, cell, half, boxes, cyls, nb, bstart, bitems,
            cstart, citems, x, y, z):
    if -half <= x <= half and -half <= z <= half:
        th = _oracle_terrain(heights, cell, half, x, z)
        if y <= th:
            return True
        if th < WATER_Y and y <= WATER_Y:
            return True
    bi = int((x + half) / BUCKET)
    bj = int((z + half) / BUCKET)
    if bi < 0:
        bi = 0
    elif bi >= nb:
        bi = nb - 1
    if bj < 0:
        bj = 0
    elif bj >= nb:
        bj = nb - 1
    cell_id = bi * nb + bj
    for k in range(bstart[cell_id], bstart[cell_id + 1]):
        b = bitems[k]
        if boxes[b, 0] <= x <= boxes[b, 1] and boxes[b, 2] <= z <= boxes[b, 3]:
            w = y - boxes[b, 4] * x - boxes[b, 5] * z
            if boxes[b, 6] <= w <= boxes[b, 7]:
                return True
    for k in range(cstart[cell_id], cstart[cell_id + 1]):
        c = citems[k]
        dx = x - cyls[c, 0]
        dz = z - cyls[c, 1]
        if dx * dx + dz * dz <= cyls[c, 2] * cyls[c, 2]:
            if cyls[c, 3] <= y <= cyls[c, 4]:
                return True
    return False


@njit(cache=True, parallel=True)
def _march_batch(heights, cell, half, boxes, cyls, nb, bstart, bitems,
                 cstart, citems, origins, dirs, max_range, out):
    n_steps = int(max_range / STEP)
    for r in prange(origins.shape[0]):
        ox, oy, oz = origins[r, 0], origins[r, 1], origins[r, 2]
        dx, dy, dz = dirs[r, 0], dirs[r, 1], dirs[r, 2]
        hit = max_range
        for k in range(n_steps + 1):
            t = k * STEP
            if _inside(heights, cell, half, boxes, cyls, nb, bstart, bitems,
                       cstart, citems, ox + dx * t, oy + dy * t,
                       oz + dz * t):
                hit = t
                break
        out[r] = hit


def _bucket_index(half, rects):
    nb = max(1, int(np.ceil(2 * half / BUCKET)))
    cells = [[] for _ in range(nb * nb)]
    for idx, (x0, x1, z0, z1) in enumerate(rects):
        i0 = int(np.clip((x0 + half) / BUCKET, 0, nb - 1))
        i1 = int(np.clip((x1 + half) / BUCKET, 0, nb - 1))
        j0 = int(np.clip((z0 + half) / BUCKET, 0, nb - 1))
        j1 = int(np.clip((z1 + half) / BUCKET, 0, nb - 1))
        for i in range(i0, i1 + 1):
            for j in range(j0, j1 + 1):
                cells[i * nb + j].append(idx)
    start = np.zeros(nb * nb + 1, dtype=np.int64)
    for i, ids in enumerate(cells):
        start[i + 1] = start[i] + len(ids)
    items = np.zeros(max(1, start[-1]), dtype=np.int64)
    for i, ids in enumerate(cells):
        items[start[i]:start[i + 1]] = ids
    return nb, start, items


def march_rays(world, origins: np.ndarray, dirs: np.ndarray,
               max_range: float) -> np.ndarray:
    """Oracle distances for a batch of rays against a WorldMap."""
    geom = world.geometry
    half = geom.half
    boxes = geom.boxes
    cyls = geom.cylinders
    nb, bstart, bitems = _bucket_index(
        half, [(b[0], b[1], b[2], b[3]) for b in boxes])
    nb2, cstart, citems = _bucket_index(
        half, [(c[0] - c[2], c[0] + c[2], c[1] - c[2], c[1] + c[2])
               for c in cyls])
    assert nb == nb2
    out = np.empty(len(origins))
    _march_batch(geom.heights, geom.cell_size, half, boxes, cyls, nb,
                 bstart, bitems, cstart, citems,
                 np.ascontiguousarray(origins, dtype=np.float64),
                 np.ascontiguousarray(dirs, dtype=np.float64),
                 max_range, out)
    return out


def march_ray(world, origin, direction, max_range: float) -> float:
    return float(march_rays(world, np.array([origin], dtype=float),
                            np.array([direction], dtype=float),
                            max_range)[0])
