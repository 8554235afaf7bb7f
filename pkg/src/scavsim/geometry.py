"""Flattened static-scene geometry and the numba kernels that query it.

World solids are reduced to three primitive families so every query
(ray cast, support height, disc clearance) is analytic and exact:

* terrain: a heightfield sampled at cell centers, bilinearly interpolated,
  with still water filling every region below ``WATER_LEVEL``;
* generalized boxes: ``x in [x0,x1], z in [z0,z1], (y - gx*x - gz*z) in
  [w0,w1]``. Axis-aligned slabs have ``gx = gz = 0``; stair ramps use a
  nonzero gradient;
* vertical cylinders (trees, rocks).

A ``StaticGeometry`` is immutable and safe to share across concurrent game
instances; all kernels are pure reads.
"""

from __future__ import annotations

import os

# the workqueue layer is fork-safe (the benchmark forks worker processes);
# OpenMP, numba's fallback when TBB is absent, aborts forked children
os.environ.setdefault("NUMBA_THREADING_LAYER", "workqueue")

import numpy as np
from numba import njit, prange

WATER_LEVEL = -0.5

# canonical agent body (dynamics.SimParams mirrors these defaults)
AGENT_RADIUS = 0.5
AGENT_HEIGHT = 1.8
STEP_UP_LIMIT = 0.4
EYE_HEIGHT = 1.6

# support-surface kinds
SUPPORT_NONE = 0
SUPPORT_TERRAIN = 1
SUPPORT_WATER = 2
SUPPORT_BOX = 3
SUPPORT_CYLINDER = 4

# box array columns
BX0, BX1, BZ0, BZ1, BGX, BGZ, BW0, BW1 = range(8)
# cylinder array columns
CX, CZ, CR, CY0, CY1 = range(5)

_COARSE_CELL = 8.0
_MISS = 1.0e30


# ---------------------------------------------------------------------------
# kernels
# ---------------------------------------------------------------------------

@njit(cache=True)
def _terrain_height(heights, cell, half, x, z):
    """Clamped bilinear interpolation between cell-center samples."""
    res = heights.shape[0]
    u = (x + half) / cell - 0.5
    v = (z + half) / cell - 0.5
    if u < 0.0:
        u = 0.0
    elif u > res - 1.0:
        u = res - 1.0
    if v < 0.0:
        v = 0.0
    elif v > res - 1.0:
        v = res - 1.0
    i0 = int(np.floor(u))
    j0 = int(np.floor(v))
    if i0 > res - 2:
        i0 = res - 2
    if j0 > res - 2:
        j0 = res - 2
    tx = u - i0
    tz = v - j0
    h00 = heights[i0, j0]
    h10 = heights[i0 + 1, j0]
    h01 = heights[i0, j0 + 1]
    h11 = heights[i0 + 1, j0 + 1]
    return (
        (1.0 - tx) * (1.0 - tz) * h00
        + tx * (1.0 - tz) * h10
        + (1.0 - tx) * tz * h01
        + tx * tz * h11
    )


@njit(cache=True)
def _ray_terrain(heights, cell, half, max_h, ox, oy, oz, dx, dy, dz, t_limit):
    """First intersection with the bilinear terrain surface, or miss.

    2D DDA over the interpolation lattice; inside each traversed patch the
    surface along the ray is an exact quadratic in t.
    """
    res = heights.shape[0]
    if oy > max_h and dy >= 0.0:
        return _MISS

    u0 = (ox + half) / cell - 0.5
    v0 = (oz + half) / cell - 0.5
    du = dx / cell
    dv = dz / cell
    lo = -0.5
    hi = res - 0.5

    # clip ray to the lattice domain
    t_in = 0.0
    t_out = t_limit
    if abs(du) < 1e-15:
        if u0 < lo or u0 > hi:
            return _MISS
    else:
        ta = (lo - u0) / du
        tb = (hi - u0) / du
        if ta > tb:
            ta, tb = tb, ta
        if ta > t_in:
            t_in = ta
        if tb < t_out:
            t_out = tb
    if abs(dv) < 1e-15:
        if v0 < lo or v0 > hi:
            return _MISS
    else:
        ta = (lo - v0) / dv
        tb = (hi - v0) / dv
        if ta > tb:
            ta, tb = tb, ta
        if ta > t_in:
            t_in = ta
        if tb < t_out:
            t_out = tb
    if t_in > t_out:
        return _MISS

    t = t_in
    max_iters = 4 * res + 8
    for _ in range(max_iters):
        if t >= t_out - 1e-12:
            break
        if dy >= 0.0 and oy + dy * t > max_h:
            break
        # next lattice crossing along u and v
        ut = u0 + du * t
        vt = v0 + dv * t
        if du > 1e-15:
            t_nu = (np.floor(ut + 1e-12) + 1.0 - u0) / du
        elif du < -1e-15:
            t_nu = (np.ceil(ut - 1e-12) - 1.0 - u0) / du
        else:
            t_nu = _MISS
        if dv > 1e-15:
            t_nv = (np.floor(vt + 1e-12) + 1.0 - v0) / dv
        elif dv < -1e-15:
            t_nv = (np.ceil(vt - 1e-12) - 1.0 - v0) / dv
        else:
            t_nv = _MISS
        t_next = t_nu if t_nu < t_nv else t_nv
        if t_next > t_out:
            t_next = t_out

        tm = 0.5 * (t + t_next)
        um = u0 + du * tm
        vm = v0 + dv * tm
        iu = int(np.floor(um))
        iv = int(np.floor(vm))
        # local patch coordinates as linear functions of t (constant in the
        # clamped border strips)
        if iu < 0:
            i0, ax, bx = 0, 0.0, 0.0
        elif iu > res - 2:
            i0, ax, bx = res - 2, 1.0, 0.0
        else:
            i0, ax, bx = iu, u0 - iu, du
        if iv < 0:
            j0, az, bz = 0, 0.0, 0.0
        elif iv > res - 2:
            j0, az, bz = res - 2, 1.0, 0.0
        else:
            j0, az, bz = iv, v0 - iv, dv

        h00 = heights[i0, j0]
        e10 = heights[i0 + 1, j0] - h00
        e01 = heights[i0, j0 + 1] - h00
        dd = heights[i0 + 1, j0 + 1] - heights[i0 + 1, j0] - heights[i0, j0 + 1] + h00
        c0 = h00 + ax * e10 + az * e01 + ax * az * dd
        c1 = bx * e10 + bz * e01 + (ax * bz + az * bx) * dd
        c2 = bx * bz * dd
        # f(t) = ray height - surface height
        qa = -c2
        qb = dy - c1
        qc = oy - c0
        f_start = qa * t * t + qb * t + qc
        if f_start <= 0.0:
            return t
        if abs(qa) < 1e-14:
            if qb < -1e-15:
                r = -qc / qb
                if t < r <= t_next + 1e-12:
                    return r
        else:
            disc = qb * qb - 4.0 * qa * qc
            if disc >= 0.0:
                sq = np.sqrt(disc)
                r1 = (-qb - sq) / (2.0 * qa)
                r2 = (-qb + sq) / (2.0 * qa)
                if r1 > r2:
                    r1, r2 = r2, r1
                if t + 1e-12 < r1 <= t_next + 1e-12:
                    return r1
                if t + 1e-12 < r2 <= t_next + 1e-12:
                    return r2
        t = t_next
    return _MISS


@njit(cache=True)
def _ray_box(box, ox, oy, oz, dx, dy, dz, t_hi):
    """Slab-method entry t into a generalized box, or miss."""
    t_min = 0.0
    t_max = t_hi
    for axis in range(3):
        if axis == 0:
            p0, pd, lo, hi = ox, dx, box[BX0], box[BX1]
        elif axis == 1:
            p0, pd, lo, hi = oz, dz, box[BZ0], box[BZ1]
        else:
            gx = box[BGX]
            gz = box[BGZ]
            p0 = oy - gx * ox - gz * oz
            pd = dy - gx * dx - gz * dz
            lo, hi = box[BW0], box[BW1]
        if abs(pd) < 1e-15:
            if p0 < lo or p0 > hi:
                return _MISS
        else:
            t1 = (lo - p0) / pd
            t2 = (hi - p0) / pd
            if t1 > t2:
                t1, t2 = t2, t1
            if t1 > t_min:
                t_min = t1
            if t2 < t_max:
                t_max = t2
            if t_min > t_max:
                return _MISS
    return t_min


@njit(cache=True)
def _ray_cylinder(cyl, ox, oy, oz, dx, dy, dz, t_hi):
    """Entry t into a solid finite vertical cylinder, or miss."""
    rx = ox - cyl[CX]
    rz = oz - cyl[CZ]
    a = dx * dx + dz * dz
    t_min = 0.0
    t_max = t_hi
    if a < 1e-15:
        if rx * rx + rz * rz > cyl[CR] * cyl[CR]:
            return _MISS
    else:
        b = 2.0 * (rx * dx + rz * dz)
        c = rx * rx + rz * rz - cyl[CR] * cyl[CR]
        disc = b * b - 4.0 * a * c
        if disc < 0.0:
            return _MISS
        sq = np.sqrt(disc)
        t1 = (-b - sq) / (2.0 * a)
        t2 = (-b + sq) / (2.0 * a)
        if t1 > t_min:
            t_min = t1
        if t2 < t_max:
            t_max = t2
        if t_min > t_max:
            return _MISS
    if abs(dy) < 1e-15:
        if oy < cyl[CY0] or oy > cyl[CY1]:
            return _MISS
    else:
        t1 = (cyl[CY0] - oy) / dy
        t2 = (cyl[CY1] - oy) / dy
        if t1 > t2:
            t1, t2 = t2, t1
        if t1 > t_min:
            t_min = t1
        if t2 < t_max:
            t_max = t2
        if t_min > t_max:
            return _MISS
    return t_min


@njit(cache=True)
def _coarse_index(half, ncc, x, z):
    gi = int((x + half) / _COARSE_CELL)
    gj = int((z + half) / _COARSE_CELL)
    if gi < 0:
        gi = 0
    elif gi >= ncc:
        gi = ncc - 1
    if gj < 0:
        gj = 0
    elif gj >= ncc:
        gj = ncc - 1
    return gi, gj


@njit(cache=True)
def _ray_solids(boxes, cyls, bstart, bids, cstart, cids, ncc, half,
                ox, oy, oz, dx, dy, dz, t_limit):
    """Nearest box/cylinder hit via 2D DDA over the coarse index."""
    best = _MISS
    # clip to the horizontal bounds square
    t_in = 0.0
    t_out = t_limit
    for axis in range(2):
        p0 = ox if axis == 0 else oz
        pd = dx if axis == 0 else dz
        if abs(pd) < 1e-15:
            if p0 < -half or p0 > half:
                return _MISS
        else:
            ta = (-half - p0) / pd
            tb = (half - p0) / pd
            if ta > tb:
                ta, tb = tb, ta
            if ta > t_in:
                t_in = ta
            if tb < t_out:
                t_out = tb
    if t_in > t_out:
        return _MISS

    t = t_in
    max_iters = 2 * ncc + 4
    for _ in range(max_iters):
        if t > t_out + 1e-12 or t >= best:
            break
        px = ox + dx * (t + 1e-9)
        pz = oz + dz * (t + 1e-9)
        gi, gj = _coarse_index(half, ncc, px, pz)
        cell_id = gi * ncc + gj
        for k in range(bstart[cell_id], bstart[cell_id + 1]):
            th = _ray_box(boxes[bids[k]], ox, oy, oz, dx, dy, dz, t_limit)
            if th < best:
                best = th
        for k in range(cstart[cell_id], cstart[cell_id + 1]):
            th = _ray_cylinder(cyls[cids[k]], ox, oy, oz, dx, dy, dz, t_limit)
            if th < best:
                best = th
        # advance to the next coarse-cell boundary
        if dx > 1e-15:
            t_nx = ((gi + 1) * _COARSE_CELL - half - ox) / dx
        elif dx < -1e-15:
            t_nx = (gi * _COARSE_CELL - half - ox) / dx
        else:
            t_nx = _MISS
        if dz > 1e-15:
            t_nz = ((gj + 1) * _COARSE_CELL - half - oz) / dz
        elif dz < -1e-15:
            t_nz = (gj * _COARSE_CELL - half - oz) / dz
        else:
            t_nz = _MISS
        t_next = t_nx if t_nx < t_nz else t_nz
        if t_next <= t + 1e-12:
            t_next = t + 1e-9
        t = t_next
    return best


@njit(cache=True)
def _cast_ray(heights, cell, half, max_h, boxes, cyls,
              bstart, bids, cstart, cids, ncc,
              ox, oy, oz, dx, dy, dz, max_range):
    best = max_range
    # still-water surface over lake cells
    if abs(dy) > 1e-15:
        tw = (WATER_LEVEL - oy) / dy
        if 1e-12 < tw < best:
            wx = ox + dx * tw
            wz = oz + dz * tw
            if -half <= wx <= half and -half <= wz <= half:
                if _terrain_height(heights, cell, half, wx, wz) < WATER_LEVEL:
                    best = tw
    t = _ray_terrain(heights, cell, half, max_h, ox, oy, oz, dx, dy, dz, best)
    if t < best:
        best = t
    t = _ray_solids(boxes, cyls, bstart, bids, cstart, cids, ncc, half,
                    ox, oy, oz, dx, dy, dz, best)
    if t < best:
        best = t
    return best


@njit(cache=True, parallel=True)
def _cast_ray_batch(heights, cell, half, max_h, boxes, cyls,
                    bstart, bids, cstart, cids, ncc,
                    ox, oy, oz, dirs, max_range, out):
    n = dirs.shape[0]
    for k in prange(n):
        out[k] = _cast_ray(heights, cell, half, max_h, boxes, cyls,
                           bstart, bids, cstart, cids, ncc,
                           ox, oy, oz, dirs[k, 0], dirs[k, 1], dirs[k, 2],
                           max_range)


@njit(cache=True)
def _cast_ray_batch_serial(heights, cell, half, max_h, boxes, cyls,
                           bstart, bids, cstart, cids, ncc,
                           ox, oy, oz, dirs, max_range, out):
    for k in range(dirs.shape[0]):
        out[k] = _cast_ray(heights, cell, half, max_h, boxes, cyls,
                           bstart, bids, cstart, cids, ncc,
                           ox, oy, oz, dirs[k, 0], dirs[k, 1], dirs[k, 2],
                           max_range)


# benchmark workers flip this so each instance stays a single OS thread
# (parallelism across instances only, never inside one)
_serial_batch = False


def set_serial_batch(on: bool) -> None:
    global _serial_batch
    _serial_batch = bool(on)


@njit(cache=True)
def _support_height(heights, cell, half, boxes, cyls,
                    bstart, bids, cstart, cids, ncc, x, z, y_max):
    """Highest standable surface at (x, z) not above y_max: (height, kind)."""
    best = -_MISS
    kind = SUPPORT_NONE
    if -half <= x <= half and -half <= z <= half:
        th = _terrain_height(heights, cell, half, x, z)
        if th < WATER_LEVEL:
            if WATER_LEVEL <= y_max + 1e-9:
                best = WATER_LEVEL
                kind = SUPPORT_WATER
        elif th <= y_max + 1e-9:
            best = th
            kind = SUPPORT_TERRAIN
    gi, gj = _coarse_index(half, ncc, x, z)
    cell_id = gi * ncc + gj
    for k in range(bstart[cell_id], bstart[cell_id + 1]):
        b = boxes[bids[k]]
        if b[BX0] <= x <= b[BX1] and b[BZ0] <= z <= b[BZ1]:
            top = b[BW1] + b[BGX] * x + b[BGZ] * z
            if top <= y_max + 1e-9 and top > best:
                best = top
                kind = SUPPORT_BOX
    for k in range(cstart[cell_id], cstart[cell_id + 1]):
        c = cyls[cids[k]]
        ddx = x - c[CX]
        ddz = z - c[CZ]
        if ddx * ddx + ddz * ddz <= c[CR] * c[CR]:
            if c[CY1] <= y_max + 1e-9 and c[CY1] > best:
                best = c[CY1]
                kind = SUPPORT_CYLINDER
    return best, kind


@njit(cache=True)
def _disc_blocked(heights, cell, half, boxes, cyls,
                  bstart, bids, cstart, cids, ncc,
                  x, z, y0, y1, r):
    """True iff the vertical cylinder {dist<r, y in (y0,y1)} hits a solid."""
    eps = 1e-9
    if x < -half + r - eps or x > half - r + eps:
        return True
    if z < -half + r - eps or z > half - r + eps:
        return True
    # terrain: sampled max over the disc (center + 4 compass points)
    s = r * 0.70710678
    for k in range(5):
        if k == 0:
            sx, sz = x, z
        elif k == 1:
            sx, sz = x + s, z
        elif k == 2:
            sx, sz = x - s, z
        elif k == 3:
            sx, sz = x, z + s
        else:
            sx, sz = x, z - s
        if _terrain_height(heights, cell, half, sx, sz) > y0 + eps:
            return True
    # boxes / cylinders from the (up to 4) coarse cells under the disc bbox
    gi0, gj0 = _coarse_index(half, ncc, x - r, z - r)
    gi1, gj1 = _coarse_index(half, ncc, x + r, z + r)
    for gi in range(gi0, gi1 + 1):
        for gj in range(gj0, gj1 + 1):
            cell_id = gi * ncc + gj
            for k in range(bstart[cell_id], bstart[cell_id + 1]):
                b = boxes[bids[k]]
                ddx = 0.0
                if b[BX0] - x > ddx:
                    ddx = b[BX0] - x
                if x - b[BX1] > ddx:
                    ddx = x - b[BX1]
                ddz = 0.0
                if b[BZ0] - z > ddz:
                    ddz = b[BZ0] - z
                if z - b[BZ1] > ddz:
                    ddz = z - b[BZ1]
                if ddx * ddx + ddz * ddz < (r - eps) * (r - eps):
                    cx0 = b[BX0] if b[BX0] > x - r else x - r
                    cx1 = b[BX1] if b[BX1] < x + r else x + r
                    cz0 = b[BZ0] if b[BZ0] > z - r else z - r
                    cz1 = b[BZ1] if b[BZ1] < z + r else z + r
                    g00 = b[BGX] * cx0 + b[BGZ] * cz0
                    g10 = b[BGX] * cx1 + b[BGZ] * cz0
                    g01 = b[BGX] * cx0 + b[BGZ] * cz1
                    g11 = b[BGX] * cx1 + b[BGZ] * cz1
                    gmin = min(min(g00, g10), min(g01, g11))
                    gmax = max(max(g00, g10), max(g01, g11))
                    if b[BW1] + gmax > y0 + eps and b[BW0] + gmin < y1 - eps:
                        return True
            for k in range(cstart[cell_id], cstart[cell_id + 1]):
                c = cyls[cids[k]]
                ddx = x - c[CX]
                ddz = z - c[CZ]
                rr = r + c[CR] - eps
                if ddx * ddx + ddz * ddz < rr * rr:
                    if c[CY1] > y0 + eps and c[CY0] < y1 - eps:
                        return True
    return False


@njit(cache=True)
def _ceiling_height(boxes, cyls, bstart, bids, cstart, cids, ncc, half,
                    x, z, r, y_from):
    """Lowest solid underside over the disc at or above y_from."""
    best = _MISS
    gi0, gj0 = _coarse_index(half, ncc, x - r, z - r)
    gi1, gj1 = _coarse_index(half, ncc, x + r, z + r)
    for gi in range(gi0, gi1 + 1):
        for gj in range(gj0, gj1 + 1):
            cell_id = gi * ncc + gj
            for k in range(bstart[cell_id], bstart[cell_id + 1]):
                b = boxes[bids[k]]
                ddx = 0.0
                if b[BX0] - x > ddx:
                    ddx = b[BX0] - x
                if x - b[BX1] > ddx:
                    ddx = x - b[BX1]
                ddz = 0.0
                if b[BZ0] - z > ddz:
                    ddz = b[BZ0] - z
                if z - b[BZ1] > ddz:
                    ddz = z - b[BZ1]
                if ddx * ddx + ddz * ddz < r * r:
                    cx0 = b[BX0] if b[BX0] > x - r else x - r
                    cx1 = b[BX1] if b[BX1] < x + r else x + r
                    cz0 = b[BZ0] if b[BZ0] > z - r else z - r
                    cz1 = b[BZ1] if b[BZ1] < z + r else z + r
                    g00 = b[BGX] * cx0 + b[BGZ] * cz0
                    g10 = b[BGX] * cx1 + b[BGZ] * cz0
                    g01 = b[BGX] * cx0 + b[BGZ] * cz1
                    g11 = b[BGX] * cx1 + b[BGZ] * cz1
                    gmin = min(min(g00, g10), min(g01, g11))
                    bottom = b[BW0] + gmin
                    if bottom >= y_from - 1e-9 and bottom < best:
                        best = bottom
            for k in range(cstart[cell_id], cstart[cell_id + 1]):
                c = cyls[cids[k]]
                ddx = x - c[CX]
                ddz = z - c[CZ]
                rr = r + c[CR]
                if ddx * ddx + ddz * ddz < rr * rr:
                    if c[CY0] >= y_from - 1e-9 and c[CY0] < best:
                        best = c[CY0]
    return best


@njit(cache=True, parallel=True)
def _walkable_grid(heights, cell, half, boxes, cyls,
                   bstart, bids, cstart, cids, ncc,
                   xs, zs, r, step_up, height, out_support, out_walk):
    """Support height and standability probed at a grid of points."""
    n = xs.shape[0]
    m = zs.shape[0]
    for i in prange(n):
        for j in range(m):
            x = xs[i]
            z = zs[j]
            s, kind = _support_height(heights, cell, half, boxes, cyls,
                                      bstart, bids, cstart, cids, ncc,
                                      x, z, _MISS)
            out_support[i, j] = s
            if kind == SUPPORT_NONE or kind == SUPPORT_WATER:
                out_walk[i, j] = False
            else:
                out_walk[i, j] = not _disc_blocked(
                    heights, cell, half, boxes, cyls,
                    bstart, bids, cstart, cids, ncc,
                    x, z, s + step_up, s + height, r)


@njit(cache=True)
def _ray_vertical_cylinder(ox, oy, oz, dx, dy, dz, cx, cz, r, y0, y1, t_hi):
    """Entry t into a free-standing vertical cylinder (agent hitbox)."""
    cyl = np.empty(5)
    cyl[CX] = cx
    cyl[CZ] = cz
    cyl[CR] = r
    cyl[CY0] = y0
    cyl[CY1] = y1
    return _ray_cylinder(cyl, ox, oy, oz, dx, dy, dz, t_hi)


# ---------------------------------------------------------------------------
# geometry container
# ---------------------------------------------------------------------------

class StaticGeometry:
    """Immutable flattened scene with a coarse 2D spatial index."""

    def __init__(self, heights: np.ndarray, cell_size: float, half: float,
                 boxes: np.ndarray, cylinders: np.ndarray):
        self.heights = np.ascontiguousarray(heights, dtype=np.float64)
        self.cell_size = float(cell_size)
        self.half = float(half)
        self.max_height = float(self.heights.max()) if self.heights.size else 0.0
        self.boxes = np.ascontiguousarray(
            boxes.reshape(-1, 8), dtype=np.float64)
        self.cylinders = np.ascontiguousarray(
            cylinders.reshape(-1, 5), dtype=np.float64)
        self.ncc = max(1, int(np.ceil(2.0 * self.half / _COARSE_CELL)))
        self._bstart, self._bids = self._build_index(self._box_bounds())
        self._cstart, self._cids = self._build_index(self._cyl_bounds())

    def _box_bounds(self):
        b = self.boxes
        if len(b) == 0:
            return np.empty((0, 4))
        return np.stack([b[:, BX0], b[:, BX1], b[:, BZ0], b[:, BZ1]], axis=1)

    def _cyl_bounds(self):
        c = self.cylinders
        if len(c) == 0:
            return np.empty((0, 4))
        return np.stack([c[:, CX] - c[:, CR], c[:, CX] + c[:, CR],
                         c[:, CZ] - c[:, CR], c[:, CZ] + c[:, CR]], axis=1)

    def _build_index(self, bounds: np.ndarray):
        ncc = self.ncc
        cells: list[list[int]] = [[] for _ in range(ncc * ncc)]
        for idx in range(len(bounds)):
            x0, x1, z0, z1 = bounds[idx]
            gi0 = max(0, min(ncc - 1, int((x0 + self.half) / _COARSE_CELL)))
            gi1 = max(0, min(ncc - 1, int((x1 + self.half) / _COARSE_CELL)))
            gj0 = max(0, min(ncc - 1, int((z0 + self.half) / _COARSE_CELL)))
            gj1 = max(0, min(ncc - 1, int((z1 + self.half) / _COARSE_CELL)))
            for gi in range(gi0, gi1 + 1):
                for gj in range(gj0, gj1 + 1):
                    cells[gi * ncc + gj].append(idx)
        start = np.zeros(ncc * ncc + 1, dtype=np.int32)
        for i, ids in enumerate(cells):
            start[i + 1] = start[i] + len(ids)
        flat = np.zeros(max(1, start[-1]), dtype=np.int32)
        for i, ids in enumerate(cells):
            flat[start[i]:start[i + 1]] = ids
        return start, flat

    # -- queries --

    def terrain_height(self, x: float, z: float) -> float:
        return _terrain_height(self.heights, self.cell_size, self.half, x, z)

    def cast_ray(self, origin, direction, max_range: float) -> float:
        ox, oy, oz = origin
        dx, dy, dz = direction
        return _cast_ray(self.heights, self.cell_size, self.half,
                         self.max_height, self.boxes, self.cylinders,
                         self._bstart, self._bids, self._cstart, self._cids,
                         self.ncc, ox, oy, oz, dx, dy, dz, max_range)

    def cast_rays(self, origin, dirs: np.ndarray, max_range: float) -> np.ndarray:
        out = np.empty(len(dirs), dtype=np.float64)
        ox, oy, oz = origin
        # thread fan-out only pays off for big batches; a depth map's
        # hundred rays run faster without the pool synchronization
        serial = _serial_batch or len(dirs) < 256
        kernel = _cast_ray_batch_serial if serial else _cast_ray_batch
        kernel(self.heights, self.cell_size, self.half,
               self.max_height, self.boxes, self.cylinders,
               self._bstart, self._bids, self._cstart, self._cids,
               self.ncc, ox, oy, oz,
               np.ascontiguousarray(dirs, dtype=np.float64),
               max_range, out)
        return out

    def support_height(self, x: float, z: float, y_max: float):
        return _support_height(self.heights, self.cell_size, self.half,
                               self.boxes, self.cylinders,
                               self._bstart, self._bids, self._cstart,
                               self._cids, self.ncc, x, z, y_max)

    def disc_blocked(self, x: float, z: float, y0: float, y1: float,
                     r: float) -> bool:
        return _disc_blocked(self.heights, self.cell_size, self.half,
                             self.boxes, self.cylinders,
                             self._bstart, self._bids, self._cstart,
                             self._cids, self.ncc, x, z, y0, y1, r)

    def ceiling_height(self, x: float, z: float, r: float,
                       y_from: float) -> float:
        return _ceiling_height(self.boxes, self.cylinders,
                               self._bstart, self._bids, self._cstart,
                               self._cids, self.ncc, self.half,
                               x, z, r, y_from)

    def walkable_grid(self, xs: np.ndarray, zs: np.ndarray,
                      r: float = AGENT_RADIUS,
                      step_up: float = STEP_UP_LIMIT,
                      height: float = AGENT_HEIGHT):
        """(support, walkable) arrays probed at the outer product of xs, zs."""
        xs = np.ascontiguousarray(xs, dtype=np.float64)
        zs = np.ascontiguousarray(zs, dtype=np.float64)
        support = np.empty((len(xs), len(zs)), dtype=np.float64)
        walk = np.empty((len(xs), len(zs)), dtype=np.bool_)
        _walkable_grid(self.heights, self.cell_size, self.half,
                       self.boxes, self.cylinders,
                       self._bstart, self._bids, self._cstart, self._cids,
                       self.ncc, xs, zs, r, step_up, height, support, walk)
        return support, walk

    def segment_blocked(self, a, b) -> bool:
        ax, ay, az = float(a[0]), float(a[1]), float(a[2])
        bx, by, bz = float(b[0]), float(b[1]), float(b[2])
        dx, dy, dz = bx - ax, by - ay, bz - az
        length = np.sqrt(dx * dx + dy * dy + dz * dz)
        if length < 1e-12:
            return False
        t = self.cast_ray((ax, ay, az), (dx / length, dy / length, dz / length),
                          length)
        return t < length - 1e-9
