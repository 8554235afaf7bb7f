"""World model spatial queries."""

from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import make_flat_map, make_house
from scavsim.world import (
    Heightfield,
    OutOfBoundsError,
    WorldMap,
    building_boxes,
    ground_height,
    is_walkable,
    segment_blocked,
)


class TestGroundHeight:
    def test_flat_map_everywhere_zero(self, flat_map):
        for (x, z) in [(0, 0), (12.3, -7.7), (49.0, 49.0), (-49.9, 3.1)]:
            assert ground_height(flat_map, x, z) == 0.0

    def test_exact_at_cell_centers(self):
        rng = np.random.default_rng(0)
        h = rng.uniform(-5, 5, size=(50, 50)).astype(np.float32)
        world = WorldMap(1, 100, 50, Heightfield(50, 2.0, h), (), (), [], ())
        # cell (i, j) center is at (-50 + (i+0.5)*2, -50 + (j+0.5)*2)
        for (i, j) in [(0, 0), (10, 31), (49, 49), (25, 0)]:
            x = -50 + (i + 0.5) * 2.0
            z = -50 + (j + 0.5) * 2.0
            assert ground_height(world, x, z) == pytest.approx(
                float(h[i, j]), abs=1e-6)

    def test_midpoint_of_two_cells(self):
        # heights 0 and 2 in adjacent cells -> 1.0 at the shared midpoint
        h = np.zeros((50, 50), dtype=np.float32)
        h[25, 25] = 0.0
        h[26, 25] = 2.0
        world = WorldMap(1, 100, 50, Heightfield(50, 2.0, h), (), (), [], ())
        x_mid = -50 + (25 + 0.5) * 2.0 + 1.0
        z = -50 + (25 + 0.5) * 2.0
        assert ground_height(world, x_mid, z) == pytest.approx(1.0, abs=1e-9)

    def test_out_of_bounds_raises(self, flat_map):
        with pytest.raises(OutOfBoundsError):
            ground_height(flat_map, 51.0, 0.0)

    @settings(max_examples=60, deadline=None)
    @given(x=st.floats(-48, 47), z=st.floats(-48, 47))
    def test_continuity_across_cells(self, x, z):
        rng = np.random.default_rng(7)
        h = rng.uniform(-3, 3, size=(50, 50)).astype(np.float32)
        world = WorldMap(1, 100, 50, Heightfield(50, 2.0, h), (), (), [], ())
        eps = 1e-4
        h0 = ground_height(world, x, z)
        h1 = ground_height(world, x + eps, z)
        # bilinear slope bounded by cell height range / cell size
        assert abs(h1 - h0) <= 6.0 / 2.0 * eps + 1e-9


class TestIsWalkable:
    def test_open_field(self, flat_map):
        assert is_walkable(flat_map, (10.0, 0.0, 10.0))

    def test_gap_tolerance(self, flat_map):
        assert is_walkable(flat_map, (10.0, 0.09, 10.0))
        assert not is_walkable(flat_map, (10.0, 0.3, 10.0))

    def test_inside_wall_slab(self, house_map):
        b = house_map.buildings[0]
        w = b.walls[0]  # south wall
        x = 0.25 * (w.x0 + w.x1) + 0.5 * w.x1  # inside the slab, off-door
        p = (w.x1 - 1.0, 0.0, 0.5 * (w.z0 + w.z1))
        assert not is_walkable(house_map, p)

    def test_second_storey_floor_slab(self, house_map):
        # interior point on the level-1 slab top of the 2-storey house
        assert is_walkable(house_map, (2.5, 3.0, -2.5))

    def test_lake_not_walkable(self):
        world = make_flat_map(height=-1.0, spawn=())
        assert not is_walkable(world, (0.0, -0.5, 0.0))

    def test_outside_bounds_false(self, flat_map):
        assert not is_walkable(flat_map, (60.0, 0.0, 0.0))


class TestSegmentBlocked:
    def test_open_air(self, flat_map):
        assert not segment_blocked(flat_map, (0, 1.6, 0), (10, 1.6, 0))

    def test_through_wall(self, house_map):
        assert segment_blocked(house_map, (0, 1.6, -8), (0, 1.6, 8))

    def test_through_door_centerline(self, house_map):
        # door center of template 0 sits mid south wall at x=0, z=-5..-4.8
        a = (0.0, 1.0, -7.0)
        b = (0.0, 1.0, -3.0)
        assert not segment_blocked(house_map, a, b)

    def test_through_terrain(self):
        h = np.zeros((50, 50), dtype=np.float32)
        h[20:30, 20:30] = 5.0
        world = WorldMap(1, 100, 50, Heightfield(50, 2.0, h), (), (), [], ())
        assert segment_blocked(world, (-20, 1.6, 0), (20, 1.6, 0))

    @settings(max_examples=80, deadline=None)
    @given(ax=st.floats(-20, 20), az=st.floats(-20, 20),
           bx=st.floats(-20, 20), bz=st.floats(-20, 20),
           ay=st.floats(0.2, 8.0), by=st.floats(0.2, 8.0))
    def test_symmetry(self, house_map, ax, az, bx, bz, ay, by):
        a = (ax, ay, az)
        b = (bx, by, bz)
        assert segment_blocked(house_map, a, b) == \
            segment_blocked(house_map, b, a)


class TestBuildingGeometry:
    def test_door_opening_splits_wall(self):
        b = make_house(storeys=1)
        boxes = building_boxes(b)
        # the doorway column must stay clear between floor and lintel
        door_x, door_z = 0.0, -4.9
        for (x0, x1, z0, z1, gx, gz, w0, w1) in boxes:
            if x0 <= door_x <= x1 and z0 <= door_z <= z1:
                assert w0 >= 2.2 - 1e-6, "only the lintel may cover the door"

    def test_roof_present(self):
        b = make_house(storeys=2)
        boxes = building_boxes(b)
        tops = [w1 for (_, _, _, _, gx, gz, _, w1) in boxes
                if gx == 0 and gz == 0]
        assert max(tops) == pytest.approx(6.0, abs=1e-5)

    def test_stair_ramp_is_sloped_box(self):
        b = make_house(storeys=2)
        sloped = [bx for bx in building_boxes(b)
                  if bx[4] != 0.0 or bx[5] != 0.0]
        assert len(sloped) == 1
