"""Shared fixtures: benchmark maps, synthetic fixture worlds."""

from __future__ import annotations

import numpy as np
import pytest


def pytest_runtest_logreport(report):
    # one visible pass/fail line per acceptance criterion
    if report.when != "call" or "test_acceptance" not in report.nodeid:
        return
    name = report.nodeid.split("::")[-1].replace("test_", "", 1)
    outcome = "PASS" if report.passed else (
        "SKIP" if report.skipped else "FAIL")
    print(f"\n[ACCEPTANCE] {name}: {outcome}", flush=True)

from scavsim import pcg
from scavsim.world import (
    Building,
    Heightfield,
    Obstacle,
    SupplyBox,
    WorldMap,
)

_MAP_CACHE: dict[int, WorldMap] = {}


def benchmark_map(map_id: int) -> WorldMap:
    if map_id not in _MAP_CACHE:
        cfg = next(c for c in pcg.benchmark_configs() if c.map_id == map_id)
        _MAP_CACHE[map_id] = pcg.generate_map(cfg)
    return _MAP_CACHE[map_id]


def make_flat_map(size: int = 100, buildings=(), obstacles=(),
                  boxes=(), spawn=((-8.0, -8.0, -2.0, -2.0),),
                  height: float = 0.0) -> WorldMap:
    half = size // 2
    res = size // 2
    hf = Heightfield(res, 2.0, np.full((res, res), height, dtype=np.float32))
    return WorldMap(1, size, half, hf, tuple(buildings), tuple(obstacles),
                    list(boxes), tuple(spawn))


def make_house(x0=-5.0, z0=-5.0, w=10.0, d=10.0, base=0.0, storeys=2,
               variant=0) -> Building:
    return pcg.build_house((x0, z0, x0 + w, z0 + d), base, storeys, variant)


@pytest.fixture(scope="session")
def map103():
    return benchmark_map(103)


@pytest.fixture(scope="session")
def map104():
    return benchmark_map(104)


@pytest.fixture(scope="session")
def map101():
    return benchmark_map(101)


@pytest.fixture(scope="session")
def flat_map():
    return make_flat_map()


@pytest.fixture(scope="session")
def house_map():
    """Flat world with one 2-storey house (door south, stairs north)."""
    return make_flat_map(100, buildings=[make_house()])


@pytest.fixture(scope="session")
def ring_map():
    """Agent-height cylinders on a 10 m radius ring around the origin."""
    obstacles = []
    for k in range(24):
        ang = 2.0 * np.pi * k / 24
        obstacles.append(Obstacle("tree",
                                  (10.5 * np.cos(ang), 10.5 * np.sin(ang)),
                                  0.5, 4.0))
    return make_flat_map(100, obstacles=obstacles)


def supply_box(box_id: int, x: float, y: float, z: float, qty: int,
               indoor: bool = False) -> SupplyBox:
    return SupplyBox(box_id, (x, y, z), qty, indoor)
