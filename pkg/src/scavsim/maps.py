"""Map lookup by id: directory of .wscv files with generation fallback."""

from __future__ import annotations

import os
from pathlib import Path

from . import mapio, pcg
from .world import WorldMap

MAP_DIR_ENV = "WSCAV_MAP_DIR"


def map_filename(map_id: int) -> str:
    return f"{map_id:03d}.wscv"


class MapStore:
    """Loads and caches maps; falls back to the benchmark generator."""

    def __init__(self, map_dir: str | os.PathLike | None = None,
                 allow_generate: bool = True):
        env_dir = os.environ.get(MAP_DIR_ENV)
        self.map_dir = Path(map_dir) if map_dir else (
            Path(env_dir) if env_dir else None)
        self.allow_generate = allow_generate
        self._cache: dict[int, WorldMap] = {}

    def get(self, map_id: int) -> WorldMap:
        if map_id in self._cache:
            return self._cache[map_id]
        world = None
        if self.map_dir is not None:
            path = self.map_dir / map_filename(map_id)
            if path.exists():
                world = mapio.load_map(path)
        if world is None and self.allow_generate:
            for cfg in pcg.benchmark_configs():
                if cfg.map_id == map_id:
                    world = pcg.generate_map(cfg)
                    break
        if world is None:
            raise KeyError(f"map {map_id} not found"
                           + (f" in {self.map_dir}" if self.map_dir else ""))
        self._cache[map_id] = world
        return world

    def put(self, world: WorldMap) -> None:
        self._cache[world.map_id] = world
