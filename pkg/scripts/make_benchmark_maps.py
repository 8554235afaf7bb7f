#!/usr/bin/env python3
"""Emit the six benchmark maps as .wscv files."""

import argparse
from dataclasses import replace
from pathlib import Path

from scavsim import mapio, maps, pcg


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--out-dir", default="maps")
    parser.add_argument("--seed", type=int, default=None,
                        help="offset added to each map id as its seed")
    args = parser.parse_args()
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for cfg in pcg.benchmark_configs():
        if args.seed is not None:
            cfg = replace(cfg, seed=args.seed + cfg.map_id)
        world = pcg.generate_map(cfg)
        path = out / maps.map_filename(cfg.map_id)
        mapio.save_map(world, path)
        total = sum(b.quantity for b in world.supply_boxes)
        print(f"{path}: {len(world.buildings)} buildings, "
              f"{len(world.supply_boxes)} boxes, {total} supplies")


if __name__ == "__main__":
    main()
