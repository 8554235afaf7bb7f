#!/usr/bin/env python3
"""Scripted-bot evaluation across the benchmark maps.

Prints mean episode length, success rate, and supplies per map, in the
shape used for the environment's baseline comparisons.
"""

import argparse

from scavsim import bots, tasks
from scavsim.maps import MapStore

BOT_CAMERA = tasks.CameraConfig(mode="panorama", width=36, height=6,
                                vertical_fov=50.0, max_range=60.0)


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--bot", choices=bots.BOT_KINDS, default="nav")
    parser.add_argument("--task", default="navigation",
                        choices=tasks.TASK_TYPES)
    parser.add_argument("--maps", default="103,104,101,102,8,14")
    parser.add_argument("--episodes", type=int, default=20)
    parser.add_argument("--num-agents", type=int, default=None)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()
    store = MapStore()
    print(f"{'map':>5} {'eps_len':>12} {'success':>8} {'supplies':>12}")
    for map_id in (int(m) for m in args.maps.split(",")):
        world = store.get(map_id)
        spec = tasks.TaskSpec(task_type=args.task, map_id=map_id,
                              num_agents=args.num_agents, seed=args.seed,
                              camera=BOT_CAMERA)
        policy = bots.make_bot_policy(args.bot, spec.agents)
        summary = tasks.evaluate(spec, world, policy, args.episodes)
        print(f"{map_id:>5} "
              f"{summary['episode_length_mean']:>7.1f} "
              f"({summary['episode_length_std']:.1f}) "
              f"{summary['success_rate']:>8.2f} "
              f"{summary['supplies_mean']:>7.1f} "
              f"({summary['supplies_std']:.1f})")


if __name__ == "__main__":
    main()
