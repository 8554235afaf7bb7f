"""Command line interface.

Subcommands: generate-map, benchmark-maps, serve, bench, run-bot, rollout.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import sys
from dataclasses import replace
from pathlib import Path

from . import bench, bots, mapio, maps, pcg, protocol, tasks
from .dynamics import Action


def _cmd_generate_map(args) -> int:
    with open(args.config) as f:
        cfg = pcg.config_from_json(json.load(f))
    if args.seed is not None:
        cfg = replace(cfg, seed=args.seed)
    world = pcg.generate_map(cfg)
    mapio.save_map(world, args.out)
    total = sum(b.quantity for b in world.supply_boxes)
    print(f"map {world.map_id}: {len(world.buildings)} buildings, "
          f"{len(world.supply_boxes)} boxes ({total} supplies) -> {args.out}")
    return 0


def _cmd_benchmark_maps(args) -> int:
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    for cfg in pcg.benchmark_configs():
        if args.seed is not None:
            cfg = replace(cfg, seed=args.seed + cfg.map_id)
        world = pcg.generate_map(cfg)
        path = out_dir / maps.map_filename(cfg.map_id)
        mapio.save_map(world, path)
        print(f"wrote {path}")
    return 0


def _cmd_serve(args) -> int:
    from .server import serve
    serve(args.listen, args.max_sessions, args.map_dir)
    return 0


def _cmd_bench(args) -> int:
    processes = [int(p) for p in args.processes.split(",")]
    agents = [int(a) for a in args.agents.split(",")]
    modes = tuple(args.modes.split(","))
    store = maps.MapStore(args.map_dir)
    results = bench.bench_throughput(args.map, processes, agents,
                                     args.seconds, modes, store)
    bench.write_csv(results, args.out)
    print(f"wrote {args.out}")
    return 0


def _cmd_run_bot(args) -> int:
    with open(args.task) as f:
        spec = tasks.spec_from_json(json.load(f))
    if args.seed is not None:
        spec = replace(spec, seed=args.seed)
    if args.num_agents is not None:
        spec = replace(spec, num_agents=args.num_agents)
    store = maps.MapStore(args.map_dir)
    world = store.get(spec.map_id)
    policy = bots.make_bot_policy(args.bot, spec.agents)
    summary = tasks.evaluate(spec, world, policy, args.episodes)
    if args.metrics:
        with open(args.metrics, "w") as f:
            json.dump(summary, f, indent=2)
    print(json.dumps({k: v for k, v in summary.items()
                      if k != "per_episode"}, indent=2))
    return 0


def _cmd_rollout(args) -> int:
    """Replay an action log in-process; dump observation payload hashes.

    The hashes cover the exact bytes a server would put in Observation
    frames, so remote trajectories can be compared bit-for-bit.
    """
    with open(args.spec) as f:
        spec = tasks.spec_from_json(json.load(f))
    with open(args.actions) as f:
        action_log = json.load(f)
    store = maps.MapStore(args.map_dir)
    world = store.get(spec.map_id)
    state, observations = tasks.reset(spec, world)

    def obs_hashes(obs_list, rewards, done, success):
        out = []
        for i, obs in enumerate(obs_list):
            payload = protocol.encode_observation(
                obs, rewards[i] if rewards else 0, done, success)
            out.append(hashlib.sha256(payload).hexdigest())
        return out

    trace = {"ticks": [obs_hashes(observations, None, False, False)],
             "rewards": [], "metrics": None}
    for tick_actions in action_log:
        if state.done:
            break
        actions = [Action(**a) for a in tick_actions]
        state, observations, rewards, done = tasks.step(state, actions)
        trace["ticks"].append(obs_hashes(observations, rewards, done,
                                         state.success))
        trace["rewards"].append(rewards)
    if state.done:
        trace["metrics"] = state.metrics().to_json()
    with open(args.out, "w") as f:
        json.dump(trace, f)
    print(f"wrote {args.out} ({len(trace['ticks'])} ticks)")
    return 0


def main(argv=None) -> int:
    logging.basicConfig(level=logging.INFO,
                        format="%(levelname)s %(name)s: %(message)s")
    parser = argparse.ArgumentParser(prog="scavsim")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate-map", help="generate one map from a config")
    p.add_argument("--config", required=True, help="PcgConfig JSON file")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_generate_map)

    p = sub.add_parser("benchmark-maps", help="emit all six benchmark maps")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--seed", type=int, default=None)
    p.set_defaults(func=_cmd_benchmark_maps)

    p = sub.add_parser("serve", help="run the game server")
    p.add_argument("--listen", default="127.0.0.1:7777")
    p.add_argument("--max-sessions", type=int, default=64)
    p.add_argument("--map-dir", default=None,
                   help=f"defaults to ${maps.MAP_DIR_ENV}")
    p.set_defaults(func=_cmd_serve)

    p = sub.add_parser("bench", help="throughput benchmark")
    p.add_argument("--map", type=int, default=101)
    p.add_argument("--processes", default="1,2,4,6,8,10")
    p.add_argument("--agents", default="1,5,10")
    p.add_argument("--seconds", type=float, default=30.0)
    p.add_argument("--modes", default="inprocess,network")
    p.add_argument("--map-dir", default=None)
    p.add_argument("--out", default="bench.csv")
    p.set_defaults(func=_cmd_bench)

    p = sub.add_parser("run-bot", help="evaluate a scripted bot")
    p.add_argument("--task", required=True, help="TaskSpec JSON file")
    p.add_argument("--bot", choices=bots.BOT_KINDS, required=True)
    p.add_argument("--episodes", type=int, default=10)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--num-agents", type=int, default=None)
    p.add_argument("--metrics", default=None, help="write metrics JSON here")
    p.add_argument("--map-dir", default=None)
    p.set_defaults(func=_cmd_run_bot)

    p = sub.add_parser("rollout", help="replay an action log in-process")
    p.add_argument("--spec", required=True)
    p.add_argument("--actions", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--map-dir", default=None)
    p.set_defaults(func=_cmd_rollout)

    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
