"""Throughput benchmark: concurrent instances driven by no-op policies.

Two drive modes: "inprocess" steps episodes directly inside worker
processes (one process per instance); "network" runs each instance behind
its own TCP server process with a loopback client. total_fps counts
steps * agents per second summed over instances; instance_fps counts raw
steps per second.
"""

from __future__ import annotations

import csv
import multiprocessing as mp
import socket
import time
from dataclasses import dataclass

from . import mapio, protocol, tasks
from .dynamics import Action
from .maps import MapStore
from .protocol import FrameParser, MSG_CONTROL, MSG_OBSERVATION
from .server import GameServer

_WARMUP_STEPS = 20


@dataclass(frozen=True)
class BenchmarkResult:
    mode: str
    processes: int
    agents_per_instance: int
    total_fps: float          # steps * agents per second
    instance_fps: float       # steps per second summed over instances
    duration: float


def _bench_spec(map_id: int, agents: int) -> tasks.TaskSpec:
    return tasks.TaskSpec(task_type="supply_gather_max", map_id=map_id,
                          num_agents=agents, max_steps=10 ** 9, seed=1)


def _worker_inprocess(map_bytes: bytes, map_id: int, agents: int,
                      seconds: float, conn) -> None:
    from . import geometry
    geometry.set_serial_batch(True)  # parallelism lives across instances
    world = mapio.load_bytes(map_bytes)
    spec = _bench_spec(map_id, agents)
    state, _ = tasks.reset(spec, world)
    actions = [Action() for _ in range(agents)]
    for _ in range(_WARMUP_STEPS):
        tasks.step(state, actions)
    steps = 0
    start = time.perf_counter()
    while True:
        for _ in range(25):
            tasks.step(state, actions)
        steps += 25
        if time.perf_counter() - start >= seconds:
            break
    conn.send((steps, time.perf_counter() - start))
    conn.close()


def _worker_server(map_bytes: bytes, port_conn) -> None:
    import asyncio

    from . import geometry
    geometry.set_serial_batch(True)
    world = mapio.load_bytes(map_bytes)
    store = MapStore(allow_generate=False)
    store.put(world)
    server = GameServer(store, max_sessions=4)

    async def _run():
        await server.start("127.0.0.1", 0)
        port_conn.send(server.port)
        port_conn.close()
        await server.serve_forever()

    try:
        asyncio.run(_run())
    except KeyboardInterrupt:
        pass


class _NetClient:
    """Minimal blocking loopback client used only by the benchmark."""

    def __init__(self, port: int, spec: tasks.TaskSpec):
        self.sock = socket.create_connection(("127.0.0.1", port), timeout=30)
        self.parser = FrameParser()
        self.inbox: list[protocol.Frame] = []
        payload = __import__("json").dumps(
            {"cmd": "create_session",
             "spec": tasks.spec_to_json(spec)}).encode()
        self.sock.sendall(protocol.encode_frame(MSG_CONTROL, 0, 0, payload))
        ack = self._next_frame(MSG_CONTROL)
        body = __import__("json").loads(ack.payload)
        self.session_id = body["session_id"]
        self.num_agents = body["num_agents"]
        self.tick = 0
        for _ in range(self.num_agents):
            self._next_frame(MSG_OBSERVATION)

    def _next_frame(self, want_type: int) -> protocol.Frame:
        while True:
            for i, frame in enumerate(self.inbox):
                if frame.msg_type == want_type:
                    return self.inbox.pop(i)
            data = self.sock.recv(65536)
            if not data:
                raise ConnectionError("server closed")
            self.inbox.extend(self.parser.feed(data))

    def step(self) -> None:
        batch = b"".join(
            protocol.encode_frame(protocol.MSG_ACTION, self.session_id,
                                  self.tick, protocol.encode_action(i, Action()))
            for i in range(self.num_agents))
        self.sock.sendall(batch)
        for _ in range(self.num_agents):
            self._next_frame(MSG_OBSERVATION)
        self.tick += 1

    def close(self) -> None:
        self.sock.close()


def _run_inprocess(map_bytes, map_id, processes, agents, seconds
                   ) -> BenchmarkResult:
    ctx = mp.get_context("fork")
    pipes = []
    workers = []
    for _ in range(processes):
        parent, child = ctx.Pipe()
        w = ctx.Process(target=_worker_inprocess,
                        args=(map_bytes, map_id, agents, seconds, child))
        w.start()
        pipes.append(parent)
        workers.append(w)
    total_steps = 0
    max_duration = 0.0
    for parent, w in zip(pipes, workers):
        steps, duration = parent.recv()
        total_steps += steps
        max_duration = max(max_duration, duration)
        w.join()
    return BenchmarkResult("inprocess", processes, agents,
                           total_steps * agents / max_duration,
                           total_steps / max_duration, max_duration)


def _run_network(map_bytes, map_id, processes, agents, seconds
                 ) -> BenchmarkResult:
    import threading

    ctx = mp.get_context("fork")
    servers = []
    ports = []
    for _ in range(processes):
        parent, child = ctx.Pipe()
        w = ctx.Process(target=_worker_server, args=(map_bytes, child),
                        daemon=True)
        w.start()
        ports.append(parent.recv())
        servers.append(w)
    spec = _bench_spec(map_id, agents)
    counts = [0] * processes
    durations = [0.0] * processes

    def drive(idx: int) -> None:
        client = _NetClient(ports[idx], spec)
        for _ in range(_WARMUP_STEPS):
            client.step()
        start = time.perf_counter()
        steps = 0
        while time.perf_counter() - start < seconds:
            client.step()
            steps += 1
        counts[idx] = steps
        durations[idx] = time.perf_counter() - start
        client.close()

    threads = [threading.Thread(target=drive, args=(i,))
               for i in range(processes)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    for w in servers:
        w.terminate()
    total_steps = sum(counts)
    duration = max(durations)
    return BenchmarkResult("network", processes, agents,
                           total_steps * agents / duration,
                           total_steps / duration, duration)


def bench_throughput(map_id: int, processes: list[int], agents: list[int],
                     seconds: float, modes=("inprocess", "network"),
                     map_store: MapStore | None = None
                     ) -> list[BenchmarkResult]:
    if seconds <= 0:
        return []
    store = map_store or MapStore()
    map_bytes = mapio.save_bytes(store.get(map_id))
    results = []
    for mode in modes:
        run = _run_inprocess if mode == "inprocess" else _run_network
        for a in agents:
            for p in processes:
                result = run(map_bytes, map_id, p, a, seconds)
                results.append(result)
                print(f"{mode} p={p} a={a}: total_fps={result.total_fps:.1f} "
                      f"instance_fps={result.instance_fps:.1f}", flush=True)
    return results


def write_csv(results: list[BenchmarkResult], path) -> None:
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["processes", "agents", "total_fps", "duration",
                         "mode", "instance_fps", "agent_steps_per_sec"])
        for r in results:
            writer.writerow([r.processes, r.agents_per_instance,
                             f"{r.total_fps:.2f}", f"{r.duration:.2f}",
                             r.mode, f"{r.instance_fps:.2f}",
                             f"{r.total_fps:.2f}"])
