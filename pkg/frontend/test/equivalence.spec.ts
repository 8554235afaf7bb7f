/**
 * Client-equivalence acceptance: a remote trajectory through this client
 * must be bit-identical to the same (spec, seed, action log) executed
 * server-locally (the `rollout` CLI hashes the serialized observations).
 */

import { createHash } from "node:crypto";
import { ChildProcess, spawn } from "node:child_process";
import { mkdtempSync, readFileSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";

import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { AgentAction } from "../src/protocol.js";
import { RemoteEnv, ServerError, makeEnv } from "../src/client.js";

const PYTHON = process.env.PYTHON ?? "python3";
const NUM_AGENTS = 2;
const TICKS = 30;

const ENV_CONFIG = {
  task_type: "supply_gather_max",
  map_id: 103,
  num_agents: NUM_AGENTS,
  max_steps: TICKS,
  seed: 99,
  camera: { mode: "frustum", width: 4, height: 4,
            horizontal_fov: 90, vertical_fov: 90, max_range: 100 },
};

function lcg(seed: number): () => number {
  let state = seed >>> 0;
  return () => {
    state = (Math.imul(state, 1664525) + 1013904223) >>> 0;
    return state / 0x100000000;
  };
}

function buildActionLog(): AgentAction[][] {
  const rand = lcg(4242);
  const log: AgentAction[][] = [];
  for (let t = 0; t < TICKS; t++) {
    const tick: AgentAction[] = [];
    for (let a = 0; a < NUM_AGENTS; a++) {
      tick.push({
        walkDir: Math.fround(rand() * 360),
        walkSpeed: Math.floor(rand() * 11),
        turnLrDelta: Math.fround((rand() - 0.5) * 60),
        lookUdDelta: Math.fround((rand() - 0.5) * 20),
        jump: rand() < 0.1,
        pickup: true,
        shoot: false,
        reload: false,
      });
    }
    log.push(tick);
  }
  return log;
}

function toPythonAction(a: AgentAction) {
  return {
    walk_dir: a.walkDir,
    walk_speed: a.walkSpeed,
    turn_lr_delta: a.turnLrDelta,
    look_ud_delta: a.lookUdDelta,
    jump: a.jump,
    pickup: a.pickup,
    shoot: a.shoot,
    reload: a.reload,
  };
}

function sha256(data: Buffer): string {
  return createHash("sha256").update(data).digest("hex");
}

let server: ChildProcess;
let address = "";

beforeAll(async () => {
  server = spawn(PYTHON, ["-m", "scavsim.cli", "serve",
                          "--listen", "127.0.0.1:0", "--max-sessions", "8"],
                 { stdio: ["ignore", "pipe", "pipe"] });
  address = await new Promise<string>((resolve, reject) => {
    let out = "";
    const timer = setTimeout(
      () => reject(new Error(`server never came up:\n${out}`)), 110_000);
    server.stdout!.on("data", (chunk: Buffer) => {
      out += chunk.toString();
      const m = out.match(/listening on ([\d.]+:\d+)/);
      if (m) {
        clearTimeout(timer);
        resolve(m[1]);
      }
    });
    server.on("exit", (code) =>
      reject(new Error(`server exited early (${code}):\n${out}`)));
  });
});

afterAll(() => {
  server?.kill();
});

describe("remote environment client", () => {
  it("trajectory is bit-identical to the server-local rollout", async () => {
    const log = buildActionLog();

    // reference: in-process rollout hashing the serialized observations
    const dir = mkdtempSync(join(tmpdir(), "scavtraj-"));
    const specPath = join(dir, "spec.json");
    const actionsPath = join(dir, "actions.json");
    const outPath = join(dir, "traj.json");
    writeFileSync(specPath, JSON.stringify(ENV_CONFIG));
    writeFileSync(actionsPath,
                  JSON.stringify(log.map((t) => t.map(toPythonAction))));
    await new Promise<void>((resolve, reject) => {
      const proc = spawn(PYTHON, ["-m", "scavsim.cli", "rollout",
                                  "--spec", specPath,
                                  "--actions", actionsPath,
                                  "--out", outPath],
                         { stdio: ["ignore", "pipe", "pipe"] });
      let err = "";
      proc.stderr!.on("data", (c: Buffer) => { err += c.toString(); });
      proc.on("exit", (code) => code === 0
        ? resolve()
        : reject(new Error(`rollout failed (${code}):\n${err}`)));
    });
    const reference = JSON.parse(readFileSync(outPath, "utf-8"));

    // remote run through this client, hashing raw frame payloads
    const env = await makeEnv(address, ENV_CONFIG);
    const remote: string[][] = [env.initialRawPayloads().map(sha256)];
    for (const tickActions of log) {
      const payloads = await env.stepRaw(tickActions);
      remote.push(payloads.map(sha256));
    }
    await env.close();

    expect(remote).toEqual(reference.ticks);
    expect(reference.metrics).not.toBeNull();
  });

  it("exposes spaces derived from the task config", async () => {
    const env = await makeEnv(address, {
      task_type: "navigation", map_id: 103, seed: 3,
      camera: { width: 5, height: 4 },
    });
    const spaces = env.spaces();
    expect(spaces.observation.depthShape).toEqual([4, 5]);
    expect(spaces.observation.hasTarget).toBe(true);
    expect(spaces.action.allowed).toEqual(
      { pickup: false, shoot: false, reload: false });
    expect(spaces.action.walkSpeed).toEqual([0, 10]);
    await env.close();
  });

  it("steps and rewards through the gym-style interface", async () => {
    const env = await makeEnv(address, {
      task_type: "navigation", map_id: 103, seed: 11, max_steps: 3,
      camera: { width: 2, height: 2 },
      target_location: [45.0, 0.0, 45.0],
    });
    const obs0 = await env.reset();
    expect(obs0).toHaveLength(1);
    expect(obs0[0].step).toBe(0);
    let result = await env.step([{
      walkDir: 0, walkSpeed: 3, turnLrDelta: 0, lookUdDelta: 0,
      jump: false, pickup: false, shoot: false, reload: false,
    }]);
    expect(result.observations[0].step).toBe(1);
    expect(result.rewards).toEqual([0]);
    while (!result.done) {
      result = await env.step([{
        walkDir: 0, walkSpeed: 0, turnLrDelta: 0, lookUdDelta: 0,
        jump: false, pickup: false, shoot: false, reload: false,
      }]);
    }
    expect(result.info.metrics).toMatchObject({ episode_length: 3,
                                                success: false });
    await expect(env.step([{
      walkDir: 0, walkSpeed: 0, turnLrDelta: 0, lookUdDelta: 0,
      jump: false, pickup: false, shoot: false, reload: false,
    }])).rejects.toThrow(/finished/);
    await env.close();
  });

  it("two sessions get independent ids", async () => {
    const a = await makeEnv(address, { task_type: "navigation", map_id: 103,
                                       seed: 1, camera: { width: 1, height: 1 } });
    const b = await makeEnv(address, { task_type: "navigation", map_id: 103,
                                       seed: 1, camera: { width: 1, height: 1 } });
    expect(a.sessionId).not.toBe(b.sessionId);
    await a.close();
    await b.close();
  });

  it("surfaces server errors with their code", async () => {
    await expect(makeEnv(address, {
      task_type: "no_such_task", map_id: 103,
    })).rejects.toThrowError(ServerError);
  });

  it("masked actions are rejected with the field name", async () => {
    const env = await makeEnv(address, {
      task_type: "navigation", map_id: 103, seed: 2,
      camera: { width: 1, height: 1 },
    });
    await expect(env.step([{
      walkDir: 0, walkSpeed: 0, turnLrDelta: 0, lookUdDelta: 0,
      jump: false, pickup: false, shoot: true, reload: false,
    }])).rejects.toThrow(/shoot/);
    await env.close();
  });
});
