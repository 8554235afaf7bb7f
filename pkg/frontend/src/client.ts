/**
 * Gym-style remote environment handle over the TCP wire protocol.
 *
 * One handle drives one server session in lockstep: step() sends every
 * agent's action for the current tick and resolves once all observation
 * frames for the next tick arrive. Handles are single-consumer; open
 * several handles for parallel sessions.
 */

import * as net from "node:net";

import {
  AgentAction,
  Frame,
  FrameParser,
  MSG_ACTION,
  MSG_CONTROL,
  MSG_ERROR,
  MSG_EVENT,
  MSG_OBSERVATION,
  Observation,
  decodeObservation,
  encodeAction,
  encodeFrame,
} from "./protocol.js";

export interface EnvConfig {
  task_type: string;
  map_id: number;
  max_steps?: number | null;
  num_agents?: number | null;
  start_locations?: number[][] | null;
  target_location?: number[] | null;
  timeout?: number | null;
  camera?: Record<string, unknown>;
  weapon?: Record<string, unknown>;
  seed?: number;
}

export interface StepResult {
  observations: Observation[];
  rewards: number[];
  done: boolean;
  info: { events: unknown[]; metrics?: unknown };
}

export interface SpaceInfo {
  observation: {
    depthShape: [number, number];
    hasTarget: boolean;
    suppliesSensed: boolean;
  };
  action: {
    walkDir: [number, number];
    walkSpeed: [number, number];
    allowed: { pickup: boolean; shoot: boolean; reload: boolean };
  };
}

export class ServerError extends Error {
  constructor(public code: number, message: string,
              public expectedTick?: number) {
    super(`[${code}] ${message}`);
  }
}

class Connection {
  private parser = new FrameParser();
  private inbox: Frame[] = [];
  private waiters: Array<() => void> = [];
  private closed = false;

  constructor(private socket: net.Socket) {
    socket.on("data", (data: Buffer) => {
      this.inbox.push(...this.parser.feed(data));
      const waiters = this.waiters;
      this.waiters = [];
      for (const w of waiters) w();
    });
    socket.on("close", () => {
      this.closed = true;
      const waiters = this.waiters;
      this.waiters = [];
      for (const w of waiters) w();
    });
    socket.on("error", () => undefined); // surfaced via close
  }

  send(data: Buffer): void {
    this.socket.write(data);
  }

  async next(matcher: (f: Frame) => boolean, timeoutMs = 30_000): Promise<Frame> {
    const deadline = Date.now() + timeoutMs;
    for (;;) {
      const idx = this.inbox.findIndex(matcher);
      if (idx >= 0) return this.inbox.splice(idx, 1)[0];
      const err = this.inbox.findIndex((f) => f.msgType === MSG_ERROR);
      if (err >= 0) {
        const body = JSON.parse(this.inbox.splice(err, 1)[0].payload.toString());
        throw new ServerError(body.code, body.message, body.expected_tick);
      }
      if (this.closed) throw new Error("connection closed");
      if (Date.now() > deadline) throw new Error("timed out waiting for frame");
      await new Promise<void>((resolve) => {
        this.waiters.push(resolve);
        setTimeout(resolve, 250);
      });
    }
  }

  close(): void {
    this.socket.destroy();
  }
}

export class RemoteEnv {
  private tick = 0;
  private done = false;
  private everStepped = false;

  private constructor(private conn: Connection,
                      public readonly sessionId: number,
                      public readonly numAgents: number,
                      public readonly maxSteps: number,
                      public readonly config: EnvConfig,
                      private initialPayloads: Buffer[]) {}

  static async connect(address: string, config: EnvConfig): Promise<RemoteEnv> {
    const [host, portStr] = splitAddress(address);
    const socket = await new Promise<net.Socket>((resolve, reject) => {
      const s = net.createConnection({ host, port: Number(portStr) },
                                     () => resolve(s));
      s.on("error", reject);
    });
    const conn = new Connection(socket);
    conn.send(encodeFrame(MSG_CONTROL, 0, 0, Buffer.from(JSON.stringify({
      cmd: "create_session",
      spec: config,
    }))));
    const ack = await conn.next((f) => f.msgType === MSG_CONTROL);
    const body = JSON.parse(ack.payload.toString());
    if (!body.ok) throw new ServerError(400, "session refused");
    const raw: Array<{ id: number; payload: Buffer }> = [];
    for (let k = 0; k < body.num_agents; k++) {
      const frame = await conn.next((f) => f.msgType === MSG_OBSERVATION);
      raw.push({ id: decodeObservation(frame.payload).agentId,
                 payload: Buffer.from(frame.payload) });
    }
    raw.sort((a, b) => a.id - b.id);
    return new RemoteEnv(conn, body.session_id, body.num_agents,
                         body.max_steps, config,
                         raw.map((r) => r.payload));
  }

  /** Observation/action space metadata derived from the task config. */
  spaces(): SpaceInfo {
    const cam = (this.config.camera ?? {}) as
      { width?: number; height?: number; mode?: string };
    const width = cam.width ?? 10;
    const height = cam.mode === "lidar" ? 1 : (cam.height ?? 10);
    const task = this.config.task_type;
    const gather = task === "supply_gather_max"
      || task === "supply_gather_target" || task === "supply_battle";
    return {
      observation: {
        depthShape: [height, width],
        hasTarget: task === "navigation" || task === "target_capture"
          || task === "supply_gather_target",
        suppliesSensed: gather,
      },
      action: {
        walkDir: [0, 360],
        walkSpeed: [0, 10],
        allowed: {
          pickup: gather,
          shoot: task === "supply_battle",
          reload: task === "supply_battle",
        },
      },
    };
  }

  /** Raw serialized observations from session creation (parity testing). */
  initialRawPayloads(): Buffer[] {
    return this.initialPayloads;
  }

  /** First reset returns the session's initial observations; later calls
   *  restart the episode server-side (the seed advances per reset). */
  async reset(seed?: number): Promise<Observation[]> {
    if (!this.everStepped && seed === undefined) {
      return this.initialPayloads.map((p) => decodeObservation(p));
    }
    this.conn.send(encodeFrame(MSG_CONTROL, this.sessionId, 0,
                               Buffer.from(JSON.stringify({
                                 cmd: "reset",
                                 ...(seed !== undefined ? { seed } : {}),
                               }))));
    await this.conn.next((f) => f.msgType === MSG_CONTROL);
    const raw: Array<{ id: number; payload: Buffer }> = [];
    for (let k = 0; k < this.numAgents; k++) {
      const frame = await this.conn.next((f) => f.msgType === MSG_OBSERVATION);
      raw.push({ id: decodeObservation(frame.payload).agentId,
                 payload: Buffer.from(frame.payload) });
    }
    raw.sort((a, b) => a.id - b.id);
    this.initialPayloads = raw.map((r) => r.payload);
    this.tick = 0;
    this.done = false;
    this.everStepped = false;
    return this.initialPayloads.map((p) => decodeObservation(p));
  }

  /** Raw observation frame payloads for one step (parity testing). */
  async stepRaw(actions: AgentAction[]): Promise<Buffer[]> {
    if (this.done) throw new Error("episode finished");
    if (actions.length !== this.numAgents) {
      throw new Error(`expected ${this.numAgents} actions`);
    }
    this.everStepped = true;
    const batch = Buffer.concat(actions.map((action, agentId) =>
      encodeFrame(MSG_ACTION, this.sessionId, this.tick,
                  encodeAction(agentId, action))));
    this.conn.send(batch);
    const raw: Array<{ id: number; payload: Buffer }> = [];
    for (let k = 0; k < this.numAgents; k++) {
      const frame = await this.conn.next(
        (f) => f.msgType === MSG_OBSERVATION && f.sessionId === this.sessionId);
      raw.push({ id: decodeObservation(frame.payload).agentId,
                 payload: Buffer.from(frame.payload) });
    }
    raw.sort((a, b) => a.id - b.id);
    this.tick += 1;
    if (raw.some((r) => decodeObservation(r.payload).done)) {
      this.done = true;
    }
    return raw.map((r) => r.payload);
  }

  async step(actions: AgentAction[]): Promise<StepResult> {
    const payloads = await this.stepRaw(actions);
    const observations = payloads.map((p) => decodeObservation(p));
    const rewards = observations.map((o) => o.reward);
    const done = observations.some((o) => o.done);
    const info: StepResult["info"] = { events: [] };
    if (done) {
      // drain events until episode_end delivers the metrics
      for (;;) {
        const event = await this.conn.next((f) => f.msgType === MSG_EVENT);
        const body = JSON.parse(event.payload.toString());
        if (body.event === "episode_end") {
          info.metrics = body.metrics;
          break;
        }
        info.events.push(body);
      }
    }
    return { observations, rewards, done, info };
  }

  async close(): Promise<void> {
    try {
      this.conn.send(encodeFrame(MSG_CONTROL, this.sessionId, 0,
                                 Buffer.from(JSON.stringify({
                                   cmd: "close_session",
                                 }))));
      await this.conn.next((f) => f.msgType === MSG_CONTROL, 2000);
    } catch {
      // closing is best-effort
    }
    this.conn.close();
  }
}

export function makeEnv(address: string, envConfig: EnvConfig): Promise<RemoteEnv> {
  return RemoteEnv.connect(address, envConfig);
}

function splitAddress(address: string): [string, string] {
  const idx = address.lastIndexOf(":");
  if (idx < 0) return ["127.0.0.1", address];
  return [address.slice(0, idx) || "127.0.0.1", address.slice(idx + 1)];
}
