/**
 * Binary wire protocol codec (little-endian), mirroring the server layout:
 * frame header = length u32, msg_type u8, session_id u32, tick u32;
 * Action payloads are fixed 26-byte records, Observation payloads are
 * packed binary, Control/Event/Error payloads are UTF-8 JSON.
 */

export const MSG_CONTROL = 1;
export const MSG_OBSERVATION = 2;
export const MSG_ACTION = 3;
export const MSG_EVENT = 4;
export const MSG_ERROR = 5;

export const HEADER_SIZE = 13;
export const ACTION_SIZE = 26;
export const MAX_PAYLOAD = 1 << 20;

const FLAG_JUMP = 1;
const FLAG_PICKUP = 2;
const FLAG_SHOOT = 4;
const FLAG_RELOAD = 8;

export interface Frame {
  msgType: number;
  sessionId: number;
  tick: number;
  payload: Buffer;
}

export interface AgentAction {
  walkDir: number;      // degrees [0, 360]
  walkSpeed: number;    // integer m/s [0, 10]
  turnLrDelta: number;
  lookUdDelta: number;
  jump: boolean;
  pickup: boolean;
  shoot: boolean;
  reload: boolean;
}

export function noopAction(): AgentAction {
  return {
    walkDir: 0, walkSpeed: 0, turnLrDelta: 0, lookUdDelta: 0,
    jump: false, pickup: false, shoot: false, reload: false,
  };
}

export interface Observation {
  agentId: number;
  step: number;
  position: [number, number, number];
  yaw: number;
  pitch: number;
  motionState: "on_ground" | "in_air";
  alive: boolean;
  health: number;
  clipAmmo: number;
  spareAmmo: number;
  supplies: number;
  reward: number;
  done: boolean;
  success: boolean;
  targetLocation: [number, number, number] | null;
  depthMode: "frustum" | "panorama" | "lidar";
  depth: Float32Array;
  depthShape: [number, number];
  maxRange: number;
  nearbySupplies: Array<{ location: [number, number, number]; quantity: number }>;
  visibleEnemies: Array<{ agentId: number; position: [number, number, number] }>;
}

export function encodeFrame(msgType: number, sessionId: number, tick: number,
                            payload: Buffer): Buffer {
  const out = Buffer.alloc(HEADER_SIZE + payload.length);
  out.writeUInt32LE(payload.length, 0);
  out.writeUInt8(msgType, 4);
  out.writeUInt32LE(sessionId, 5);
  out.writeUInt32LE(tick, 9);
  payload.copy(out, HEADER_SIZE);
  return out;
}

/** Incremental frame decoder over a byte stream. */
export class FrameParser {
  private buf: Buffer<ArrayBufferLike> = Buffer.alloc(0);

  feed(data: Buffer): Frame[] {
    this.buf = this.buf.length ? Buffer.concat([this.buf, data]) : data;
    const frames: Frame[] = [];
    for (;;) {
      if (this.buf.length < HEADER_SIZE) break;
      const length = this.buf.readUInt32LE(0);
      if (length > MAX_PAYLOAD) {
        throw new Error(`payload length ${length} exceeds ${MAX_PAYLOAD}`);
      }
      if (this.buf.length < HEADER_SIZE + length) break;
      frames.push({
        msgType: this.buf.readUInt8(4),
        sessionId: this.buf.readUInt32LE(5),
        tick: this.buf.readUInt32LE(9),
        payload: this.buf.subarray(HEADER_SIZE, HEADER_SIZE + length),
      });
      this.buf = this.buf.subarray(HEADER_SIZE + length);
    }
    return frames;
  }
}

export function encodeAction(agentId: number, action: AgentAction): Buffer {
  const out = Buffer.alloc(ACTION_SIZE);
  out.writeUInt32LE(agentId >>> 0, 0);
  out.writeFloatLE(Math.fround(action.walkDir), 4);
  out.writeUInt8(action.walkSpeed & 0xff, 8);
  out.writeFloatLE(Math.fround(action.turnLrDelta), 9);
  out.writeFloatLE(Math.fround(action.lookUdDelta), 13);
  const flags = (action.jump ? FLAG_JUMP : 0)
    | (action.pickup ? FLAG_PICKUP : 0)
    | (action.shoot ? FLAG_SHOOT : 0)
    | (action.reload ? FLAG_RELOAD : 0);
  out.writeUInt8(flags, 17);
  return out;
}

export function decodeAction(payload: Buffer): { agentId: number; action: AgentAction } {
  if (payload.length !== ACTION_SIZE) {
    throw new Error(`action payload must be ${ACTION_SIZE} bytes`);
  }
  const flags = payload.readUInt8(17);
  return {
    agentId: payload.readUInt32LE(0),
    action: {
      walkDir: payload.readFloatLE(4),
      walkSpeed: payload.readUInt8(8),
      turnLrDelta: payload.readFloatLE(9),
      lookUdDelta: payload.readFloatLE(13),
      jump: (flags & FLAG_JUMP) !== 0,
      pickup: (flags & FLAG_PICKUP) !== 0,
      shoot: (flags & FLAG_SHOOT) !== 0,
      reload: (flags & FLAG_RELOAD) !== 0,
    },
  };
}

const OBS_HEAD_SIZE = 68;
const DEPTH_MODES = ["frustum", "panorama", "lidar"] as const;

export function decodeObservation(payload: Buffer): Observation {
  if (payload.length < OBS_HEAD_SIZE) {
    throw new Error("observation payload truncated");
  }
  const v = new DataView(payload.buffer, payload.byteOffset, payload.length);
  const h = v.getUint16(60, true);
  const w = v.getUint16(62, true);
  let off = OBS_HEAD_SIZE;
  const depth = new Float32Array(h * w);
  for (let k = 0; k < h * w; k++) {
    depth[k] = v.getFloat32(off, true);
    off += 4;
  }
  const nSupplies = v.getUint16(off, true);
  off += 2;
  const nearbySupplies = [];
  for (let k = 0; k < nSupplies; k++) {
    nearbySupplies.push({
      location: [v.getFloat32(off, true), v.getFloat32(off + 4, true),
                 v.getFloat32(off + 8, true)] as [number, number, number],
      quantity: v.getUint16(off + 12, true),
    });
    off += 14;
  }
  const nEnemies = v.getUint16(off, true);
  off += 2;
  const visibleEnemies = [];
  for (let k = 0; k < nEnemies; k++) {
    visibleEnemies.push({
      agentId: v.getUint32(off, true),
      position: [v.getFloat32(off + 4, true), v.getFloat32(off + 8, true),
                 v.getFloat32(off + 12, true)] as [number, number, number],
    });
    off += 16;
  }
  const hasTarget = v.getUint8(46) !== 0;
  return {
    agentId: v.getUint32(0, true),
    step: v.getUint32(4, true),
    position: [v.getFloat32(8, true), v.getFloat32(12, true),
               v.getFloat32(16, true)],
    yaw: v.getFloat32(20, true),
    pitch: v.getFloat32(24, true),
    motionState: v.getUint8(28) === 0 ? "on_ground" : "in_air",
    alive: v.getUint8(29) !== 0,
    health: v.getUint8(30),
    clipAmmo: v.getUint16(32, true),
    spareAmmo: v.getUint16(34, true),
    supplies: v.getUint32(36, true),
    reward: v.getFloat32(40, true),
    done: v.getUint8(44) !== 0,
    success: v.getUint8(45) !== 0,
    targetLocation: hasTarget
      ? [v.getFloat32(48, true), v.getFloat32(52, true),
         v.getFloat32(56, true)]
      : null,
    depthMode: DEPTH_MODES[v.getUint8(47)] ?? "frustum",
    depth,
    depthShape: [h, w],
    maxRange: v.getFloat32(64, true),
    nearbySupplies,
    visibleEnemies,
  };
}
