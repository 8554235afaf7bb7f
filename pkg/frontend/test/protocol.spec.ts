import { describe, expect, it } from "vitest";

import {
  AgentAction,
  FrameParser,
  MSG_ACTION,
  MSG_CONTROL,
  decodeAction,
  encodeAction,
  encodeFrame,
} from "../src/protocol.js";

/** Deterministic 32-bit LCG so the 1e4-sample sweep is reproducible. */
function lcg(seed: number): () => number {
  let state = seed >>> 0;
  return () => {
    state = (Math.imul(state, 1664525) + 1013904223) >>> 0;
    return state / 0x100000000;
  };
}

describe("frame codec", () => {
  it("round-trips a frame", () => {
    const parser = new FrameParser();
    const payload = Buffer.from("hello");
    const frames = parser.feed(encodeFrame(MSG_CONTROL, 7, 42, payload));
    expect(frames).toHaveLength(1);
    expect(frames[0].msgType).toBe(MSG_CONTROL);
    expect(frames[0].sessionId).toBe(7);
    expect(frames[0].tick).toBe(42);
    expect(frames[0].payload.equals(payload)).toBe(true);
  });

  it("reassembles frames split across feeds", () => {
    const parser = new FrameParser();
    const data = encodeFrame(MSG_ACTION, 1, 2, Buffer.alloc(26));
    expect(parser.feed(data.subarray(0, 9))).toHaveLength(0);
    expect(parser.feed(data.subarray(9, 20))).toHaveLength(0);
    expect(parser.feed(data.subarray(20))).toHaveLength(1);
  });

  it("rejects oversized payload lengths", () => {
    const bad = Buffer.alloc(13);
    bad.writeUInt32LE(2 << 20, 0);
    bad.writeUInt8(MSG_CONTROL, 4);
    expect(() => new FrameParser().feed(bad)).toThrow(/exceeds/);
  });
});

describe("action record codec", () => {
  it("is exactly 26 bytes", () => {
    expect(encodeAction(0, {
      walkDir: 0, walkSpeed: 0, turnLrDelta: 0, lookUdDelta: 0,
      jump: false, pickup: false, shoot: false, reload: false,
    })).toHaveLength(26);
  });

  it("encode/decode identity over 10000 random in-range actions", () => {
    const rand = lcg(0xC0FFEE);
    for (let k = 0; k < 10_000; k++) {
      const action: AgentAction = {
        walkDir: Math.fround(rand() * 360),
        walkSpeed: Math.floor(rand() * 11),
        turnLrDelta: Math.fround((rand() - 0.5) * 2e6),
        lookUdDelta: Math.fround((rand() - 0.5) * 720),
        jump: rand() < 0.5,
        pickup: rand() < 0.5,
        shoot: rand() < 0.5,
        reload: rand() < 0.5,
      };
      const agentId = Math.floor(rand() * 0x7fffffff);
      const decoded = decodeAction(encodeAction(agentId, action));
      expect(decoded.agentId).toBe(agentId);
      expect(decoded.action).toEqual(action);
    }
  });
});
