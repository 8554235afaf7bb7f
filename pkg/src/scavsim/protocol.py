"""Length-prefixed binary wire protocol and the sans-io session engine.

Frame layout (little-endian): length u32 (payload bytes), msg_type u8,
session_id u32, tick u32, then payload. Control and Event payloads are
UTF-8 JSON; Observation and Action payloads are packed binary. The engine
is transport-free: bytes in, frames out, so the same code path serves the
asyncio server, in-process tests, and the fuzz harness.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass

import numpy as np

from . import tasks
from .dynamics import Action, ActionRangeError
from .perception import LidarScan
from .tasks import (
    EpisodeFinishedError,
    MaskedActionError,
    Observation,
    TaskSpec,
    TaskValidationError,
)

MSG_CONTROL = 1
MSG_OBSERVATION = 2
MSG_ACTION = 3
MSG_EVENT = 4
MSG_ERROR = 5
_KNOWN_TYPES = (MSG_CONTROL, MSG_OBSERVATION, MSG_ACTION, MSG_EVENT,
                MSG_ERROR)

HEADER = struct.Struct("<IBII")
HEADER_SIZE = HEADER.size
MAX_PAYLOAD = 1 << 20

ACTION_RECORD = struct.Struct("<IfBffB8x")  # fixed 26-byte action record
ACTION_SIZE = ACTION_RECORD.size

_FLAG_JUMP = 1
_FLAG_PICKUP = 2
_FLAG_SHOOT = 4
_FLAG_RELOAD = 8

_OBS_HEAD = struct.Struct("<II3f2fBBBBHHIfBBBB3fHHf")

_DEPTH_MODES = {"frustum": 0, "panorama": 1, "lidar": 2}

ERR_MALFORMED = 400
ERR_CONFLICT = 409
ERR_BACKPRESSURE = 429
ERR_BUSY = 503

SESSION_QUEUE_LIMIT = 4


class ProtocolError(Exception):
    def __init__(self, code: int, message: str, expected_tick: int | None = None):
        self.code = code
        self.message = message
        self.expected_tick = expected_tick
        super().__init__(f"[{code}] {message}")


@dataclass(frozen=True)
class Frame:
    msg_type: int
    session_id: int
    tick: int
    payload: bytes


def encode_frame(msg_type: int, session_id: int, tick: int,
                 payload: bytes) -> bytes:
    return HEADER.pack(len(payload), msg_type, session_id, tick) + payload


class FrameParser:
    """Incremental stream decoder; raises ProtocolError on a bad frame."""

    def __init__(self):
        self._buf = bytearray()

    def feed(self, data: bytes) -> list[Frame]:
        self._buf.extend(data)
        frames = []
        while True:
            if len(self._buf) < HEADER_SIZE:
                break
            length, msg_type, session_id, tick = HEADER.unpack_from(self._buf)
            if length > MAX_PAYLOAD:
                raise ProtocolError(ERR_MALFORMED,
                                    f"payload length {length} exceeds "
                                    f"{MAX_PAYLOAD}")
            if msg_type not in _KNOWN_TYPES:
                raise ProtocolError(ERR_MALFORMED,
                                    f"unknown msg_type {msg_type}")
            if len(self._buf) < HEADER_SIZE + length:
                break
            payload = bytes(self._buf[HEADER_SIZE:HEADER_SIZE + length])
            del self._buf[:HEADER_SIZE + length]
            frames.append(Frame(msg_type, session_id, tick, payload))
        return frames


# ---------------------------------------------------------------------------
# action payload
# ---------------------------------------------------------------------------

def encode_action(agent_id: int, action: Action) -> bytes:
    flags = ((_FLAG_JUMP if action.jump else 0)
             | (_FLAG_PICKUP if action.pickup else 0)
             | (_FLAG_SHOOT if action.shoot else 0)
             | (_FLAG_RELOAD if action.reload else 0))
    return ACTION_RECORD.pack(agent_id, action.walk_dir, action.walk_speed,
                              action.turn_lr_delta, action.look_ud_delta,
                              flags)


def decode_action(payload: bytes) -> tuple[int, Action]:
    if len(payload) != ACTION_SIZE:
        raise ProtocolError(ERR_MALFORMED,
                            f"action payload must be {ACTION_SIZE} bytes, "
                            f"got {len(payload)}")
    agent_id, walk_dir, walk_speed, turn, look, flags = \
        ACTION_RECORD.unpack(payload)
    return agent_id, Action(
        walk_dir=walk_dir, walk_speed=walk_speed,
        turn_lr_delta=turn, look_ud_delta=look,
        jump=bool(flags & _FLAG_JUMP), pickup=bool(flags & _FLAG_PICKUP),
        shoot=bool(flags & _FLAG_SHOOT), reload=bool(flags & _FLAG_RELOAD))


# ---------------------------------------------------------------------------
# observation payload
# ---------------------------------------------------------------------------

def encode_observation(obs: Observation, reward: int, done: bool,
                       success: bool) -> bytes:
    if isinstance(obs.depth, LidarScan):
        mode = _DEPTH_MODES["lidar"]
        values = np.asarray(obs.depth.ranges, dtype="<f4").reshape(1, -1)
        max_range = float(values.max(initial=0.0))
    else:
        mode = _DEPTH_MODES[obs.depth.camera.mode]
        values = np.asarray(obs.depth.values, dtype="<f4")
        max_range = obs.depth.camera.max_range
    h, w = values.shape
    target = obs.target_location or (0.0, 0.0, 0.0)
    head = _OBS_HEAD.pack(
        obs.agent_id, obs.step,
        obs.position[0], obs.position[1], obs.position[2],
        obs.yaw, obs.pitch,
        0 if obs.motion_state == "on_ground" else 1,
        1 if obs.alive else 0,
        obs.health, 0,
        obs.clip_ammo, obs.spare_ammo,
        obs.supplies, float(reward),
        1 if done else 0, 1 if success else 0,
        1 if obs.target_location is not None else 0, mode,
        target[0], target[1], target[2],
        h, w, max_range)
    parts = [head, values.tobytes()]
    parts.append(struct.pack("<H", len(obs.nearby_supplies)))
    for (loc, qty) in obs.nearby_supplies:
        parts.append(struct.pack("<3fH", loc[0], loc[1], loc[2], qty))
    parts.append(struct.pack("<H", len(obs.visible_enemies)))
    for (aid, loc) in obs.visible_enemies:
        parts.append(struct.pack("<I3f", aid, loc[0], loc[1], loc[2]))
    return b"".join(parts)


def decode_observation(payload: bytes) -> dict:
    try:
        vals = _OBS_HEAD.unpack_from(payload)
        (agent_id, step, px, py, pz, yaw, pitch, motion, alive, health, _pad,
         clip, spare, supplies, reward, done, success, has_target, mode,
         tx, ty, tz, h, w, max_range) = vals
        off = _OBS_HEAD.size
        depth = np.frombuffer(payload, dtype="<f4", count=h * w,
                              offset=off).reshape(h, w)
        off += 4 * h * w
        (n_supp,) = struct.unpack_from("<H", payload, off)
        off += 2
        nearby = []
        for _ in range(n_supp):
            x, y, z, qty = struct.unpack_from("<3fH", payload, off)
            off += 14
            nearby.append(((x, y, z), qty))
        (n_enemy,) = struct.unpack_from("<H", payload, off)
        off += 2
        enemies = []
        for _ in range(n_enemy):
            aid, x, y, z = struct.unpack_from("<I3f", payload, off)
            off += 16
            enemies.append((aid, (x, y, z)))
    except struct.error as err:
        raise ProtocolError(ERR_MALFORMED,
                            f"bad observation payload: {err}") from err
    return {
        "agent_id": agent_id, "step": step,
        "position": (px, py, pz), "yaw": yaw, "pitch": pitch,
        "motion_state": "on_ground" if motion == 0 else "in_air",
        "alive": bool(alive), "health": health,
        "clip_ammo": clip, "spare_ammo": spare, "supplies": supplies,
        "reward": reward, "done": bool(done), "success": bool(success),
        "target_location": (tx, ty, tz) if has_target else None,
        "depth_mode": mode, "depth": depth, "max_range": max_range,
        "nearby_supplies": nearby, "visible_enemies": enemies,
    }


def _event_json(event) -> dict:
    from .combat import DropEvent, HitEvent
    if isinstance(event, HitEvent):
        return {"event": "hit", "shooter_id": event.shooter_id,
                "target_id": event.target_id, "damage": event.damage,
                "lethal": event.lethal, "tick": event.tick}
    if isinstance(event, DropEvent):
        return {"event": "drop", "dead_agent_id": event.dead_agent_id,
                "dropped_quantity": event.dropped_quantity,
                "drop_location": list(event.drop_location)}
    name, *rest = event
    return {"event": name, "args": list(rest)}


# ---------------------------------------------------------------------------
# sans-io session engine
# ---------------------------------------------------------------------------

class _Session:
    def __init__(self, session_id: int, spec: TaskSpec, world):
        self.session_id = session_id
        self.spec = spec
        self.world = world
        self.reset_count = 0
        self.state = None
        self.pending: dict[int, Action] = {}
        self.closed = False

    def reset(self, seed: int | None = None):
        eff_seed = (seed if seed is not None
                    else self.spec.seed + self.reset_count)
        spec = TaskSpec(**{**self.spec.__dict__, "seed": eff_seed})
        self.state, observations = tasks.reset(spec, self.world)
        self.reset_count += 1
        self.pending = {}
        return observations


class ServerEngine:
    """Protocol logic with no transport: frames in, encoded frames out."""

    def __init__(self, map_provider, max_sessions: int = 64):
        self._map_provider = map_provider
        self._max_sessions = max_sessions
        self._sessions: dict[int, _Session] = {}
        self._next_id = 1

    @property
    def session_count(self) -> int:
        return len(self._sessions)

    def _error(self, session_id: int, tick: int, code: int, message: str,
               expected_tick: int | None = None) -> bytes:
        body = {"code": code, "message": message}
        if expected_tick is not None:
            body["expected_tick"] = expected_tick
        return encode_frame(MSG_ERROR, session_id, tick,
                            json.dumps(body).encode())

    def _observation_frames(self, session: _Session, observations,
                            rewards=None, done=False, success=False
                            ) -> list[bytes]:
        state = session.state
        out = []
        for i, obs in enumerate(observations):
            reward = rewards[i] if rewards else 0
            payload = encode_observation(obs, reward, done, success)
            out.append(encode_frame(MSG_OBSERVATION, session.session_id,
                                    state.tick, payload))
        return out

    def handle_frame(self, frame: Frame) -> list[bytes]:
        try:
            if frame.msg_type == MSG_CONTROL:
                return self._handle_control(frame)
            if frame.msg_type == MSG_ACTION:
                return self._handle_action(frame)
            return [self._error(frame.session_id, frame.tick, ERR_MALFORMED,
                                f"unexpected msg_type {frame.msg_type} "
                                "from client")]
        except ProtocolError as err:
            return [self._error(frame.session_id, frame.tick, err.code,
                                err.message, err.expected_tick)]

    def handle_frames(self, frames: list[Frame]) -> list[bytes]:
        """Process a burst; per-session queue beyond the limit drains as 429."""
        out = []
        per_session: dict[int, int] = {}
        for frame in frames:
            n = per_session.get(frame.session_id, 0)
            if n >= SESSION_QUEUE_LIMIT and frame.msg_type == MSG_ACTION:
                out.append(self._error(frame.session_id, frame.tick,
                                       ERR_BACKPRESSURE,
                                       "session queue limit exceeded"))
                continue
            per_session[frame.session_id] = n + 1
            out.extend(self.handle_frame(frame))
        return out

    # -- control --

    def _handle_control(self, frame: Frame) -> list[bytes]:
        try:
            body = json.loads(frame.payload.decode("utf-8"))
            if not isinstance(body, dict):
                raise ValueError("control body must be an object")
            cmd = body["cmd"]
        except (ValueError, KeyError, UnicodeDecodeError) as err:
            raise ProtocolError(ERR_MALFORMED,
                                f"bad control payload: {err}") from err

        if cmd == "create_session":
            if len(self._sessions) >= self._max_sessions:
                raise ProtocolError(ERR_BUSY, "max sessions reached")
            try:
                spec = tasks.spec_from_json(body.get("spec") or {})
            except (TaskValidationError, KeyError, TypeError,
                    ValueError) as err:
                raise ProtocolError(ERR_MALFORMED,
                                    f"bad task spec: {err}") from err
            try:
                world = self._map_provider(spec.map_id)
            except Exception as err:
                raise ProtocolError(ERR_MALFORMED,
                                    f"map {spec.map_id} unavailable: "
                                    f"{err}") from err
            session = _Session(self._next_id, spec, world)
            self._next_id += 1
            try:
                observations = session.reset()
            except TaskValidationError as err:
                raise ProtocolError(ERR_MALFORMED, str(err)) from err
            self._sessions[session.session_id] = session
            ack = encode_frame(MSG_CONTROL, session.session_id, 0,
                               json.dumps({
                                   "ok": True, "cmd": "session_created",
                                   "session_id": session.session_id,
                                   "num_agents": session.spec.agents,
                                   "max_steps": session.state.max_ticks,
                               }).encode())
            return [ack] + self._observation_frames(session, observations)

        session = self._sessions.get(frame.session_id)
        if session is None:
            raise ProtocolError(ERR_MALFORMED,
                                f"unknown session {frame.session_id}")
        if cmd == "reset":
            observations = session.reset(body.get("seed"))
            ack = encode_frame(MSG_CONTROL, session.session_id, 0,
                               json.dumps({"ok": True, "cmd": "reset",
                                           "tick": 0}).encode())
            return [ack] + self._observation_frames(session, observations)
        if cmd == "close_session":
            del self._sessions[frame.session_id]
            return [encode_frame(MSG_CONTROL, frame.session_id, frame.tick,
                                 json.dumps({"ok": True,
                                             "cmd": "closed"}).encode())]
        raise ProtocolError(ERR_MALFORMED, f"unknown control cmd {cmd!r}")

    # -- lockstep actions --

    def _handle_action(self, frame: Frame) -> list[bytes]:
        session = self._sessions.get(frame.session_id)
        if session is None:
            raise ProtocolError(ERR_MALFORMED,
                                f"unknown session {frame.session_id}")
        state = session.state
        if state.done:
            raise ProtocolError(ERR_CONFLICT, "episode finished",
                                expected_tick=state.tick)
        if frame.tick != state.tick:
            raise ProtocolError(ERR_CONFLICT,
                                f"action for tick {frame.tick}, expected "
                                f"{state.tick}", expected_tick=state.tick)
        agent_id, action = decode_action(frame.payload)
        if agent_id >= len(state.agents):
            raise ProtocolError(ERR_MALFORMED,
                                f"agent_id {agent_id} out of range")
        if agent_id in session.pending:
            raise ProtocolError(ERR_CONFLICT,
                                f"duplicate action for agent {agent_id}",
                                expected_tick=state.tick)
        session.pending[agent_id] = action
        if len(session.pending) < len(state.agents):
            return []
        actions = [session.pending[i] for i in range(len(state.agents))]
        session.pending = {}
        try:
            state, observations, rewards, done = tasks.step(state, actions)
        except (MaskedActionError, ActionRangeError) as err:
            raise ProtocolError(ERR_MALFORMED, str(err)) from err
        except EpisodeFinishedError as err:
            raise ProtocolError(ERR_CONFLICT, str(err),
                                expected_tick=state.tick) from err
        out = self._observation_frames(session, observations, rewards,
                                       done, state.success)
        for event in state.events:
            out.append(encode_frame(MSG_EVENT, session.session_id,
                                    state.tick,
                                    json.dumps(_event_json(event)).encode()))
        if done:
            out.append(encode_frame(
                MSG_EVENT, session.session_id, state.tick,
                json.dumps({"event": "episode_end",
                            "metrics": state.metrics().to_json()}).encode()))
        return out
