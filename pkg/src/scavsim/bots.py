"""Deterministic scripted baseline agents.

The bots know nothing of the map beyond what their observations reveal:
they accumulate a 600x600x4 occupancy matrix (1 m cells, one layer per
3 m storey) from depth/LIDAR rays, plan A* routes over it treating
unknown space optimistically, jump at borderline obstacles, retreat to
checkpoints when stuck, and in combat snap-aim at the nearest visible
enemy.
"""

from __future__ import annotations

import heapq
import math
from collections import deque
from dataclasses import dataclass, field

import numpy as np
from numba import njit

from .dynamics import Action
from .perception import LidarScan
from .tasks import EpisodeState, Observation

GRID_N = 600
GRID_ORIGIN = -300.0
GRID_STOREYS = 4
UNKNOWN, FREE, BLOCKED = 0, 1, 2

_SQRT2 = math.sqrt(2.0)


@dataclass(frozen=True)
class BotConfig:
    checkpoint_interval: int = 15
    stuck_window: int = 20
    stuck_distance: float = 1.0
    reload_threshold: int = 5
    aim_tolerance_deg: float = 2.0
    jump_lookahead: float = 1.5
    slope_limit_deg: float = 40.0
    replan_interval: int = 10
    unknown_cost: float = 1.25
    recovery_ticks: int = 12


class OccupancyGrid:
    def __init__(self):
        self.cells = np.zeros((GRID_N, GRID_N, GRID_STOREYS), dtype=np.uint8)
        self.ramp = np.zeros((GRID_N, GRID_N, GRID_STOREYS), dtype=bool)
        self.version = 0

    @staticmethod
    def cell_of(x: float, z: float) -> tuple[int, int]:
        i = int(math.floor(x - GRID_ORIGIN))
        j = int(math.floor(z - GRID_ORIGIN))
        return (min(max(i, 0), GRID_N - 1), min(max(j, 0), GRID_N - 1))

    @staticmethod
    def storey_of(y: float) -> int:
        return min(max(int(math.floor(y / 3.0)), 0), GRID_STOREYS - 1)

    def mark(self, i: int, j: int, s: int, value: int) -> None:
        if value == BLOCKED or self.cells[i, j, s] == UNKNOWN:
            if self.cells[i, j, s] != value:
                self.version += 1
            self.cells[i, j, s] = value

    def mark_ramp(self, i: int, j: int, s: int) -> None:
        self.ramp[i, j, s] = True


@dataclass
class BotMemory:
    config: BotConfig = field(default_factory=BotConfig)
    grid: OccupancyGrid = field(default_factory=OccupancyGrid)
    checkpoints: list[tuple[float, float]] = field(default_factory=list)
    visited_route: list[tuple[int, int, int]] = field(default_factory=list)
    recent: deque = field(default_factory=lambda: deque(maxlen=32))
    known_supplies: dict = field(default_factory=dict)
    path: list[tuple[int, int]] = field(default_factory=list)
    path_goal: tuple[int, int] | None = None
    path_version: int = -1
    path_tick: int = -10**9
    recovery_until: int = -1
    recovery_point: tuple[float, float] | None = None
    last_command: tuple[float, int] | None = None
    last_position: tuple[float, float] | None = None
    last_storey: int = 0


# ---------------------------------------------------------------------------
# perception -> occupancy
# ---------------------------------------------------------------------------

def slope_passable(depth_column: list[float], pose,
                   elevations: list[float] | None = None,
                   max_range: float = 100.0,
                   limit_deg: float = 40.0) -> bool:
    """True iff the surface sampled by a vertical ray column is walkable.

    Consecutive hit points give local inclination; anything steeper than
    the ramp limit counts as an obstacle. Fewer than two valid samples is
    conservative: not passable.
    """
    if elevations is None:
        n = len(depth_column)
        elevations = [pose.pitch + 35.0 * (0.5 - (k + 0.5) / n)
                      for k in range(n)]
    pts = []
    for d, el in zip(depth_column, elevations):
        if d >= max_range * 0.999:
            continue
        rad = math.radians(el)
        pts.append((d * math.cos(rad), d * math.sin(rad)))
    if len(pts) < 2:
        return False
    limit = math.tan(math.radians(limit_deg))
    for (h0, y0), (h1, y1) in zip(pts, pts[1:]):
        dh = abs(h1 - h0)
        dy = abs(y1 - y0)
        if dy > limit * max(dh, 1e-6):
            return False
    return True


@njit(cache=True)
def _mark_rays(cells, ramp, px, pz, py, eye_y, agent_storey,
               ds, els, azs, passable, max_range):
    """March every ray's horizontal projection into the grid. Returns the
    number of cell changes so planners know when to invalidate paths."""
    changed = 0
    n = ds.shape[0]
    for k in range(n):
        d = ds[k]
        hit = d < max_range * 0.999
        rad_el = els[k] * (np.pi / 180.0)
        rad_az = azs[k] * (np.pi / 180.0)
        horiz = d * np.cos(rad_el)
        hy = eye_y + d * np.sin(rad_el)
        hx = px + np.cos(rad_az) * horiz
        hz = pz + np.sin(rad_az) * horiz
        steps = max(1, int(np.hypot(hx - px, hz - pz) / 0.9))
        li = -1
        lj = -1
        for m in range(steps + 1):
            t = m / steps
            i = int(np.floor(px + (hx - px) * t - GRID_ORIGIN))
            j = int(np.floor(pz + (hz - pz) * t - GRID_ORIGIN))
            i = min(max(i, 0), GRID_N - 1)
            j = min(max(j, 0), GRID_N - 1)
            if i == li and j == lj:
                continue
            li, lj = i, j
            last = m == steps
            if not last or not hit:
                if cells[i, j, agent_storey] == UNKNOWN:
                    cells[i, j, agent_storey] = FREE
                    changed += 1
            elif hy < -0.45:
                # flat-looking surface at water level: lake, keep out
                if cells[i, j, agent_storey] != BLOCKED:
                    cells[i, j, agent_storey] = BLOCKED
                    changed += 1
            elif passable[k]:
                s = min(max(int(np.floor(hy / 3.0)), 0), GRID_STOREYS - 1)
                if cells[i, j, s] == UNKNOWN:
                    cells[i, j, s] = FREE
                    changed += 1
                if abs(hy - (s + 1) * 3.0) < 1.2 and s + 1 < GRID_STOREYS:
                    ramp[i, j, s] = True
            else:
                s = min(max(int(np.floor(hy / 3.0)), 0), GRID_STOREYS - 1)
                if cells[i, j, s] != BLOCKED:
                    cells[i, j, s] = BLOCKED
                    changed += 1
                if py - 0.5 <= hy <= py + 2.3 and \
                        cells[i, j, agent_storey] != BLOCKED:
                    cells[i, j, agent_storey] = BLOCKED
                    changed += 1
    return changed


def update_occupancy(grid: OccupancyGrid, observation: Observation,
                     config: BotConfig = BotConfig()) -> OccupancyGrid:
    """Fold one observation's rays into the occupancy matrix."""
    px, py, pz = observation.position
    eye_y = py + 1.6
    agent_storey = OccupancyGrid.storey_of(py + 0.5)
    depth = observation.depth

    if isinstance(depth, LidarScan):
        ds = np.asarray(depth.ranges, dtype=np.float64)
        els = np.zeros(len(ds))
        azs = np.asarray(depth.beam_azimuths, dtype=np.float64)
        passable = np.zeros(len(ds), dtype=np.bool_)  # single sample: conservative
        max_range = depth.max_range
    else:
        cam = depth.camera
        vals = depth.values
        max_range = cam.max_range
        if cam.mode == "panorama":
            col_az = observation.yaw + 360.0 * (
                np.arange(cam.width) + 0.5) / cam.width
        else:
            # treat frustum columns as approximately angular
            col_az = observation.yaw + cam.horizontal_fov * (
                (np.arange(cam.width) + 0.5) / cam.width - 0.5)
        row_el = observation.pitch + cam.vertical_fov * (
            0.5 - (np.arange(cam.height) + 0.5) / cam.height)
        col_pass = np.array([
            slope_passable([float(vals[r, c]) for r in range(cam.height)],
                           None, list(row_el), max_range,
                           config.slope_limit_deg)
            for c in range(cam.width)])
        ds = vals.T.reshape(-1).astype(np.float64)
        els = np.tile(row_el, cam.width)
        azs = np.repeat(col_az, cam.height)
        passable = np.repeat(col_pass, cam.height)

    changed = _mark_rays(grid.cells, grid.ramp, px, pz, py, eye_y,
                         agent_storey, ds, els, azs, passable, max_range)
    grid.version += int(changed)
    return grid


# ---------------------------------------------------------------------------
# planning
# ---------------------------------------------------------------------------

def plan_path(grid: OccupancyGrid, start: tuple[int, int], storey: int,
              goal: tuple[int, int], config: BotConfig,
              max_expansions: int = 30_000) -> list[tuple[int, int]]:
    """A* on one storey slice; unknown cells cost a little extra.

    The goal counts as reached from any adjacent cell, so a blocked mark
    sitting exactly on the goal cannot strand the search.
    """
    cells = grid.cells[:, :, storey]
    si, sj = start
    gi, gj = goal
    lo_i = max(0, min(si, gi) - 50)
    hi_i = min(GRID_N, max(si, gi) + 50)
    lo_j = max(0, min(sj, gj) - 50)
    hi_j = min(GRID_N, max(sj, gj) + 50)

    def heuristic(i, j):
        di, dj = abs(i - gi), abs(j - gj)
        return (di + dj) + (_SQRT2 - 2.0) * min(di, dj)

    open_heap = [(heuristic(si, sj), 0, (si, sj))]
    g_score = {(si, sj): 0.0}
    came: dict = {}
    counter = 0
    expanded = 0
    while open_heap and expanded < max_expansions:
        _, _, cur = heapq.heappop(open_heap)
        if max(abs(cur[0] - gi), abs(cur[1] - gj)) <= 1:
            path = [cur]
            while cur in came:
                cur = came[cur]
                path.append(cur)
            return path[::-1]
        expanded += 1
        ci, cj = cur
        base = g_score[cur]
        for di in (-1, 0, 1):
            for dj in (-1, 0, 1):
                if di == 0 and dj == 0:
                    continue
                ni, nj = ci + di, cj + dj
                if not (lo_i <= ni < hi_i and lo_j <= nj < hi_j):
                    continue
                val = cells[ni, nj]
                if val == BLOCKED:
                    continue
                if di != 0 and dj != 0:
                    # no corner cutting past blocked cells
                    if cells[ci + di, cj] == BLOCKED or \
                            cells[ci, cj + dj] == BLOCKED:
                        continue
                step = _SQRT2 if (di != 0 and dj != 0) else 1.0
                if val == UNKNOWN:
                    step *= config.unknown_cost
                ng = base + step
                key = (ni, nj)
                if ng < g_score.get(key, 1e18):
                    g_score[key] = ng
                    came[key] = cur
                    counter += 1
                    heapq.heappush(open_heap,
                                   (ng + heuristic(ni, nj), counter, key))
    return []


def _wrap_angle(deg: float) -> float:
    return (deg + 180.0) % 360.0 - 180.0


def _cell_center(i: int, j: int) -> tuple[float, float]:
    return GRID_ORIGIN + i + 0.5, GRID_ORIGIN + j + 0.5


@dataclass
class _Drive:
    walk_dir: float = 0.0
    walk_speed: int = 0
    jump: bool = False


def _path_blocked(grid: OccupancyGrid, path, storey: int) -> bool:
    cells = grid.cells[:, :, storey]
    for (i, j) in path[:15]:
        if cells[i, j] == BLOCKED:
            return True
    return False


def _drive_along_path(memory: BotMemory, observation: Observation,
                      target_xz: tuple[float, float],
                      state: EpisodeState) -> _Drive:
    """Plan (or reuse) a path to the target and produce a move command."""
    config = memory.config
    grid = memory.grid
    px, py, pz = observation.position
    tick = observation.step
    storey = OccupancyGrid.storey_of(py + 0.5)
    start = OccupancyGrid.cell_of(px, pz)
    goal = OccupancyGrid.cell_of(*target_xz)

    def prune_path():
        # pure pursuit: advance to the farthest path cell within reach so
        # a 3 m stride never leaves stale cells steering us backwards
        best = -1
        for idx, cell in enumerate(memory.path[:12]):
            cx, cz = _cell_center(*cell)
            if math.hypot(cx - px, cz - pz) <= 3.5:
                best = idx
        if best >= 0:
            del memory.path[:best]
            cx, cz = _cell_center(*memory.path[0])
            if math.hypot(cx - px, cz - pz) < 1.0 and len(memory.path) > 1:
                memory.path.pop(0)

    prune_path()
    stale = (not memory.path
             or memory.path_goal != goal
             or _path_blocked(grid, memory.path, storey)
             or (memory.path_version != grid.version
                 and tick - memory.path_tick >= config.replan_interval))
    if stale:
        memory.path = plan_path(grid, start, storey, goal, config)
        memory.path_goal = goal
        memory.path_version = grid.version
        memory.path_tick = tick
        prune_path()

    dist_target = math.hypot(target_xz[0] - px, target_xz[1] - pz)
    if dist_target <= 4.5 or not memory.path:
        waypoint = target_xz
    else:
        waypoint = _cell_center(*memory.path[0])

    dx = waypoint[0] - px
    dz = waypoint[1] - pz
    bearing = math.degrees(math.atan2(dz, dx)) % 360.0

    dt = state.params.dt
    speed = 10
    if dist_target < 10 * dt * 1.2:
        # taper on final approach so the capture radius is not overshot
        speed = max(1, min(10, int(dist_target / dt)))

    # jump when a blocked cell sits directly ahead
    jump = False
    ahead = OccupancyGrid.cell_of(px + math.cos(math.radians(bearing))
                                  * config.jump_lookahead,
                                  pz + math.sin(math.radians(bearing))
                                  * config.jump_lookahead)
    if grid.cells[ahead[0], ahead[1], storey] == BLOCKED:
        jump = True
    return _Drive(bearing, speed, jump)


def _progress_bookkeeping(memory: BotMemory, observation: Observation,
                          state: EpisodeState) -> None:
    config = memory.config
    px, _, pz = observation.position
    tick = observation.step
    memory.recent.append((tick, px, pz))
    if tick % config.checkpoint_interval == 0:
        memory.checkpoints.append((px, pz))

    storey = OccupancyGrid.storey_of(observation.position[1] + 0.5)

    # collision feedback: commanded a fast move but barely displaced;
    # something unseen (lake edge, glancing wall) sits in front
    if memory.last_command is not None and memory.last_position is not None:
        bearing, speed = memory.last_command
        lx, lz = memory.last_position
        moved = math.hypot(px - lx, pz - lz)
        if speed >= 3 and moved < 0.12:
            own = OccupancyGrid.cell_of(px, pz)
            bi, bj = OccupancyGrid.cell_of(
                px + math.cos(math.radians(bearing)) * 1.2,
                pz + math.sin(math.radians(bearing)) * 1.2)
            if (bi, bj) != own:
                memory.grid.mark(bi, bj, storey, BLOCKED)
    memory.last_position = (px, pz)

    # the cell being stood on is walkable whatever rays suggested
    oi, oj = OccupancyGrid.cell_of(px, pz)
    if memory.grid.cells[oi, oj, storey] == BLOCKED:
        memory.grid.cells[oi, oj, storey] = FREE
        memory.grid.version += 1

    if memory.recovery_until >= tick and memory.recovery_point is not None:
        if math.hypot(memory.recovery_point[0] - px,
                      memory.recovery_point[1] - pz) < 2.0:
            memory.recovery_until = tick - 1  # arrived; resume the task
            memory.path = []

    # stuck: no net displacement over the window -> back to a checkpoint
    if memory.recovery_until < tick and len(memory.recent) >= 2:
        old = None
        for (t, x, z) in memory.recent:
            if tick - t >= config.stuck_window:
                old = (t, x, z)
        if old is not None:
            moved = math.hypot(px - old[1], pz - old[2])
            if moved < config.stuck_distance:
                # pick the most recent checkpoint that is actually away
                # from the stuck spot, dropping nearer ones
                point = None
                while memory.checkpoints:
                    cand = memory.checkpoints[-1]
                    if math.hypot(cand[0] - px, cand[1] - pz) >= 5.0:
                        point = cand
                        break
                    memory.checkpoints.pop()
                if point is None:
                    ang = (37.0 * tick) % 360.0  # nowhere recorded: sidestep
                    point = (px + 8.0 * math.cos(math.radians(ang)),
                             pz + 8.0 * math.sin(math.radians(ang)))
                memory.recovery_point = point
                memory.recovery_until = tick + config.recovery_ticks
                memory.path = []
                memory.recent.clear()

    # upstairs route memory for later backtracking
    cell = OccupancyGrid.cell_of(px, pz)
    if storey > memory.last_storey:
        memory.visited_route.append((*cell, memory.last_storey))
    elif storey < memory.last_storey and memory.visited_route:
        memory.visited_route = [c for c in memory.visited_route
                                if c[2] < storey]
    memory.last_storey = storey


def _finish(memory: BotMemory, observation: Observation, drive: _Drive,
            pickup: bool = False, shoot: bool = False, reload: bool = False,
            aim: tuple[float, float] | None = None) -> Action:
    if aim is not None:
        turn = _wrap_angle(aim[0] - observation.yaw)
        look = aim[1] - observation.pitch
    else:
        turn = _wrap_angle(drive.walk_dir - observation.yaw)
        look = _wrap_angle(-10.0 - observation.pitch) * 0.5
    memory.last_command = (drive.walk_dir, drive.walk_speed)
    return Action(walk_dir=drive.walk_dir, walk_speed=drive.walk_speed,
                  turn_lr_delta=turn, look_ud_delta=look, jump=drive.jump,
                  pickup=pickup, shoot=shoot, reload=reload)


# ---------------------------------------------------------------------------
# policies
# ---------------------------------------------------------------------------

def nav_bot_policy(memory: BotMemory, observation: Observation,
                   state: EpisodeState,
                   target: tuple[float, float, float] | None = None) -> Action:
    config = memory.config
    update_occupancy(memory.grid, observation, config)
    _progress_bookkeeping(memory, observation, state)
    target = target or observation.target_location
    tick = observation.step

    if memory.recovery_until >= tick and memory.recovery_point is not None:
        drive = _drive_along_path(memory, observation, memory.recovery_point,
                                  state)
        return _finish(memory, observation, drive)
    if target is None:
        return _finish(memory, observation, _Drive())
    drive = _drive_along_path(memory, observation, (target[0], target[2]),
                              state)
    return _finish(memory, observation, drive)


def _update_known_supplies(memory: BotMemory,
                           observation: Observation) -> None:
    px, py, pz = observation.position
    seen = set()
    for (loc, qty) in observation.nearby_supplies:
        key = (round(loc[0], 1), round(loc[1], 1), round(loc[2], 1))
        memory.known_supplies[key] = (loc, qty)
        seen.add(key)
    stale = []
    for key, (loc, _qty) in memory.known_supplies.items():
        d = math.hypot(loc[0] - px, loc[2] - pz)
        if d < 28.0 and key not in seen:
            stale.append(key)  # opened by someone since we saw it
    for key in stale:
        del memory.known_supplies[key]


def _frontier_target(memory: BotMemory, observation: Observation
                     ) -> tuple[float, float]:
    """Nearest unknown-majority region center on the current storey."""
    grid = memory.grid
    px, _, pz = observation.position
    storey = OccupancyGrid.storey_of(observation.position[1] + 0.5)
    cells = grid.cells[:, :, storey]
    ci, cj = OccupancyGrid.cell_of(px, pz)
    best = None
    best_d = 1e18
    for radius in (10, 20, 35, 60, 100):
        lo_i, hi_i = max(0, ci - radius), min(GRID_N, ci + radius)
        lo_j, hi_j = max(0, cj - radius), min(GRID_N, cj + radius)
        block = cells[lo_i:hi_i:5, lo_j:hi_j:5]
        unknown = np.argwhere(block == UNKNOWN)
        for (bi, bj) in unknown:
            i = lo_i + bi * 5
            j = lo_j + bj * 5
            d = (i - ci) ** 2 + (j - cj) ** 2
            if 25.0 <= d < best_d:
                best_d = d
                best = (i, j)
        if best is not None:
            break
    if best is None:
        return px + 10.0, pz
    return _cell_center(*best)


def gather_bot_policy(memory: BotMemory, observation: Observation,
                      state: EpisodeState) -> Action:
    config = memory.config
    update_occupancy(memory.grid, observation, config)
    _progress_bookkeeping(memory, observation, state)
    _update_known_supplies(memory, observation)
    px, py, pz = observation.position
    tick = observation.step

    if memory.recovery_until >= tick and memory.recovery_point is not None:
        drive = _drive_along_path(memory, observation, memory.recovery_point,
                                  state)
        return _finish(memory, observation, drive)

    # rule 1: pick up anything within reach
    pickup = any(
        (loc[0] - px) ** 2 + (loc[1] - py) ** 2 + (loc[2] - pz) ** 2 <= 1.0
        for (loc, _qty) in observation.nearby_supplies)

    # rule 3: need to descend -> retrace the recorded climb route
    storey = OccupancyGrid.storey_of(py + 0.5)
    target_loc = _best_supply(memory, observation)
    if target_loc is not None:
        t_storey = OccupancyGrid.storey_of(target_loc[1] + 0.5)
        if t_storey < storey and memory.visited_route:
            back = memory.visited_route[-1]
            drive = _drive_along_path(memory, observation,
                                      _cell_center(back[0], back[1]), state)
            return _finish(memory, observation, drive, pickup=pickup)

    if target_loc is not None:
        drive = _drive_along_path(memory, observation,
                                  (target_loc[0], target_loc[2]), state)
        return _finish(memory, observation, drive, pickup=pickup)

    # rule 4: no known supplies -> explore toward unknown space
    drive = _drive_along_path(memory, observation,
                              _frontier_target(memory, observation), state)
    return _finish(memory, observation, drive, pickup=pickup)


def _best_supply(memory: BotMemory, observation: Observation):
    """Known supply maximizing quantity per meter of distance."""
    px, _, pz = observation.position
    best = None
    best_ratio = -1.0
    for (loc, qty) in memory.known_supplies.values():
        d = max(1.0, math.hypot(loc[0] - px, loc[2] - pz))
        ratio = qty / d
        if ratio > best_ratio:
            best_ratio = ratio
            best = loc
    return best


def battle_bot_policy(memory: BotMemory, observation: Observation,
                      state: EpisodeState) -> Action:
    config = memory.config
    if observation.visible_enemies:
        px, py, pz = observation.position
        eye_y = py + 1.6
        nearest = min(observation.visible_enemies,
                      key=lambda e: (e[1][0] - px) ** 2 + (e[1][2] - pz) ** 2)
        ex, ey, ez = nearest[1]
        cx, cy, cz = ex, ey + 0.9, ez  # body center
        d_h = math.hypot(cx - px, cz - pz)
        want_yaw = math.degrees(math.atan2(cz - pz, cx - px)) % 360.0
        want_pitch = math.degrees(math.atan2(cy - eye_y, max(d_h, 1e-6)))
        yaw_err = _wrap_angle(want_yaw - observation.yaw)
        pitch_err = want_pitch - observation.pitch
        # aim will be exact after this tick's turn applies
        shoot = observation.clip_ammo > 0
        update_occupancy(memory.grid, observation, config)
        _progress_bookkeeping(memory, observation, state)
        _update_known_supplies(memory, observation)
        memory.last_command = (observation.yaw, 0)
        return Action(walk_dir=0.0, walk_speed=0,
                      turn_lr_delta=yaw_err, look_ud_delta=pitch_err,
                      shoot=shoot)
    if observation.clip_ammo < config.reload_threshold:
        action = gather_bot_policy(memory, observation, state)
        action.reload = True
        action.shoot = False
        return action
    return gather_bot_policy(memory, observation, state)


# ---------------------------------------------------------------------------
# policy factory for the evaluation loop
# ---------------------------------------------------------------------------

BOT_KINDS = ("nav", "gather", "battle")


def make_bot_policy(kind: str, num_agents: int,
                    config: BotConfig | None = None):
    """Per-agent memories wrapped as a tasks.Policy callable."""
    if kind not in BOT_KINDS:
        raise ValueError(f"unknown bot kind {kind!r}")
    config = config or BotConfig()
    memories = [BotMemory(config=config) for _ in range(num_agents)]

    def policy(observations: list[Observation],
               state: EpisodeState) -> list[Action]:
        actions = []
        for obs, memory in zip(observations, memories):
            if not obs.alive:
                actions.append(Action())
            elif kind == "nav":
                actions.append(nav_bot_policy(memory, obs, state))
            elif kind == "gather":
                actions.append(gather_bot_policy(memory, obs, state))
            else:
                actions.append(battle_bot_policy(memory, obs, state))
        # battle task: strip masked fields for non-battle tasks
        allowed_shoot = state.spec.task_type == "supply_battle"
        allowed_pickup = state.spec.task_type in (
            "supply_gather_max", "supply_gather_target", "supply_battle")
        for action in actions:
            if not allowed_shoot:
                action.shoot = False
                action.reload = False
            if not allowed_pickup:
                action.pickup = False
        return actions

    return policy
