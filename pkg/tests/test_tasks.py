"""Episode lifecycle: rewards, masking, termination, determinism."""

from __future__ import annotations

import numpy as np
import pytest

from conftest import make_flat_map, supply_box
from scavsim import tasks
from scavsim.dynamics import Action
from scavsim.tasks import (
    CameraConfig,
    EpisodeFinishedError,
    MaskedActionError,
    TaskSpec,
    TaskValidationError,
    reset,
    reward_navigation,
    reward_supply_gather,
    spec_from_json,
    spec_to_json,
    step,
)

TINY_CAM = CameraConfig(mode="frustum", width=2, height=2)


def nav_spec(**kw):
    base = dict(task_type="navigation", map_id=1, seed=0, camera=TINY_CAM)
    base.update(kw)
    return TaskSpec(**base)


class TestRewardOps:
    def test_navigation_inside(self):
        assert reward_navigation((0, 0, 0), (0.5, 0, 0)) == 1

    def test_navigation_boundary_inclusive(self):
        assert reward_navigation((0, 0, 0), (1.0, 0, 0)) == 1

    def test_navigation_just_outside(self):
        assert reward_navigation((0, 0, 0), (1.000001, 0, 0)) == 0

    def test_gather_increase(self):
        r, tracker = reward_supply_gather(7, 4)
        assert r == 1 and tracker == 7

    def test_gather_unchanged(self):
        r, tracker = reward_supply_gather(4, 4)
        assert r == 0 and tracker == 4

    def test_gather_two_increases_two_rewards(self):
        tracker = 0
        total = 0
        for supplies in (2, 2, 5):
            r, tracker = reward_supply_gather(supplies, tracker)
            total += r
        assert total == 2


class TestReset:
    def test_explicit_start_snaps_to_ground(self, flat_map):
        spec = nav_spec(start_locations=[(0.0, 1.0, 0.0)],
                        target_location=(5.0, 0.0, 3.0))
        state, obs = reset(spec, flat_map)
        assert state.agents[0].position[0] == 0.0
        assert state.agents[0].position[2] == 0.0
        assert abs(state.agents[0].position[1]) < 0.01  # ground level

    def test_unwalkable_start_rejected(self, house_map):
        spec = nav_spec(start_locations=[(2.5, 0.0, -4.9)])  # inside wall
        with pytest.raises(TaskValidationError):
            reset(spec, house_map)

    def test_same_seed_same_initial_observations(self, map103):
        spec = nav_spec(map_id=103, seed=7)
        _, obs1 = reset(spec, map103)
        _, obs2 = reset(spec, map103)
        assert obs1[0].position == obs2[0].position
        assert obs1[0].yaw == obs2[0].yaw
        np.testing.assert_array_equal(obs1[0].depth.values,
                                      obs2[0].depth.values)

    def test_five_agents_distinct_spawns(self, map101):
        spec = TaskSpec(task_type="supply_gather_max", map_id=101,
                        num_agents=5, seed=3, camera=TINY_CAM)
        state, obs = reset(spec, map101)
        assert len(state.agents) == 5
        positions = [tuple(a.position) for a in state.agents]
        assert len(set(positions)) == 5

    def test_default_agent_counts(self):
        assert nav_spec().agents == 1
        assert TaskSpec(task_type="supply_battle", map_id=1).agents == 4

    def test_gather_target_sits_on_a_box(self, flat_map):
        world = make_flat_map(boxes=[supply_box(0, 10.0, 0.0, 5.0, 3)])
        spec = TaskSpec(task_type="supply_gather_target", map_id=1, seed=2,
                        camera=TINY_CAM)
        state, _ = reset(spec, world)
        assert tuple(state.target) == (10.0, 0.0, 5.0)


class TestEpisodeLengths:
    def test_defaults_by_task(self):
        from scavsim.dynamics import SimParams
        p = SimParams()
        assert nav_spec().episode_ticks(p) == 400
        assert TaskSpec(task_type="target_capture",
                        map_id=1).episode_ticks(p) == 400
        assert TaskSpec(task_type="supply_gather_max",
                        map_id=1).episode_ticks(p) == 600
        assert TaskSpec(task_type="supply_battle",
                        map_id=1).episode_ticks(p) == 600

    def test_timeout_stricter_wins(self):
        from scavsim.dynamics import SimParams
        p = SimParams()
        assert nav_spec(timeout=30.0).episode_ticks(p) == 100
        assert nav_spec(timeout=300.0).episode_ticks(p) == 400

    def test_600_ticks_is_180_seconds(self, flat_map):
        spec = TaskSpec(task_type="supply_gather_max", map_id=1,
                        num_agents=1, seed=0, camera=TINY_CAM)
        state, _ = reset(spec, flat_map)
        noop = [Action()]
        while not state.done:
            state, _, _, _ = step(state, noop)
        m = state.metrics()
        assert m.episode_length == 600
        assert m.simulated_seconds == pytest.approx(180.0, abs=1e-9)


class TestStep:
    def test_noop_navigation_times_out(self, flat_map):
        spec = nav_spec(target_location=(40.0, 0.0, 40.0), max_steps=50,
                        start_locations=[(0.0, 0.0, 0.0)])
        state, _ = reset(spec, flat_map)
        total = 0
        while not state.done:
            state, _, rewards, _ = step(state, [Action()])
            total += rewards[0]
        assert state.tick == 50 and not state.success and total == 0

    def test_straight_line_reaches_in_ten_ticks(self, flat_map):
        spec = nav_spec(start_locations=[(0.0, 0.0, 0.0)],
                        target_location=(30.0, 0.0, 0.0))
        state, _ = reset(spec, flat_map)
        go = [Action(walk_dir=0.0, walk_speed=10)]
        while not state.done:
            state, _, rewards, _ = step(state, go)
        assert state.success
        assert state.tick == 10  # ceil(30 / (10 * 0.3))
        assert rewards[0] == 1

    def test_capture_tie_break_lowest_id(self, flat_map):
        spec = TaskSpec(task_type="target_capture", map_id=1, num_agents=3,
                        seed=0, camera=TINY_CAM,
                        start_locations=[(3.0, 0, 0), (-3.0, 0, 0),
                                         (0.0, 0, 3.0)],
                        target_location=(0.0, 0.0, 0.0))
        state, _ = reset(spec, flat_map)
        # all three walk inward and arrive the same tick
        actions = [Action(walk_dir=180.0, walk_speed=1),
                   Action(walk_dir=0.0, walk_speed=1),
                   Action(walk_dir=270.0, walk_speed=1)]
        rewards_total = [0, 0, 0]
        while not state.done:
            state, _, rewards, _ = step(state, actions)
            rewards_total = [a + b for a, b in zip(rewards_total, rewards)]
        assert rewards_total == [1, 0, 0]
        assert state.success

    def test_masked_pickup_rejected_in_navigation(self, flat_map):
        spec = nav_spec(target_location=(10.0, 0, 0))
        state, _ = reset(spec, flat_map)
        with pytest.raises(MaskedActionError, match="pickup"):
            step(state, [Action(pickup=True)])

    def test_masked_shoot_rejected_in_gather(self, flat_map):
        spec = TaskSpec(task_type="supply_gather_max", map_id=1,
                        num_agents=1, seed=0, camera=TINY_CAM)
        state, _ = reset(spec, flat_map)
        with pytest.raises(MaskedActionError, match="shoot"):
            step(state, [Action(shoot=True)])
        with pytest.raises(MaskedActionError, match="reload"):
            step(state, [Action(reload=True)])

    def test_step_after_done_raises(self, flat_map):
        spec = nav_spec(max_steps=1, target_location=(40.0, 0, 40.0),
                        start_locations=[(0.0, 0.0, 0.0)])
        state, _ = reset(spec, flat_map)
        state, _, _, done = step(state, [Action()])
        assert done
        with pytest.raises(EpisodeFinishedError):
            step(state, [Action()])

    def test_pickup_reward_is_one_per_event(self, flat_map):
        world = make_flat_map(boxes=[supply_box(0, 0.5, 0.0, 0.0, 3)])
        spec = TaskSpec(task_type="supply_gather_max", map_id=1,
                        num_agents=1, seed=0, camera=TINY_CAM,
                        start_locations=[(0.0, 0.0, 0.0)])
        state, _ = reset(spec, world)
        state, _, rewards, _ = step(state, [Action(pickup=True)])
        assert rewards[0] == 1  # +1 per pickup event, not +3 for quantity
        assert state.agents[0].supplies == 3

    def test_episode_determinism(self, map103):
        spec = TaskSpec(task_type="supply_gather_max", map_id=103,
                        num_agents=2, seed=11, camera=TINY_CAM, max_steps=40)
        rng = np.random.default_rng(5)
        log = [[Action(walk_dir=float(rng.uniform(0, 360)),
                       walk_speed=int(rng.integers(0, 11)),
                       pickup=True) for _ in range(2)] for _ in range(40)]
        metrics = []
        for _ in range(2):
            state, _ = reset(spec, map103)
            for acts in log:
                if state.done:
                    break
                state, _, _, _ = step(state, acts)
            metrics.append(state.metrics().to_json())
        assert metrics[0] == metrics[1]


class TestSpecJson:
    def test_roundtrip(self):
        spec = TaskSpec(task_type="supply_battle", map_id=104, num_agents=3,
                        seed=9, timeout=45.0,
                        camera=CameraConfig(mode="lidar", width=32))
        again = spec_from_json(spec_to_json(spec))
        assert again == spec

    def test_appendix_style_config(self):
        data = {"task_type": "navigation", "map_id": 1, "timeout": 30,
                "start_location": None,
                "start_locations": [[0, 1, 0]],
                "target_location": [5, 0, 3], "seed": 0}
        spec = spec_from_json(data)
        assert spec.timeout == 30.0
        assert spec.start_locations == [(0.0, 1.0, 0.0)]
        assert spec.target_location == (5.0, 0.0, 3.0)
