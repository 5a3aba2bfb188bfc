import math

import numpy as np
import pytest

from uavmec.errors import ConfigError
from uavmec.model import (ScenarioConfig, Task, UavState, UserState, apply_motion,
                          build_scenario, coverage_radius, generate_tasks,
                          is_covered, min_pairwise_distance)


def small_config(**overrides):
    defaults = dict(num_users=4, num_uavs=4, horizon=20, rng_seed=7)
    defaults.update(overrides)
    return ScenarioConfig(**defaults)


class TestScenarioConstruction:
    def test_same_seed_byte_identical(self):
        a = build_scenario(small_config())
        b = build_scenario(small_config())
        assert a.to_dict() == b.to_dict()

    def test_users_inside_box_on_ground(self):
        sc = build_scenario(small_config(num_users=4))
        for user in sc.users:
            x, y, z = user.position
            assert 0 <= x <= 50 and 0 <= y <= 50
            assert z == 0.0

    def test_default_uav_corners(self):
        sc = build_scenario(small_config(num_uavs=4))
        got = [tuple(u.position) for u in sc.uavs]
        assert got == [(0, 0, 10), (0, 50, 10), (50, 0, 10), (50, 50, 10)]

    def test_extra_uavs_at_z_min_inside_box(self):
        sc = build_scenario(small_config(num_uavs=6))
        for uav in sc.uavs:
            assert uav.position[2] == 10.0
            assert 0 <= uav.position[0] <= 50 and 0 <= uav.position[1] <= 50

    def test_invalid_config_names_bound(self):
        with pytest.raises(ConfigError, match="z_min"):
            ScenarioConfig(z_min=0.0)
        with pytest.raises(ConfigError, match="task_bits_range"):
            ScenarioConfig(task_bits_range=(150e3, 100e3))
        with pytest.raises(ConfigError, match="v_max"):
            ScenarioConfig(v_max=-1.0)

    def test_snapshot_round_trip(self, tmp_path):
        sc = build_scenario(small_config())
        path = tmp_path / "scenario.json"
        sc.save(path)
        from uavmec.model import Scenario
        loaded = Scenario.load(path)
        assert loaded.to_dict() == sc.to_dict()


class TestMotion:
    def test_zero_delta_identity(self):
        cfg = small_config()
        uav = UavState(position=np.array([25.0, 25.0, 15.0]), cpu_freq=1e9,
                       tx_power=5.0, half_angle_deg=90.0)
        out = apply_motion(uav, np.zeros(3), cfg)
        assert np.allclose(out.new_position, uav.position)
        assert not out.box_violation and not out.speed_violation

    def test_overspeed_rescaled(self):
        cfg = small_config()
        uav = UavState(position=np.array([25.0, 25.0, 15.0]), cpu_freq=1e9,
                       tx_power=5.0, half_angle_deg=90.0)
        delta = np.array([2 * cfg.max_step, 0.0, 0.0])
        out = apply_motion(uav, delta, cfg)
        moved = np.linalg.norm(out.new_position - uav.position)
        assert moved == pytest.approx(cfg.max_step, rel=1e-12)
        assert out.speed_violation and not out.box_violation

    def test_box_clamp_flags(self):
        cfg = small_config()
        uav = UavState(position=np.array([0.0, 0.0, 10.0]), cpu_freq=1e9,
                       tx_power=5.0, half_angle_deg=90.0)
        out = apply_motion(uav, np.array([-1.0, 0.0, 0.0]), cfg)
        assert out.new_position[0] == 0.0
        assert out.box_violation

    def test_constraints_hold_after_many_random_steps(self):
        cfg = small_config()
        rng = np.random.default_rng(3)
        uav = UavState(position=np.array([25.0, 25.0, 15.0]), cpu_freq=1e9,
                       tx_power=5.0, half_angle_deg=90.0)
        for _ in range(500):
            delta = rng.normal(scale=3.0, size=3)
            out = apply_motion(uav, delta, cfg)
            step = np.linalg.norm(out.new_position - uav.position)
            assert step <= cfg.max_step + 1e-9
            x, y, z = out.new_position
            assert 0 <= x <= cfg.area_x and 0 <= y <= cfg.area_y
            assert cfg.z_min <= z <= cfg.z_max
            uav.position = out.new_position

    def test_non_finite_delta_rejected(self):
        cfg = small_config()
        uav = UavState(position=np.array([25.0, 25.0, 15.0]), cpu_freq=1e9,
                       tx_power=5.0, half_angle_deg=90.0)
        with pytest.raises(ConfigError):
            apply_motion(uav, np.array([np.nan, 0.0, 0.0]), cfg)


class TestCoverage:
    def _uav(self, z, half_angle):
        return UavState(position=np.array([10.0, 10.0, z]), cpu_freq=1e9,
                        tx_power=5.0, half_angle_deg=half_angle)

    def test_radius_45_degrees_equals_altitude(self):
        assert coverage_radius(self._uav(10.0, 45.0)) == pytest.approx(10.0)
        assert coverage_radius(self._uav(20.0, 45.0)) == pytest.approx(20.0)

    def test_radius_90_degrees_unbounded(self):
        assert coverage_radius(self._uav(10.0, 90.0)) == math.inf

    def test_radius_monotone_in_z_and_angle(self):
        for z1, z2 in [(10, 12), (12, 18)]:
            assert coverage_radius(self._uav(z1, 45)) <= coverage_radius(self._uav(z2, 45))
        for a1, a2 in [(10, 30), (30, 60), (60, 89.9)]:
            assert coverage_radius(self._uav(15, a1)) <= coverage_radius(self._uav(15, a2))

    def test_is_covered(self):
        below = UserState(position=np.array([10.0, 10.0, 0.0]), cpu_freq=1e9, tx_power=1.0)
        assert is_covered(below, self._uav(10.0, 45.0))
        far = UserState(position=np.array([21.0, 10.0, 0.0]), cpu_freq=1e9, tx_power=1.0)
        assert not is_covered(far, self._uav(10.0, 45.0))  # 11 m out, 10 m radius
        assert is_covered(far, self._uav(10.0, 90.0))


class TestPairwiseDistance:
    def _uavs(self, positions):
        return [UavState(position=np.array(p, dtype=float), cpu_freq=1e9,
                         tx_power=5.0, half_angle_deg=90.0) for p in positions]

    def test_coincident_zero(self):
        assert min_pairwise_distance(self._uavs([(0, 0, 10), (0, 0, 10)])) == 0.0

    def test_three_uavs(self):
        uavs = self._uavs([(0, 0, 10), (3, 0, 10), (100, 0, 10)])
        assert min_pairwise_distance(uavs) == pytest.approx(3.0)

    def test_single_uav_infinite(self):
        assert min_pairwise_distance(self._uavs([(0, 0, 10)])) == math.inf


class TestTasks:
    def test_draws_within_ranges(self):
        sc = build_scenario(small_config(num_users=50))
        tasks = generate_tasks(sc, 0)
        assert len(tasks) == 50
        for t in tasks:
            assert 100e3 <= t.bits <= 150e3
            assert 500 <= t.cycles_per_bit <= 1000

    def test_seed_slot_determinism(self):
        sc = build_scenario(small_config())
        again = build_scenario(small_config())
        assert generate_tasks(sc, 3) == generate_tasks(again, 3)
        assert generate_tasks(sc, 3) != generate_tasks(sc, 4)

    def test_degenerate_range(self):
        sc = build_scenario(small_config(task_bits_range=(100e3, 100e3)))
        for t in generate_tasks(sc, 1):
            assert t.bits == 100e3

    def test_task_invariants(self):
        with pytest.raises(ConfigError):
            Task(bits=0.0, cycles_per_bit=500.0)
        with pytest.raises(ConfigError):
            Task(bits=1e5, cycles_per_bit=0.0)

    def test_slot_outside_horizon(self):
        sc = build_scenario(small_config(horizon=5))
        with pytest.raises(ConfigError):
            generate_tasks(sc, 5)


class TestUserMobility:
    def test_static_by_default(self):
        sc = build_scenario(small_config())
        before = sc.user_positions.copy()
        sc.advance_users()
        assert np.array_equal(sc.user_positions, before)

    def test_waypoint_walk_stays_in_box_and_replays(self):
        cfg = small_config(user_mobility="random_waypoint", user_speed=2.0)
        sc = build_scenario(cfg)
        sc.reset_mobility()
        trace = []
        for _ in range(50):
            sc.advance_users()
            pos = sc.user_positions
            assert (pos[:, 0] >= 0).all() and (pos[:, 0] <= cfg.area_x).all()
            assert (pos[:, 1] >= 0).all() and (pos[:, 1] <= cfg.area_y).all()
            trace.append(pos.copy())
        sc2 = build_scenario(cfg)
        sc2.reset_mobility()
        for step in range(50):
            sc2.advance_users()
            assert np.array_equal(trace[step], sc2.user_positions)
