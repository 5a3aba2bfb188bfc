"""Episodic environment: UAV motions in, per-slot allocation and shared reward out.

Each step applies the commanded displacements under the motion constraints,
draws the slot's tasks, solves the slot allocation (coordinate descent by
default), and pays the slot objective as a shared reward. Constraint
violations (box, speed, UAV separation) subtract a fixed penalty per
violating UAV; positions are never rolled back.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .allocator import AllocationResult, cd_search
from .delay import SlotContext, SlotMetrics, slot_dor
from .errors import ConfigError
from .model import Scenario, apply_motion, generate_tasks


@dataclass
class SlotInfo:
    slot: int
    dor: float
    reward: float
    metrics: SlotMetrics
    allocation: AllocationResult
    violating_uavs: list[int]
    box_violations: list[int] = field(default_factory=list)
    speed_violations: list[int] = field(default_factory=list)
    collision_uavs: list[int] = field(default_factory=list)


class EdgeComputeEnv:
    """Time-slotted rollout over one scenario.

    Observations are each UAV's own position; `extended_obs` appends the user
    centroid. `allocate` maps a SlotContext to an AllocationResult, so
    baseline offloading policies can ride the same dynamics.
    """

    def __init__(self, scenario: Scenario, penalty: float = 10.0,
                 extended_obs: bool = False, allocate=None):
        self.scenario = scenario
        self.config = scenario.config
        self.penalty = penalty
        self.extended_obs = extended_obs
        self.allocate = allocate if allocate is not None else cd_search
        self.slot = 0
        self.num_uavs = scenario.config.num_uavs
        self.obs_dim = 6 if extended_obs else 3

    def observe(self) -> np.ndarray:
        obs = self.scenario.uav_positions
        if self.extended_obs:
            centroid = self.scenario.user_positions.mean(axis=0)
            obs = np.hstack([obs, np.tile(centroid, (self.num_uavs, 1))])
        return obs

    def reset(self) -> np.ndarray:
        self.scenario.reset_uavs()
        self.scenario.reset_mobility()
        self.slot = 0
        return self.observe()

    def step(self, actions: np.ndarray) -> tuple[np.ndarray, float, SlotInfo]:
        """Advance one slot. actions: (num_uavs, 3) displacements in meters."""
        actions = np.asarray(actions, dtype=float)
        if actions.shape != (self.num_uavs, 3):
            raise ConfigError(
                f"actions must have shape ({self.num_uavs}, 3), got {actions.shape}")
        if self.slot >= self.config.horizon:
            raise ConfigError("episode exhausted; call reset()")

        box, speed = [], []
        for n, uav in enumerate(self.scenario.uavs):
            outcome = apply_motion(uav, actions[n], self.config)
            uav.position = outcome.new_position
            if outcome.box_violation:
                box.append(n)
            if outcome.speed_violation:
                speed.append(n)

        collisions: set[int] = set()
        pos = self.scenario.uav_positions
        for i in range(self.num_uavs):
            for j in range(i + 1, self.num_uavs):
                if np.linalg.norm(pos[i] - pos[j]) < self.config.d_min:
                    collisions.update((i, j))

        self.scenario.advance_users()
        tasks = generate_tasks(self.scenario, self.slot)
        ctx = SlotContext(self.scenario.users, self.scenario.uavs, tasks,
                          self.config.channel)
        allocation = self.allocate(ctx)
        metrics = slot_dor(allocation.decision, ctx, validate=False)

        violators = sorted(set(box) | set(speed) | collisions)
        reward = metrics.dor - self.penalty * len(violators)

        info = SlotInfo(slot=self.slot, dor=metrics.dor, reward=reward,
                        metrics=metrics, allocation=allocation,
                        violating_uavs=violators, box_violations=box,
                        speed_violations=speed,
                        collision_uavs=sorted(collisions))
        self.slot += 1
        return self.observe(), reward, info
