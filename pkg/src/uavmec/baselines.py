"""Reference policies sharing the environment and allocator.

random_trajectory: random UAV motion, slot allocation unchanged.
all_offload: every covered user offloads to its best-rate covering UAV.
all_local: nobody offloads; the objective is 0 by construction.
learned: trajectories from a trained policy, allocation unchanged.
"""

from __future__ import annotations

import numpy as np

from .allocator import AllocationResult, evaluate_assignment
from .delay import LOCAL, SlotContext

POLICY_KINDS = ("learned", "random_trajectory", "all_offload", "all_local")


def rt_actions(rng: np.random.Generator, num_uavs: int, max_step: float) -> np.ndarray:
    """Uniform random 3D direction, uniform speed in [0, max_step], per UAV."""
    direction = rng.normal(size=(num_uavs, 3))
    direction /= np.maximum(np.linalg.norm(direction, axis=1, keepdims=True), 1e-12)
    speed = rng.uniform(0.0, max_step, size=(num_uavs, 1))
    return direction * speed


def hover_actions(num_uavs: int) -> np.ndarray:
    return np.zeros((num_uavs, 3))


def ao_allocate(ctx: SlotContext) -> AllocationResult:
    """Offload every covered user to its best-rate covering UAV; uncovered stay local."""
    assignment = np.where(ctx.default_ingress != LOCAL, ctx.default_ingress, LOCAL)
    decision, metrics = evaluate_assignment(assignment, ctx, validate=True)
    return AllocationResult(decision=decision, dor=metrics.dor,
                            iterations=1, converged=True)


def al_allocate(ctx: SlotContext) -> AllocationResult:
    """Everyone computes locally; objective exactly 0."""
    assignment = np.full(ctx.num_users, LOCAL, dtype=int)
    decision, metrics = evaluate_assignment(assignment, ctx, validate=True)
    return AllocationResult(decision=decision, dor=metrics.dor,
                            iterations=1, converged=True)
