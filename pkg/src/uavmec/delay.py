"""Task delays and the per-slot delay-improvement objective.

A slot's objective sums, over users, 1 - (achieved delay) / (local delay).
Local users contribute exactly 0; offloaded users may contribute negative
values when offloading is slower, and those are deliberately kept.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import channel
from .errors import ValidationError, ConfigError
from .model import Task, UserState, UavState

LOCAL = -1  # assignment value for "compute on the user's own device"

_CAP_RTOL = 1e-9  # slack for capacity sums, floating-point only


def local_delay(task: Task, user: UserState) -> float:
    """Seconds to run the task on the user's own CPU."""
    if user.cpu_freq <= 0:
        raise ConfigError(f"user cpu_freq must be > 0, got {user.cpu_freq}")
    return task.bits * task.cycles_per_bit / user.cpu_freq


def offload_delay(task: Task, g2a_rate_bps: float) -> float:
    """Uplink transmission time; +inf for an unservable zero-rate link."""
    if g2a_rate_bps <= 0:
        return math.inf
    return task.bits / g2a_rate_bps


def exec_delay(task: Task, cpu_share_hz: float) -> float:
    """Execution time on the granted processor share; +inf for a zero share."""
    if cpu_share_hz <= 0:
        return math.inf
    return task.bits * task.cycles_per_bit / cpu_share_hz


def edge_delay(task: Task, g2a_rate_bps: float, cpu_share_hz: float) -> float:
    return offload_delay(task, g2a_rate_bps) + exec_delay(task, cpu_share_hz)


class SlotContext:
    """Everything one slot's allocation needs, precomputed in array form.

    r0[m, n] is the per-Hz uplink rate from user m to UAV n. default_ingress[m]
    is the covering UAV with the best r0 (-1 when nobody covers the user); it is
    the uplink entry point for user m regardless of which UAV executes the task,
    since the relay hop between UAVs is treated as delay-free.
    """

    def __init__(self, users: list[UserState], uavs: list[UavState],
                 tasks: list[Task], params: channel.ChannelParams):
        if not (len(users) == len(tasks)):
            raise ConfigError(f"{len(tasks)} tasks for {len(users)} users")
        self.users = users
        self.uavs = uavs
        self.tasks = tasks
        self.params = params
        self.num_users = len(users)
        self.num_uavs = len(uavs)

        self.task_bits = np.array([t.bits for t in tasks])
        self.task_cycles = np.array([t.cycles_per_bit for t in tasks])
        self.user_freq = np.array([u.cpu_freq for u in users])
        self.user_power = np.array([u.tx_power for u in users])
        self.uav_cpu = np.array([u.cpu_freq for u in uavs])
        self.uav_bw = np.full(self.num_uavs, params.bw_g2a_hz)
        self.t_loc = self.task_bits * self.task_cycles / self.user_freq

        upos = np.array([u.position for u in users])          # (M, 3)
        vpos = np.array([u.position for u in uavs])           # (N, 3)
        diff = upos[:, None, :] - vpos[None, :, :]
        self.dist3d = np.linalg.norm(diff, axis=-1)           # (M, N)
        self.horiz = np.linalg.norm(diff[:, :, :2], axis=-1)  # (M, N)
        alt = vpos[:, 2][None, :]

        reference = self.dist3d if params.elevation_uses_3d_distance else self.horiz
        theta = channel.elevation_deg_from_geometry(alt, reference)
        pl = channel.mean_path_loss_db(np.maximum(self.dist3d, 1e-9), theta, params)
        self.path_loss_db = pl
        self.r0 = channel.spectral_efficiency(self.user_power[:, None], pl,
                                              params.noise_g2a_watts)

        radius = np.array([
            u.position[2] * math.tan(math.radians(u.half_angle_deg))
            if u.half_angle_deg < 90.0 else math.inf
            for u in uavs
        ])
        self.coverage = self.horiz <= radius[None, :]         # (M, N)

        masked = np.where(self.coverage, self.r0, -np.inf)
        self.default_ingress = np.where(self.coverage.any(axis=1),
                                        masked.argmax(axis=1), LOCAL)


@dataclass
class SlotDecision:
    """One slot's offloading choice plus the resource shares that realize it.

    assignment[m]: LOCAL or the executing UAV's index. ingress[m]: the uplink
    UAV for offloaded users, LOCAL otherwise. bandwidth_hz[m] / cpu_hz[m]: the
    shares granted to user m at its ingress / executor (0 for local users).
    """

    assignment: np.ndarray
    ingress: np.ndarray
    bandwidth_hz: np.ndarray
    cpu_hz: np.ndarray


@dataclass
class SlotMetrics:
    dor: float
    per_user_delay: np.ndarray
    per_user_contribution: np.ndarray


def validate_decision(decision: SlotDecision, ctx: SlotContext):
    """Raise ValidationError naming the first violated decision constraint."""
    a = np.asarray(decision.assignment)
    ing = np.asarray(decision.ingress)
    bw = np.asarray(decision.bandwidth_hz)
    cpu = np.asarray(decision.cpu_hz)
    m, n = ctx.num_users, ctx.num_uavs
    if a.shape != (m,):
        raise ValidationError(f"assignment must have shape ({m},), got {a.shape}")
    if np.any((a < LOCAL) | (a >= n)):
        raise ValidationError("one-hot choice: assignment entries must be LOCAL or a UAV index")

    local = a == LOCAL
    if np.any(ing[local] != LOCAL):
        raise ValidationError("local users must carry no ingress UAV")
    if np.any((ing[~local] < 0) | (ing[~local] >= n)):
        raise ValidationError("offloaded users need a valid ingress UAV index")
    if np.any(bw < 0):
        raise ValidationError("bandwidth shares must be >= 0")
    if np.any(cpu < 0):
        raise ValidationError("cpu shares must be >= 0")
    if np.any(bw[local] != 0) or np.any(cpu[local] != 0):
        raise ValidationError("local users must hold zero bandwidth and cpu shares")

    offloaded = np.flatnonzero(~local)
    if offloaded.size and not ctx.coverage[offloaded, ing[offloaded]].all():
        bad = offloaded[~ctx.coverage[offloaded, ing[offloaded]]][0]
        raise ValidationError(
            f"ingress UAV {ing[bad]} does not cover user {bad}")

    for uav in range(n):
        total_bw = bw[ing == uav].sum()
        if total_bw > ctx.uav_bw[uav] * (1 + _CAP_RTOL):
            raise ValidationError(
                f"bandwidth oversubscribed on UAV {uav}: "
                f"{total_bw:.6g} > {ctx.uav_bw[uav]:.6g} Hz")
        total_cpu = cpu[a == uav].sum()
        if total_cpu > ctx.uav_cpu[uav] * (1 + _CAP_RTOL):
            raise ValidationError(
                f"cpu oversubscribed on UAV {uav}: "
                f"{total_cpu:.6g} > {ctx.uav_cpu[uav]:.6g} Hz")


def slot_dor(decision: SlotDecision, ctx: SlotContext, validate: bool = True) -> SlotMetrics:
    """Per-slot objective value and its per-user breakdown."""
    if validate:
        validate_decision(decision, ctx)
    a = np.asarray(decision.assignment)
    ing = np.asarray(decision.ingress)
    local = a == LOCAL

    delay = ctx.t_loc.copy()
    contribution = np.zeros(ctx.num_users)
    off = np.flatnonzero(~local)
    if off.size:
        rate = decision.bandwidth_hz[off] * ctx.r0[off, ing[off]]
        with np.errstate(divide="ignore"):
            t_off = np.where(rate > 0, ctx.task_bits[off] / np.maximum(rate, 1e-300), np.inf)
            cpu = decision.cpu_hz[off]
            t_exe = np.where(cpu > 0,
                             ctx.task_bits[off] * ctx.task_cycles[off] / np.maximum(cpu, 1e-300),
                             np.inf)
        t_edge = t_off + t_exe
        delay[off] = t_edge
        contribution[off] = 1.0 - t_edge / ctx.t_loc[off]
    return SlotMetrics(dor=float(contribution.sum()),
                       per_user_delay=delay,
                       per_user_contribution=contribution)
