"""Per-slot optimizer: square-root closed-form resource shares and a
coordinate-descent search over one-hot offloading choices, plus two
independent correctness oracles (exhaustive enumeration and a projected
gradient solver for the fixed-assignment convex subproblem).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .delay import LOCAL, SlotContext, SlotDecision, SlotMetrics, slot_dor
from .errors import CapExceededError, ConfigError, ConvergenceError, InfeasibleError
from .model import Scenario, Task

BRUTE_FORCE_CAP = 2 ** 20


@dataclass
class AllocationResult:
    decision: SlotDecision
    dor: float
    iterations: int      # full coordinate-descent sweeps (1 for the oracles)
    converged: bool

    def to_dict(self) -> dict:
        return {
            "schema_version": 1,
            "dor": self.dor,
            "iterations": self.iterations,
            "converged": self.converged,
            "assignment": [int(x) for x in self.decision.assignment],
            "ingress": [int(x) for x in self.decision.ingress],
            "bandwidth_hz": [float(x) for x in self.decision.bandwidth_hz],
            "cpu_hz": [float(x) for x in self.decision.cpu_hz],
        }


def kkt_bandwidth_shares(user_freq, task_cycles, r0, total_bw: float) -> np.ndarray:
    """Closed-form bandwidth split for users sharing one uplink band.

    share_i proportional to sqrt(f_i / (c_i * r0_i)); shares sum to total_bw.
    """
    f = np.asarray(user_freq, dtype=float)
    c = np.asarray(task_cycles, dtype=float)
    r = np.asarray(r0, dtype=float)
    if f.size == 0:
        return np.empty(0)
    if total_bw <= 0:
        raise ConfigError(f"total_bw must be > 0, got {total_bw}")
    if np.any(r <= 0):
        raise InfeasibleError("zero spectral efficiency: user cannot reach its ingress UAV")
    weights = np.sqrt(f / (c * r))
    return total_bw * weights / weights.sum()


def kkt_cpu_shares(user_freq, uav_freq: float) -> np.ndarray:
    """Closed-form processor split: share_i proportional to sqrt(f_i)."""
    f = np.asarray(user_freq, dtype=float)
    if f.size == 0:
        return np.empty(0)
    if uav_freq <= 0:
        raise ConfigError(f"uav_freq must be > 0, got {uav_freq}")
    weights = np.sqrt(f)
    return uav_freq * weights / weights.sum()


def evaluate_assignment(assignment, ctx: SlotContext,
                        validate: bool = False) -> tuple[SlotDecision, SlotMetrics]:
    """Resource shares (closed forms per UAV group) and objective for one assignment.

    assignment[m] is LOCAL or the executing UAV index. Offloaded users enter
    through their fixed best-rate covering UAV; executors may be any UAV.
    """
    a = np.asarray(assignment, dtype=int)
    if a.shape != (ctx.num_users,):
        raise ConfigError(f"assignment must have shape ({ctx.num_users},), got {a.shape}")
    off = a != LOCAL
    if np.any(off & (ctx.default_ingress == LOCAL)):
        bad = int(np.flatnonzero(off & (ctx.default_ingress == LOCAL))[0])
        raise InfeasibleError(f"user {bad} is offloaded but no UAV covers it")

    ingress = np.where(off, ctx.default_ingress, LOCAL)
    bw = np.zeros(ctx.num_users)
    cpu = np.zeros(ctx.num_users)
    off_idx = np.flatnonzero(off)
    if off_idx.size:
        ing = ingress[off_idx]
        r0 = ctx.r0[off_idx, ing]
        if np.any(r0 <= 0):
            raise InfeasibleError("zero spectral efficiency on a chosen ingress link")
        w_bw = np.sqrt(ctx.user_freq[off_idx] / (ctx.task_cycles[off_idx] * r0))
        denom_bw = np.zeros(ctx.num_uavs)
        np.add.at(denom_bw, ing, w_bw)
        bw[off_idx] = ctx.uav_bw[ing] * w_bw / denom_bw[ing]

        w_cpu = np.sqrt(ctx.user_freq[off_idx])
        denom_cpu = np.zeros(ctx.num_uavs)
        np.add.at(denom_cpu, a[off_idx], w_cpu)
        cpu[off_idx] = ctx.uav_cpu[a[off_idx]] * w_cpu / denom_cpu[a[off_idx]]

    decision = SlotDecision(assignment=a.copy(), ingress=ingress,
                            bandwidth_hz=bw, cpu_hz=cpu)
    metrics = slot_dor(decision, ctx, validate=validate)
    return decision, metrics


def cd_search(ctx: SlotContext, max_sweeps: int = 100,
              sweep_rng: np.random.Generator | None = None) -> AllocationResult:
    """Coordinate descent over per-user choices, starting all-local.

    Each sweep revisits every user and re-evaluates all of its choices with
    the others held fixed (shares re-solved per candidate); the best strictly
    improving choice is kept, ties go to the incumbent. Stops when a full
    sweep changes nothing. The accepted objective sequence is nondecreasing.

    sweep_rng, when given, shuffles the user visit order once per call
    (robustness experiments); default is ascending index order.
    """
    m, n = ctx.num_users, ctx.num_uavs
    order = np.arange(m)
    if sweep_rng is not None:
        sweep_rng.shuffle(order)
    can_offload = ctx.default_ingress != LOCAL

    assignment = np.full(m, LOCAL, dtype=int)
    _, metrics = evaluate_assignment(assignment, ctx)
    best_dor = metrics.dor

    sweeps = 0
    converged = False
    while sweeps < max_sweeps:
        sweeps += 1
        changed = False
        for user in order:
            incumbent = assignment[user]
            best_choice = incumbent
            choices = [LOCAL] + (list(range(n)) if can_offload[user] else [])
            for choice in choices:
                if choice == incumbent:
                    continue
                assignment[user] = choice
                _, trial = evaluate_assignment(assignment, ctx)
                if trial.dor > best_dor:
                    best_dor = trial.dor
                    best_choice = choice
            assignment[user] = best_choice
            if best_choice != incumbent:
                changed = True
        if not changed:
            converged = True
            break

    decision, metrics = evaluate_assignment(assignment, ctx, validate=True)
    return AllocationResult(decision=decision, dor=metrics.dor,
                            iterations=sweeps, converged=converged)


def brute_force_oracle(ctx: SlotContext, cap: int = BRUTE_FORCE_CAP) -> AllocationResult:
    """Global optimum by enumerating every feasible one-hot assignment.

    Ties resolve to the lexicographically smallest assignment (local sorts
    before any UAV). Refuses instances whose enumeration exceeds `cap`.
    """
    m, n = ctx.num_users, ctx.num_uavs
    can_offload = ctx.default_ingress != LOCAL
    per_user = [[LOCAL] + (list(range(n)) if can_offload[u] else []) for u in range(m)]
    total = 1
    for choices in per_user:
        total *= len(choices)
        if total > cap:
            raise CapExceededError(
                f"exhaustive search needs {np.prod([len(c) for c in per_user])} "
                f"evaluations, above the cap of {cap}")

    best_assignment = None
    best_dor = -np.inf
    for combo in itertools.product(*per_user):
        assignment = np.array(combo, dtype=int)
        _, metrics = evaluate_assignment(assignment, ctx)
        if metrics.dor > best_dor:
            best_dor = metrics.dor
            best_assignment = assignment

    decision, metrics = evaluate_assignment(best_assignment, ctx, validate=True)
    return AllocationResult(decision=decision, dor=metrics.dor,
                            iterations=1, converged=True)


def minimize_inverse_on_simplex(weights, capacity: float, tol: float = 1e-8,
                                max_iter: int = 100_000) -> np.ndarray:
    """Projected gradient for: minimize sum(w_i / x_i) s.t. x >= 0, sum(x) <= capacity.

    Independent numeric check of the square-root closed forms; it never uses
    them. Works on the scale-free unit-simplex problem in extended precision
    and stops when the first-order multipliers w_i / x_i^2 agree to a relative
    spread below `tol` (the budget binds at any optimum, so sum(x) = capacity).
    """
    w64 = np.asarray(weights, dtype=float)
    if w64.size == 0:
        return np.empty(0)
    if np.any(w64 <= 0):
        raise ConfigError("simplex solver needs strictly positive weights")
    if capacity <= 0:
        raise ConfigError(f"capacity must be > 0, got {capacity}")
    if w64.size == 1:
        return np.array([capacity])

    ld = np.longdouble

    def project_unit(v):
        # Euclidean projection onto {y >= 0, sum(y) = 1}
        u = np.sort(v)[::-1]
        css = np.cumsum(u) - ld(1)
        ks = np.arange(1, v.size + 1)
        rho = np.max(ks[u - css / ks > 0])
        theta = css[rho - 1] / rho
        return np.maximum(v - theta, ld(0))

    w = np.asarray(w64, dtype=ld)
    w = w / w.sum()
    y = np.full(w.size, ld(1) / w.size)
    fy = np.sum(w / y)
    step = ld(0.1)
    residual = np.inf
    for _ in range(max_iter):
        lam = w / y ** 2
        residual = float((lam.max() - lam.min()) / lam.mean())
        if residual < tol:
            return np.asarray(capacity * y, dtype=float)
        t = step
        while True:
            y_new = project_unit(y + t * lam)  # ascent on -f is descent on f
            f_new = np.sum(w / y_new) if np.all(y_new > 0) else np.inf
            if f_new < fy:
                break
            t *= ld(0.5)
            if t < ld(1e-30):
                break
        if f_new >= fy:
            break  # no descent left at extended precision
        y, fy = y_new, f_new
        step = t * 2
    raise ConvergenceError(
        f"projected gradient stalled: multiplier spread {residual:.3e} "
        f"above tolerance {tol:.1e}")


def numeric_convex_oracle(assignment, ctx: SlotContext, tol: float = 1e-8,
                          max_iter: int = 100_000) -> tuple[np.ndarray, np.ndarray]:
    """Numerically optimal (bandwidth, cpu) shares for a fixed assignment.

    Solves each UAV's bandwidth group and processor group by projected
    gradient; used to cross-check the closed forms, never to replace them.
    """
    a = np.asarray(assignment, dtype=int)
    off = a != LOCAL
    if np.any(off & (ctx.default_ingress == LOCAL)):
        raise InfeasibleError("offloaded user without a covering UAV")
    ingress = np.where(off, ctx.default_ingress, LOCAL)

    bw = np.zeros(ctx.num_users)
    cpu = np.zeros(ctx.num_users)
    for uav in range(ctx.num_uavs):
        members = np.flatnonzero(off & (ingress == uav))
        if members.size:
            w = ctx.user_freq[members] / (ctx.task_cycles[members] * ctx.r0[members, uav])
            bw[members] = minimize_inverse_on_simplex(w, float(ctx.uav_bw[uav]),
                                                      tol=tol, max_iter=max_iter)
        executors = np.flatnonzero(off & (a == uav))
        if executors.size:
            cpu[executors] = minimize_inverse_on_simplex(ctx.user_freq[executors],
                                                         float(ctx.uav_cpu[uav]),
                                                         tol=tol, max_iter=max_iter)
    return bw, cpu


# ---- slot-context JSON (consumed by the `alloc` CLI verb) ----

def slot_context_from_dict(data: dict) -> SlotContext:
    version = data.get("schema_version")
    if version != 1:
        raise ConfigError(f"unsupported slot-context schema_version: {version!r}")
    scenario = Scenario.from_dict(data["scenario"])
    tasks = [Task(bits=t["bits"], cycles_per_bit=t["cycles_per_bit"])
             for t in data["tasks"]]
    return SlotContext(scenario.users, scenario.uavs, tasks, scenario.config.channel)


def slot_context_to_dict(scenario: Scenario, tasks: list[Task]) -> dict:
    return {
        "schema_version": 1,
        "scenario": scenario.to_dict(),
        "tasks": [{"bits": t.bits, "cycles_per_bit": t.cycles_per_bit} for t in tasks],
    }
