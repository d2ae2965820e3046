"""Gauss-Seidel and Newton-Raphson AC power flow.

Defaults follow the workbench conventions: GS runs with acceleration 1.6 for
up to 10 iterations, NR for up to 5 full Newton steps, both stopping early
once the largest scheduled-minus-calculated injection falls below tolerance.
Angles are radians internally and degrees in rendered traces.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from . import kernels
from .bus_system import Branch, BusRecord
from .errors import (
    DimensionMismatch,
    Diverged,
    InvalidSpec,
    SingularDiagonal,
    SingularJacobian,
)
from .trace import SolveTrace

_DIVERGENCE_STREAK = 3


@dataclass(frozen=True)
class GaussSeidelConfig:
    acceleration: float = 1.6
    max_iterations: int = 10
    tolerance: float = 1e-6

    def __post_init__(self):
        if not 0.0 < self.acceleration <= 2.0:
            raise InvalidSpec("acceleration must lie in (0, 2]")
        if self.max_iterations < 1:
            raise InvalidSpec("max_iterations must be at least 1")


@dataclass(frozen=True)
class NewtonRaphsonConfig:
    max_iterations: int = 5
    tolerance: float = 1e-6

    def __post_init__(self):
        if self.max_iterations < 1:
            raise InvalidSpec("max_iterations must be at least 1")


@dataclass
class BranchFlow:
    branch: int
    from_bus: int
    to_bus: int
    p_send: float
    q_send: float
    p_recv: float
    q_recv: float

    @property
    def loss_p(self) -> float:
        return self.p_send + self.p_recv

    @property
    def loss_q(self) -> float:
        return self.q_send + self.q_recv


@dataclass
class PowerFlowSolution:
    v: np.ndarray
    theta: np.ndarray
    p_calc: np.ndarray
    q_calc: np.ndarray
    converged: bool
    iterations_run: int
    max_mismatch: float
    branch_flows: list[BranchFlow] = field(default_factory=list)


def init_state(buses: list[BusRecord]) -> tuple[np.ndarray, np.ndarray]:
    """Flat start (1.0 pu, 0 rad) except where setpoints pin the state."""
    vm = np.array([b.v_set if b.v_set is not None else 1.0 for b in buses])
    va = np.array([b.theta_set if b.kind == "slack" else 0.0 for b in buses])
    return vm, va


def _bus_arrays(buses: list[BusRecord]):
    kind = np.array([b.kind_code for b in buses], dtype=np.int64)
    p_sched = np.array([b.p_sched for b in buses])
    q_sched = np.array([b.q_sched for b in buses])
    v_set = np.array([b.v_set if b.v_set is not None else 1.0 for b in buses])
    q_min = np.array([b.q_min for b in buses])
    q_max = np.array([b.q_max for b in buses])
    return kind, p_sched, q_sched, v_set, q_min, q_max


def power_mismatch(v: np.ndarray, theta: np.ndarray, ybus: np.ndarray,
                   buses: list[BusRecord]) -> np.ndarray:
    """Scheduled minus calculated injections: dP at PV+PQ buses, dQ at PQ buses."""
    n = len(buses)
    if v.shape != (n,) or theta.shape != (n,) or ybus.shape != (n, n):
        raise DimensionMismatch(
            f"state/ybus sizes {v.shape}/{theta.shape}/{ybus.shape} do not fit {n} buses")
    vc = v * np.exp(1j * theta)
    p_calc, q_calc = kernels.calc_injections(ybus, vc)
    pvpq = [b.index for b in buses if b.kind != "slack"]
    pq = [b.index for b in buses if b.kind == "pq"]
    dp = np.array([buses[i].p_sched - p_calc[i] for i in pvpq])
    dq = np.array([buses[i].q_sched - q_calc[i] for i in pq])
    return np.concatenate([dp, dq])


def gauss_seidel(ybus: np.ndarray, buses: list[BusRecord],
                 cfg: GaussSeidelConfig | None = None,
                 trace: SolveTrace | None = None) -> tuple[PowerFlowSolution, SolveTrace]:
    """Accelerated Gauss-Seidel sweeps; PV buses get their magnitude re-pinned
    after each update unless their reactive power hit a limit."""
    cfg = cfg or GaussSeidelConfig()
    n = len(buses)
    if ybus.shape != (n, n):
        raise DimensionMismatch(f"ybus {ybus.shape} does not fit {n} buses")
    if trace is None:
        trace = SolveTrace("gauss-seidel")
    trace.config.update(acceleration=cfg.acceleration,
                        max_iterations=cfg.max_iterations, tolerance=cfg.tolerance)
    diag = np.abs(np.diag(ybus))
    nonslack = [b.index for b in buses if b.kind != "slack"]
    if any(diag[i] == 0.0 for i in nonslack):
        raise SingularDiagonal("zero diagonal admittance at a non-slack bus")

    # working copies: a PV bus whose reactive output leaves its band is
    # demoted to PQ at the violated limit for the rest of the solve
    work = [replace(b) for b in buses]
    vm, va = init_state(work)
    v = vm * np.exp(1j * va)

    def demote_limited() -> None:
        _, q_calc = kernels.calc_injections(ybus, v)
        for b in work:
            if b.kind != "pv":
                continue
            if q_calc[b.index] < b.q_min or q_calc[b.index] > b.q_max:
                b.kind = "pq"
                b.q_sched = min(max(q_calc[b.index], b.q_min), b.q_max)
                trace.record("limit", {"bus": b.index, "q_sched": b.q_sched},
                             message=f"bus {b.index} reactive limit hit; held as PQ")

    mismatch = power_mismatch(np.abs(v), np.angle(v), ybus, work)
    worst = float(np.max(np.abs(mismatch))) if mismatch.size else 0.0
    iterations = 0
    converged = worst < cfg.tolerance
    while not converged and iterations < cfg.max_iterations:
        demote_limited()
        kind, p_sched, q_sched, v_set, q_min, q_max = _bus_arrays(work)
        kernels.gs_sweep(ybus, v, p_sched, q_sched, kind, v_set, q_min, q_max,
                         cfg.acceleration)
        iterations += 1
        mismatch = power_mismatch(np.abs(v), np.angle(v), ybus, work)
        worst = float(np.max(np.abs(mismatch))) if mismatch.size else 0.0
        trace.record("iteration",
                     {"v_pu": np.abs(v), "theta_deg": np.degrees(np.angle(v)),
                      "max_mismatch_pu": worst},
                     message=f"sweep {iterations}")
        converged = worst < cfg.tolerance

    p_calc, q_calc = kernels.calc_injections(ybus, v)
    solution = PowerFlowSolution(np.abs(v), np.angle(v), p_calc, q_calc,
                                 converged, iterations, worst)
    trace.finalize(converged=converged, iterations_run=iterations,
                   max_mismatch_pu=worst)
    return solution, trace


def newton_raphson(ybus: np.ndarray, buses: list[BusRecord],
                   cfg: NewtonRaphsonConfig | None = None,
                   trace: SolveTrace | None = None) -> tuple[PowerFlowSolution, SolveTrace]:
    """Full polar Newton-Raphson on [theta_PV+PQ; V_PQ]."""
    cfg = cfg or NewtonRaphsonConfig()
    n = len(buses)
    if ybus.shape != (n, n):
        raise DimensionMismatch(f"ybus {ybus.shape} does not fit {n} buses")
    if trace is None:
        trace = SolveTrace("newton-raphson")
    trace.config.update(max_iterations=cfg.max_iterations, tolerance=cfg.tolerance)

    pvpq = np.array([b.index for b in buses if b.kind != "slack"], dtype=np.int64)
    pq = np.array([b.index for b in buses if b.kind == "pq"], dtype=np.int64)
    vm, va = init_state(buses)

    iterations = 0
    norms: list[float] = []
    mismatch = power_mismatch(vm, va, ybus, buses)
    worst = float(np.max(np.abs(mismatch))) if mismatch.size else 0.0
    converged = worst < cfg.tolerance
    while not converged and iterations < cfg.max_iterations:
        v = vm * np.exp(1j * va)
        jac = kernels.power_jacobian(ybus, v, pvpq, pq)
        cond = float(np.linalg.cond(jac)) if jac.size else 0.0
        try:
            dx = np.linalg.solve(jac, mismatch)
        except np.linalg.LinAlgError:
            trace.finalize(converged=False, iterations_run=iterations,
                           error="SingularJacobian")
            raise SingularJacobian("power-flow Jacobian is singular") from None
        va[pvpq] += dx[:pvpq.size]
        vm[pq] += dx[pvpq.size:]
        iterations += 1
        mismatch = power_mismatch(vm, va, ybus, buses)
        worst = float(np.max(np.abs(mismatch))) if mismatch.size else 0.0
        trace.record("iteration",
                     {"v_pu": vm, "theta_deg": np.degrees(va),
                      "mismatch_norm_pu": worst, "jacobian_condition": cond},
                     message=f"newton step {iterations}")
        norms.append(worst)
        if len(norms) > _DIVERGENCE_STREAK and all(
                norms[-k] > norms[-k - 1] for k in range(1, _DIVERGENCE_STREAK + 1)):
            trace.finalize(converged=False, iterations_run=iterations, error="Diverged")
            raise Diverged(
                f"mismatch grew {_DIVERGENCE_STREAK} consecutive iterations", trace=trace)
        converged = worst < cfg.tolerance

    vc = vm * np.exp(1j * va)
    p_calc, q_calc = kernels.calc_injections(ybus, vc)
    solution = PowerFlowSolution(vm, va, p_calc, q_calc, converged, iterations, worst)
    trace.finalize(converged=converged, iterations_run=iterations,
                   max_mismatch_pu=worst)
    return solution, trace


def compute_branch_flows(solution: PowerFlowSolution,
                         branches: list[Branch]) -> list[BranchFlow]:
    """Sending/receiving P and Q per branch from the terminal voltages."""
    v = solution.v * np.exp(1j * solution.theta)
    flows = []
    for idx, br in enumerate(branches):
        vf, vt = v[br.from_bus], v[br.to_bus]
        i_send = br.y_series * (vf - vt) + 1j * br.b_shunt_half * vf
        i_recv = br.y_series * (vt - vf) + 1j * br.b_shunt_half * vt
        s_send = vf * np.conj(i_send)
        s_recv = vt * np.conj(i_recv)
        flows.append(BranchFlow(idx, br.from_bus, br.to_bus,
                                float(s_send.real), float(s_send.imag),
                                float(s_recv.real), float(s_recv.imag)))
    solution.branch_flows = flows
    return flows


def state_distance(a: PowerFlowSolution, b: PowerFlowSolution) -> float:
    """Largest per-variable gap between two solutions (magnitudes and angles)."""
    return max(float(np.max(np.abs(a.v - b.v))), float(np.max(np.abs(a.theta - b.theta))))


def total_balance(solution: PowerFlowSolution) -> tuple[float, float]:
    """(total generation-minus-load P, total losses P) — equal at convergence."""
    injection_sum = float(np.sum(solution.p_calc))
    losses = float(sum(f.loss_p for f in solution.branch_flows))
    return injection_sum, losses


def mismatch_infnorm(v, theta, ybus, buses) -> float:
    mm = power_mismatch(v, theta, ybus, buses)
    return float(np.max(np.abs(mm))) if mm.size else 0.0
