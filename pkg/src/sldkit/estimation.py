"""Weighted-least-squares and fast-decoupled state estimation.

Measurements come from meters via the minimum-distance attachment rule or are
generated from a power-flow solution for calibration. The state vector is
[theta at non-slack buses; V at all buses]; the slack angle stays pinned at 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from . import components as comp
from . import kernels
from .bus_system import Branch, BusSystem
from .errors import (
    DimensionMismatch,
    Diverged,
    InvalidSpec,
    NoCandidates,
    OrderingViolation,
    UnobservableSystem,
)
from .network import Network
from .powerflow import PowerFlowSolution
from .trace import SolveTrace

KIND_CODES = {"pflow": kernels.PFLOW, "qflow": kernels.QFLOW,
              "pinj": kernels.PINJ, "qinj": kernels.QINJ, "vmag": kernels.VMAG}
FLOW_KINDS = ("pflow", "qflow")
ACTIVE_KINDS = ("pflow", "pinj")

_DIVERGENCE_STREAK = 3


@dataclass(frozen=True)
class Measurement:
    kind: str                 # pflow | qflow | pinj | qinj | vmag
    value: float              # pu
    sigma: float
    bus: int | None = None    # injections and vmag
    branch: int | None = None  # flows
    side: int = 1             # +1 measured at from end, -1 at to end
    meter: int | None = None  # originating meter component, if any

    def __post_init__(self):
        if self.kind not in KIND_CODES:
            raise InvalidSpec(f"unknown measurement kind {self.kind!r}")
        if self.sigma <= 0:
            raise InvalidSpec("measurement sigma must be positive")
        if self.kind in FLOW_KINDS:
            if self.branch is None or self.side not in (1, -1):
                raise InvalidSpec("flow measurements need a branch and a side")
        elif self.bus is None:
            raise InvalidSpec(f"{self.kind} measurements need a bus")


@dataclass
class MeasurementSet:
    measurements: list[Measurement] = field(default_factory=list)

    def __len__(self):
        return len(self.measurements)

    def __iter__(self):
        return iter(self.measurements)

    def append(self, m: Measurement) -> None:
        self.measurements.append(m)

    def arrays(self):
        kinds = np.array([KIND_CODES[m.kind] for m in self.measurements], dtype=np.int64)
        locs = np.array([m.branch if m.kind in FLOW_KINDS else m.bus
                         for m in self.measurements], dtype=np.int64)
        sides = np.array([m.side for m in self.measurements], dtype=np.int64)
        z = np.array([m.value for m in self.measurements])
        sigma = np.array([m.sigma for m in self.measurements])
        return kinds, locs, sides, z, sigma


@dataclass
class StateEstimate:
    v: np.ndarray
    theta: np.ndarray          # radians; slack pinned to 0
    residuals: np.ndarray      # z - h(x_hat)
    objective: float           # sum of residual^2 / sigma^2
    converged: bool
    iterations_run: int


def state_dimension(n_buses: int) -> int:
    return 2 * n_buses - 1


def pack_state(vm: np.ndarray, va: np.ndarray, slack: int) -> np.ndarray:
    keep = [i for i in range(vm.size) if i != slack]
    return np.concatenate([va[keep], vm])


def unpack_state(x: np.ndarray, n: int, slack: int) -> tuple[np.ndarray, np.ndarray]:
    va = np.zeros(n)
    keep = [i for i in range(n) if i != slack]
    va[keep] = x[: n - 1]
    vm = x[n - 1:].copy()
    return vm, va


def _angle_columns(n: int, slack: int) -> np.ndarray:
    cols = np.full(n, -1, dtype=np.int64)
    nxt = 0
    for i in range(n):
        if i != slack:
            cols[i] = nxt
            nxt += 1
    return cols


def _branch_arrays(branches: list[Branch]):
    fr = np.array([b.from_bus for b in branches], dtype=np.int64)
    to = np.array([b.to_bus for b in branches], dtype=np.int64)
    g = np.array([b.y_series.real for b in branches])
    b_ = np.array([b.y_series.imag for b in branches])
    bsh = np.array([b.b_shunt_half for b in branches])
    return fr, to, g, b_, bsh


def measurement_function(x: np.ndarray, ybus: np.ndarray, branches: list[Branch],
                         mset: MeasurementSet, slack: int = 0) -> np.ndarray:
    """Predicted values h(x): AC injection/flow equations plus direct Vmag."""
    n = ybus.shape[0]
    if x.size != state_dimension(n):
        raise DimensionMismatch(f"state size {x.size} != {state_dimension(n)}")
    vm, va = unpack_state(x, n, slack)
    kinds, locs, sides, _, _ = mset.arrays()
    fr, to, g, b_, bsh = _branch_arrays(branches)
    return kernels.meas_h(vm, va, np.ascontiguousarray(ybus.real),
                          np.ascontiguousarray(ybus.imag),
                          fr, to, g, b_, bsh, kinds, locs, sides)


def measurement_jacobian(x: np.ndarray, ybus: np.ndarray, branches: list[Branch],
                         mset: MeasurementSet, slack: int = 0) -> np.ndarray:
    """dh/d[theta; V] with the slack angle column excluded; rows follow
    measurement order."""
    n = ybus.shape[0]
    if x.size != state_dimension(n):
        raise DimensionMismatch(f"state size {x.size} != {state_dimension(n)}")
    vm, va = unpack_state(x, n, slack)
    kinds, locs, sides, _, _ = mset.arrays()
    fr, to, g, b_, bsh = _branch_arrays(branches)
    return kernels.meas_jacobian(vm, va, np.ascontiguousarray(ybus.real),
                                 np.ascontiguousarray(ybus.imag),
                                 fr, to, g, b_, bsh, kinds, locs, sides,
                                 _angle_columns(n, slack))


def meters_to_measurements(net: Network, system: BusSystem) -> MeasurementSet:
    """Attach every meter to its closest line or bus-bar.

    Lines yield flow readings at the end nearer to the meter; bus-bars (and
    connecting lines, which are electrically bus extensions) yield injections.
    Vmag attaches to the bus at the meter's side.
    """
    meters = [c for c in net.components.values() if c.kind == comp.METER]
    if not meters and not net.components:
        raise NoCandidates("empty network")
    mset = MeasurementSet()
    for meter in sorted(meters, key=lambda m: m.id):
        target_id = net.nearest_attachable(meter.placement.position)
        spec = meter.spec
        for quantity in spec.quantities:
            if quantity not in spec.values:
                raise InvalidSpec(f"meter {meter.id} lacks a reading for {quantity}")

        line = net.lines.get(target_id)
        if line is not None and not line.spec.is_connecting:
            branch_idx = system.branch_of_component[target_id]
            pos_a = net.endpoint_position(line.end_a, line.along_a)
            pos_b = net.endpoint_position(line.end_b, line.along_b)
            da = math.dist(meter.placement.position, pos_a)
            db = math.dist(meter.placement.position, pos_b)
            side = 1 if da <= db else -1
            near_bus = system.bus_of_endpoint(line.end_a if side == 1 else line.end_b)
            for quantity in spec.quantities:
                if quantity == "Vmag":
                    mset.append(Measurement("vmag", spec.values["Vmag"],
                                            spec.sigma("Vmag"), bus=near_bus,
                                            meter=meter.id))
                else:
                    kind = "pflow" if quantity == "P" else "qflow"
                    mset.append(Measurement(kind, spec.values[quantity],
                                            spec.sigma(quantity), branch=branch_idx,
                                            side=side, meter=meter.id))
        else:
            if line is not None:  # connecting line: an extension of its bus
                bus = system.bus_of_endpoint(line.end_a)
            else:
                bus = system.bus_of_terminal[("bus", target_id)]
            for quantity in spec.quantities:
                if quantity == "Vmag":
                    mset.append(Measurement("vmag", spec.values["Vmag"],
                                            spec.sigma("Vmag"), bus=bus, meter=meter.id))
                else:
                    kind = "pinj" if quantity == "P" else "qinj"
                    mset.append(Measurement(kind, spec.values[quantity],
                                            spec.sigma(quantity), bus=bus, meter=meter.id))
    return mset


def measurements_from_solution(system: BusSystem, solution: PowerFlowSolution,
                               sigma_power: float = 0.01,
                               sigma_vmag: float = 0.004) -> MeasurementSet:
    """Noiseless full measurement set from a solved power flow: Vmag and P/Q
    injections at every bus, P/Q flows at every branch sending end."""
    mset = MeasurementSet()
    for bus in system.buses:
        i = bus.index
        mset.append(Measurement("vmag", float(solution.v[i]), sigma_vmag, bus=i))
        mset.append(Measurement("pinj", float(solution.p_calc[i]), sigma_power, bus=i))
        mset.append(Measurement("qinj", float(solution.q_calc[i]), sigma_power, bus=i))
    if not solution.branch_flows:
        raise OrderingViolation("compute_branch_flows must run before generating flows")
    for flow in solution.branch_flows:
        mset.append(Measurement("pflow", flow.p_send, sigma_power,
                                branch=flow.branch, side=1))
        mset.append(Measurement("qflow", flow.q_send, sigma_power,
                                branch=flow.branch, side=1))
    return mset


def _weighted(h_mat: np.ndarray, weights: np.ndarray) -> np.ndarray:
    return h_mat * weights[:, None]


def wls_estimate(mset: MeasurementSet, ybus: np.ndarray, branches: list[Branch],
                 init: np.ndarray | None = None, tol: float = 1e-6,
                 max_iter: int = 10, slack: int = 0,
                 trace: SolveTrace | None = None) -> tuple[StateEstimate, SolveTrace]:
    """Gauss-Newton on the weighted residuals: (Ht W H) dx = Ht W (z - h)."""
    n = ybus.shape[0]
    dim = state_dimension(n)
    if trace is None:
        trace = SolveTrace("wls-estimator")
    trace.config.update(tolerance=tol, max_iterations=max_iter)
    if len(mset) < dim:
        raise UnobservableSystem(
            f"{len(mset)} measurements cannot observe {dim} state variables")
    _, _, _, z, sigma = mset.arrays()
    weights = 1.0 / sigma**2

    x = init.copy() if init is not None else pack_state(np.ones(n), np.zeros(n), slack)
    iterations = 0
    objectives: list[float] = []
    converged = False
    while iterations < max_iter:
        h = measurement_function(x, ybus, branches, mset, slack)
        residual = z - h
        objective = float(np.dot(weights, residual**2))
        jac = measurement_jacobian(x, ybus, branches, mset, slack)
        gain = jac.T @ _weighted(jac, weights)
        rhs = jac.T @ (weights * residual)
        try:
            factor = scipy.linalg.cho_factor(gain)
        except np.linalg.LinAlgError:
            trace.finalize(converged=False, iterations_run=iterations,
                           error="UnobservableSystem")
            raise UnobservableSystem("gain matrix is singular or indefinite") from None
        dx = scipy.linalg.cho_solve(factor, rhs)
        step = float(np.max(np.abs(dx))) if dx.size else 0.0
        x = x + dx
        trace.record("iteration",
                     {"objective": objective, "step_norm": step,
                      "gain_condition": float(np.linalg.cond(gain))},
                     message=f"gauss-newton step {iterations + 1}")
        objectives.append(objective)
        if len(objectives) > _DIVERGENCE_STREAK and all(
                objectives[-k] > objectives[-k - 1]
                for k in range(1, _DIVERGENCE_STREAK + 1)):
            trace.finalize(converged=False, iterations_run=iterations, error="Diverged")
            raise Diverged("objective grew for three consecutive iterations",
                           trace=trace)
        if step < tol:
            converged = True
            break
        iterations += 1

    vm, va = unpack_state(x, n, slack)
    h = measurement_function(x, ybus, branches, mset, slack)
    residuals = z - h
    objective = float(np.dot(weights, residuals**2))
    estimate = StateEstimate(vm, va, residuals, objective, converged, iterations)
    trace.finalize(converged=converged, iterations_run=iterations,
                   objective=objective)
    return estimate, trace


def fdse_estimate(mset: MeasurementSet, ybus: np.ndarray, branches: list[Branch],
                  init: np.ndarray | None = None, tol: float = 1e-6,
                  max_iter: int = 100, slack: int = 0,
                  trace: SolveTrace | None = None) -> tuple[StateEstimate, SolveTrace]:
    """Fast-decoupled estimator: constant P-theta / Q-V gain matrices from the
    flat-start Jacobian partitions, factorized once, alternating half steps."""
    n = ybus.shape[0]
    if trace is None:
        trace = SolveTrace("fast-decoupled-estimator")
    trace.config.update(tolerance=tol, max_iterations=max_iter)
    kinds, _, _, z, sigma = mset.arrays()
    weights = 1.0 / sigma**2
    active = np.array([m.kind in ACTIVE_KINDS for m in mset])
    reactive = ~active
    if not active.any():
        raise UnobservableSystem("no active-group (P) measurements")
    if not reactive.any():
        raise UnobservableSystem("no reactive-group (Q/V) measurements")

    flat = pack_state(np.ones(n), np.zeros(n), slack)
    h0 = measurement_jacobian(flat, ybus, branches, mset, slack)
    n_ang = n - 1
    h_a = h0[active][:, :n_ang]
    h_r = h0[reactive][:, n_ang:]
    w_a = weights[active]
    w_r = weights[reactive]
    gain_a = h_a.T @ _weighted(h_a, w_a)
    gain_r = h_r.T @ _weighted(h_r, w_r)
    try:
        factor_a = scipy.linalg.cho_factor(gain_a)
    except np.linalg.LinAlgError:
        trace.finalize(converged=False, iterations_run=0, error="UnobservableSystem")
        raise UnobservableSystem("P-theta partition is unobservable") from None
    try:
        factor_r = scipy.linalg.cho_factor(gain_r)
    except np.linalg.LinAlgError:
        trace.finalize(converged=False, iterations_run=0, error="UnobservableSystem")
        raise UnobservableSystem("Q-V partition is unobservable") from None
    trace.record("setup", {"active_rows": int(active.sum()),
                           "reactive_rows": int(reactive.sum()),
                           "gain_a_condition": float(np.linalg.cond(gain_a)),
                           "gain_r_condition": float(np.linalg.cond(gain_r))},
                 message="flat-start gain matrices factorized")

    x = init.copy() if init is not None else flat.copy()
    iterations = 0
    converged = False
    while iterations < max_iter:
        h = measurement_function(x, ybus, branches, mset, slack)
        r_a = (z - h)[active]
        d_theta = scipy.linalg.cho_solve(factor_a, h_a.T @ (w_a * r_a))
        x[:n_ang] += d_theta
        h = measurement_function(x, ybus, branches, mset, slack)
        r_r = (z - h)[reactive]
        d_vm = scipy.linalg.cho_solve(factor_r, h_r.T @ (w_r * r_r))
        x[n_ang:] += d_vm
        norm_t = float(np.max(np.abs(d_theta))) if d_theta.size else 0.0
        norm_v = float(np.max(np.abs(d_vm))) if d_vm.size else 0.0
        trace.record("iteration",
                     {"theta_step_norm": norm_t, "v_step_norm": norm_v},
                     message=f"half-iteration pair {iterations + 1}")
        if max(norm_t, norm_v) < tol:
            converged = True
            break
        iterations += 1

    vm, va = unpack_state(x, n, slack)
    h = measurement_function(x, ybus, branches, mset, slack)
    residuals = z - h
    objective = float(np.dot(weights, residuals**2))
    estimate = StateEstimate(vm, va, residuals, objective, converged, iterations)
    trace.finalize(converged=converged, iterations_run=iterations, objective=objective)
    return estimate, trace


@dataclass
class ResidualEntry:
    measurement: Measurement
    predicted: float
    residual: float
    normalized: float
    flagged: bool = False


def residual_report(estimate: StateEstimate | None,
                    mset: MeasurementSet) -> list[ResidualEntry]:
    """Per-measurement residual and normalized residual; the largest normalized
    residual is flagged."""
    if estimate is None:
        raise OrderingViolation("residuals requested before any estimate ran")
    _, _, _, z, sigma = mset.arrays()
    if estimate.residuals.size != len(mset):
        raise DimensionMismatch("estimate does not match the measurement set")
    entries = []
    for m, zi, ri, si in zip(mset, z, estimate.residuals, sigma):
        entries.append(ResidualEntry(m, float(zi - ri), float(ri), float(ri / si)))
    if entries:
        worst = max(range(len(entries)), key=lambda i: abs(entries[i].normalized))
        entries[worst].flagged = True
    return entries
