"""One entry point for every solve: validate, reduce, run the requested
method, and package solution + canvas overlay + rendered calculation text."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import components as comp
from . import estimation, perunit, powerflow
from .bus_system import BusSystem, build_ybus, extract_bus_system
from .errors import SldError
from .network import Network
from .trace import SolveTrace, render_text

METHODS_BY_MODE = {
    comp.POWER_FLOW: ("nr", "gs"),
    comp.STATE_ESTIMATION: ("wls", "fdse"),
    comp.PER_UNIT: ("report",),
}


@dataclass
class SolveOutcome:
    status: str                       # ok | invalid | failed
    violations: list = field(default_factory=list)
    solution: dict | None = None
    overlay: dict | None = None
    trace: SolveTrace | None = None
    error: str | None = None

    @property
    def trace_text(self) -> str:
        return render_text(self.trace) if self.trace is not None else ""

    def to_json(self) -> dict:
        return {
            "status": self.status,
            "violations": [
                {"code": v.code, "component": v.component, "message": v.message}
                for v in self.violations
            ],
            "solution": self.solution,
            "overlay": self.overlay,
            "error": self.error,
            "trace_text": self.trace_text,
        }


def default_method(mode: str) -> str:
    return METHODS_BY_MODE[mode][0]


def method_matches_mode(method: str, mode: str) -> bool:
    return method in METHODS_BY_MODE.get(mode, ())


def run_solve(net: Network, method: str | None = None,
              iterations: int | None = None, tolerance: float | None = None,
              acceleration: float | None = None) -> SolveOutcome:
    """Validate and solve ``net`` in its own mode. Overrides apply where the
    method supports them; None keeps the documented defaults."""
    mode = net.mode
    method = method or default_method(mode)
    if not method_matches_mode(method, mode):
        from .network import Violation
        return SolveOutcome("invalid", [Violation(
            "MethodModeMismatch", None,
            f"method {method!r} does not apply to {mode} mode")])

    violations = net.validate()
    if violations:
        return SolveOutcome("invalid", violations)

    try:
        if mode == comp.PER_UNIT:
            return _solve_per_unit(net)
        if mode == comp.POWER_FLOW:
            return _solve_power_flow(net, method, iterations, tolerance, acceleration)
        return _solve_estimation(net, method, iterations, tolerance)
    except SldError as exc:
        trace = getattr(exc, "trace", None)
        return SolveOutcome("failed", [], None, None, trace, exc.code)


def _bus_overlay(system: BusSystem, v: np.ndarray, theta: np.ndarray) -> dict:
    overlay: dict[str, dict] = {}
    for key, bus_idx in system.bus_of_terminal.items():
        if key[0] != "bus":
            continue
        overlay[str(key[1])] = {
            "v_pu": round(float(v[bus_idx]), 6),
            "theta_deg": round(float(np.degrees(theta[bus_idx])), 6),
            "bus": bus_idx,
        }
    return overlay


def _branch_overlay(system: BusSystem, flows) -> dict:
    overlay = {}
    by_index = {f.branch: f for f in flows}
    for cid, idx in system.branch_of_component.items():
        f = by_index[idx]
        overlay[str(cid)] = {
            "p_send_pu": round(f.p_send, 6), "q_send_pu": round(f.q_send, 6),
            "p_recv_pu": round(f.p_recv, 6), "q_recv_pu": round(f.q_recv, 6),
            "loss_pu": round(f.loss_p, 6), "branch": idx,
        }
    return overlay


def _solve_power_flow(net, method, iterations, tolerance, acceleration) -> SolveOutcome:
    trace = SolveTrace("gauss-seidel" if method == "gs" else "newton-raphson")
    system = extract_bus_system(net)
    for warning in system.warnings:
        trace.record("warning", {}, message=warning)
    ybus = build_ybus(system.branches, system.n, system.bus_shunt)
    trace.record("ybus", {"ybus": ybus}, message="admittance matrix assembled")

    if method == "gs":
        cfg = powerflow.GaussSeidelConfig(
            acceleration=acceleration if acceleration is not None else 1.6,
            max_iterations=iterations if iterations is not None else 10,
            tolerance=tolerance if tolerance is not None else 1e-6)
        solution, trace = powerflow.gauss_seidel(ybus, system.buses, cfg, trace)
    else:
        cfg = powerflow.NewtonRaphsonConfig(
            max_iterations=iterations if iterations is not None else 5,
            tolerance=tolerance if tolerance is not None else 1e-6)
        solution, trace = powerflow.newton_raphson(ybus, system.buses, cfg, trace)
    flows = powerflow.compute_branch_flows(solution, system.branches)

    solution_doc = {
        "method": method,
        "converged": solution.converged,
        "iterations_run": solution.iterations_run,
        "max_mismatch_pu": solution.max_mismatch,
        "s_base_va": system.s_base_va,
        "buses": [
            {"index": b.index, "kind": b.kind,
             "v_pu": float(solution.v[b.index]),
             "theta_deg": float(np.degrees(solution.theta[b.index])),
             "p_calc_pu": float(solution.p_calc[b.index]),
             "q_calc_pu": float(solution.q_calc[b.index])}
            for b in system.buses
        ],
        "branches": [
            {"branch": f.branch, "from_bus": f.from_bus, "to_bus": f.to_bus,
             "p_send_pu": f.p_send, "q_send_pu": f.q_send,
             "p_recv_pu": f.p_recv, "q_recv_pu": f.q_recv, "loss_pu": f.loss_p}
            for f in flows
        ],
    }
    status = "ok" if solution.converged else "failed"
    overlay = None
    if solution.converged:
        overlay = _bus_overlay(system, solution.v, solution.theta)
        overlay.update(_branch_overlay(system, flows))
    return SolveOutcome(status, [], solution_doc, overlay, trace,
                        None if solution.converged else "NotConverged")


def _solve_estimation(net, method, iterations, tolerance) -> SolveOutcome:
    trace = SolveTrace("wls-estimator" if method == "wls" else "fast-decoupled-estimator")
    system = extract_bus_system(net)
    for warning in system.warnings:
        trace.record("warning", {}, message=warning)
    ybus = build_ybus(system.branches, system.n, system.bus_shunt)
    trace.record("ybus", {"ybus": ybus}, message="admittance matrix assembled")
    mset = estimation.meters_to_measurements(net, system)
    trace.record("measurements", {"count": len(mset)},
                 message="meters attached by minimum distance")
    slack = system.slack_index()
    tol = tolerance if tolerance is not None else 1e-6
    if method == "wls":
        estimate, trace = estimation.wls_estimate(
            mset, ybus, system.branches,
            tol=tol, max_iter=iterations if iterations is not None else 10,
            slack=slack, trace=trace)
    else:
        estimate, trace = estimation.fdse_estimate(
            mset, ybus, system.branches,
            tol=tol, max_iter=iterations if iterations is not None else 100,
            slack=slack, trace=trace)
    report = estimation.residual_report(estimate, mset)

    solution_doc = {
        "method": method,
        "converged": estimate.converged,
        "iterations_run": estimate.iterations_run,
        "objective": estimate.objective,
        "buses": [
            {"index": i, "v_pu": float(estimate.v[i]),
             "theta_deg": float(np.degrees(estimate.theta[i]))}
            for i in range(system.n)
        ],
        "residuals": [
            {"kind": e.measurement.kind, "meter": e.measurement.meter,
             "value": e.measurement.value, "predicted": e.predicted,
             "residual": e.residual, "normalized": e.normalized,
             "flagged": e.flagged}
            for e in report
        ],
    }
    status = "ok" if estimate.converged else "failed"
    overlay = None
    if estimate.converged:
        overlay = _bus_overlay(system, estimate.v, estimate.theta)
        for entry in report:
            if entry.measurement.meter is None:
                continue
            meter_overlay = overlay.setdefault(str(entry.measurement.meter), {})
            meter_overlay[f"residual_{entry.measurement.kind}"] = round(entry.residual, 6)
            if entry.flagged:
                meter_overlay["flagged"] = True
    return SolveOutcome(status, [], solution_doc, overlay, trace,
                        None if estimate.converged else "NotConverged")


def _solve_per_unit(net) -> SolveOutcome:
    trace = SolveTrace("per-unit")
    bases = perunit.resolve_bases(net, trace)
    report = perunit.convert_to_per_unit(net, bases, trace)
    trace.finalize(regions=len(report.regions), s_base_va=report.s_base_va)

    def value_json(v):
        if isinstance(v, complex):
            return [v.real, v.imag]
        return v

    solution_doc = {
        "method": "report",
        "s_base_va": report.s_base_va,
        "regions": report.regions,
        "entries": [
            {"component": e.component, "kind": e.kind,
             "values": [
                 {"name": v.name, "original": value_json(v.original), "unit": v.unit,
                  "base": v.base, "per_unit": value_json(v.per_unit)}
                 for v in e.values
             ]}
            for e in report.entries
        ],
    }
    overlay = {}
    for entry in report.entries:
        overlay[str(entry.component)] = {
            v.name + "_pu": value_json(v.per_unit) for v in entry.values
        }
    return SolveOutcome("ok", [], solution_doc, overlay, trace)
