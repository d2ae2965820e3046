"""Iteration-level records for every solver run, rendered as the calculation
window text. Records are append-only while the trace is open; rendering is a
pure function of (trace, precision)."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import TraceClosed

MATRIX_ELIDE_DIM = 20  # matrices larger than this are summarized


@dataclass
class TraceRecord:
    step_index: int
    phase: str
    payload: dict
    message: str = ""


@dataclass
class SolveTrace:
    solver: str
    config: dict = field(default_factory=dict)
    records: list[TraceRecord] = field(default_factory=list)
    outcome: dict | None = None

    @property
    def closed(self) -> bool:
        return self.outcome is not None

    def record(self, phase: str, payload: dict | None = None, message: str = "") -> TraceRecord:
        if self.closed:
            raise TraceClosed(f"trace for {self.solver} already finalized")
        rec = TraceRecord(len(self.records), phase, dict(payload or {}), message)
        self.records.append(rec)
        return rec

    def finalize(self, **outcome) -> None:
        if self.closed:
            raise TraceClosed(f"trace for {self.solver} already finalized")
        self.outcome = outcome

    def count(self, phase: str) -> int:
        return sum(1 for r in self.records if r.phase == phase)


def _fmt_scalar(value, precision: int) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (complex, np.complexfloating)):
        return (f"{value.real:.{precision}f}"
                f"{value.imag:+.{precision}f}j")
    if isinstance(value, (float, np.floating)):
        return f"{value:.{precision}f}"
    return str(value)


def _fmt_vector(vec: np.ndarray, precision: int) -> str:
    return "[" + " ".join(_fmt_scalar(v, precision) for v in vec) + "]"


def _fmt_value(name: str, value, precision: int, indent: str = "    ") -> list[str]:
    arr = np.asarray(value) if isinstance(value, (list, tuple, np.ndarray)) else None
    if arr is None or arr.ndim == 0:
        return [f"{indent}{name} = {_fmt_scalar(value, precision)}"]
    if arr.ndim == 1:
        return [f"{indent}{name}: {_fmt_vector(arr, precision)}"]
    rows, cols = arr.shape
    if rows > MATRIX_ELIDE_DIM or cols > MATRIX_ELIDE_DIM:
        norm = float(np.linalg.norm(arr))
        peak = float(np.max(np.abs(arr)))
        return [f"{indent}{name}: {rows}x{cols} matrix, "
                f"fro-norm {_fmt_scalar(norm, precision)}, "
                f"max |entry| {_fmt_scalar(peak, precision)}"]
    lines = [f"{indent}{name}: {rows}x{cols} matrix"]
    cells = [[_fmt_scalar(arr[i, j], precision) for j in range(cols)] for i in range(rows)]
    widths = [max(len(cells[i][j]) for i in range(rows)) for j in range(cols)]
    for row in cells:
        lines.append(indent + "  [" + "  ".join(c.rjust(w) for c, w in zip(row, widths)) + "]")
    return lines


def render_text(trace: SolveTrace, precision: int = 6) -> str:
    """Deterministic fixed-precision text: header, one block per record, footer."""
    out = [f"=== calculation window: {trace.solver} ==="]
    if trace.config:
        cfg = "; ".join(f"{k} = {_fmt_scalar(v, precision)}"
                        for k, v in trace.config.items())
        out.append(f"config: {cfg}")
    for rec in trace.records:
        head = f"[{rec.step_index}] {rec.phase}"
        if rec.message:
            head += f" | {rec.message}"
        out.append(head)
        for name, value in rec.payload.items():
            out.extend(_fmt_value(name, value, precision))
    if trace.outcome is not None:
        summary = "; ".join(f"{k} = {_fmt_scalar(v, precision)}"
                            for k, v in trace.outcome.items())
        out.append(f"--- outcome: {summary} ---")
    else:
        out.append("--- in progress ---")
    return "\n".join(out) + "\n"
