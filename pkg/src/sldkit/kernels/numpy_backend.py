"""Pure-numpy implementations of the hot numeric kernels. Same signatures as
the numba backend; selected via the SLDKIT_NO_NUMBA environment flag."""

from __future__ import annotations

import numpy as np

# measurement kind codes shared by both backends
PFLOW, QFLOW, PINJ, QINJ, VMAG = 0, 1, 2, 3, 4
# bus kind codes
SLACK, PV, PQ = 0, 1, 2


def calc_injections(ybus: np.ndarray, v: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Complex power injections S = V (Y V)* split into (P, Q)."""
    s = v * np.conj(ybus @ v)
    return s.real.copy(), s.imag.copy()


def gs_sweep(ybus: np.ndarray, v: np.ndarray, p_sched: np.ndarray, q_sched: np.ndarray,
             kind: np.ndarray, v_set: np.ndarray, q_min: np.ndarray, q_max: np.ndarray,
             accel: float) -> None:
    """One accelerated Gauss-Seidel sweep, updating ``v`` in place.

    The per-bus update is inherently sequential: each bus sees the voltages
    already updated earlier in the same sweep.
    """
    n = v.shape[0]
    for k in range(n):
        if kind[k] == SLACK:
            continue
        acc = np.dot(ybus[k], v)
        clamped = False
        if kind[k] == PV:
            q = (v[k] * np.conj(acc)).imag
            if q < q_min[k]:
                q, clamped = q_min[k], True
            elif q > q_max[k]:
                q, clamped = q_max[k], True
            s = complex(p_sched[k], q)
        else:
            s = complex(p_sched[k], q_sched[k])
        rest = acc - ybus[k, k] * v[k]
        v_new = (np.conj(s / v[k]) - rest) / ybus[k, k]
        v[k] = v[k] + accel * (v_new - v[k])
        if kind[k] == PV and not clamped:
            v[k] = v_set[k] * v[k] / abs(v[k])


def power_jacobian(ybus: np.ndarray, v: np.ndarray,
                   pvpq: np.ndarray, pq: np.ndarray) -> np.ndarray:
    """Polar power-flow Jacobian over [theta_pvpq; vm_pq] via the complex
    voltage-sensitivity identities."""
    ib = ybus @ v
    diagv = np.diag(v)
    diagib = np.diag(ib)
    diagvnorm = np.diag(v / np.abs(v))
    ds_dva = 1j * diagv @ np.conj(diagib - ybus @ diagv)
    ds_dvm = diagv @ np.conj(ybus @ diagvnorm) + np.conj(diagib) @ diagvnorm
    j11 = ds_dva[np.ix_(pvpq, pvpq)].real
    j12 = ds_dvm[np.ix_(pvpq, pq)].real
    j21 = ds_dva[np.ix_(pq, pvpq)].imag
    j22 = ds_dvm[np.ix_(pq, pq)].imag
    return np.block([[j11, j12], [j21, j22]])


def _flow(vm, va, fr, to, g, b, bsh, reactive: bool) -> float:
    theta = va[fr] - va[to]
    if not reactive:
        return vm[fr] ** 2 * g - vm[fr] * vm[to] * (g * np.cos(theta) + b * np.sin(theta))
    return (-vm[fr] ** 2 * (b + bsh)
            - vm[fr] * vm[to] * (g * np.sin(theta) - b * np.cos(theta)))


def meas_h(vm: np.ndarray, va: np.ndarray, g: np.ndarray, b: np.ndarray,
           br_from: np.ndarray, br_to: np.ndarray, br_g: np.ndarray, br_b: np.ndarray,
           br_bsh: np.ndarray, m_kind: np.ndarray, m_loc: np.ndarray,
           m_side: np.ndarray) -> np.ndarray:
    """Predicted measurement values h(x) for the coded measurement arrays."""
    m = m_kind.shape[0]
    h = np.empty(m)
    for r in range(m):
        kind, loc = m_kind[r], m_loc[r]
        if kind == VMAG:
            h[r] = vm[loc]
        elif kind in (PINJ, QINJ):
            i = loc
            theta = va[i] - va
            if kind == PINJ:
                h[r] = vm[i] * np.dot(vm, g[i] * np.cos(theta) + b[i] * np.sin(theta))
            else:
                h[r] = vm[i] * np.dot(vm, g[i] * np.sin(theta) - b[i] * np.cos(theta))
        else:
            fr, to = (br_from[loc], br_to[loc]) if m_side[r] > 0 else (br_to[loc], br_from[loc])
            h[r] = _flow(vm, va, fr, to, br_g[loc], br_b[loc], br_bsh[loc],
                         reactive=(kind == QFLOW))
    return h


def meas_jacobian(vm: np.ndarray, va: np.ndarray, g: np.ndarray, b: np.ndarray,
                  br_from: np.ndarray, br_to: np.ndarray, br_g: np.ndarray,
                  br_b: np.ndarray, br_bsh: np.ndarray, m_kind: np.ndarray,
                  m_loc: np.ndarray, m_side: np.ndarray,
                  ang_col: np.ndarray) -> np.ndarray:
    """Measurement Jacobian d h / d [theta_nonslack; vm_all].

    ang_col maps bus -> angle column (-1 for the slack); magnitude columns
    follow the angle block in bus order.
    """
    n = vm.shape[0]
    n_ang = int((ang_col >= 0).sum())
    h_mat = np.zeros((m_kind.shape[0], n_ang + n))
    ang_ok = ang_col >= 0
    for r in range(m_kind.shape[0]):
        kind, loc = m_kind[r], m_loc[r]
        row = h_mat[r]
        if kind == VMAG:
            row[n_ang + loc] = 1.0
            continue
        if kind in (PINJ, QINJ):
            i = loc
            theta = va[i] - va
            cos_t, sin_t = np.cos(theta), np.sin(theta)
            p_i = vm[i] * np.dot(vm, g[i] * cos_t + b[i] * sin_t)
            q_i = vm[i] * np.dot(vm, g[i] * sin_t - b[i] * cos_t)
            if kind == PINJ:
                d_ang = vm[i] * vm * (g[i] * sin_t - b[i] * cos_t)
                d_ang[i] = -q_i - b[i, i] * vm[i] ** 2
                d_vm = vm[i] * (g[i] * cos_t + b[i] * sin_t)
                d_vm[i] = p_i / vm[i] + g[i, i] * vm[i]
            else:
                d_ang = -vm[i] * vm * (g[i] * cos_t + b[i] * sin_t)
                d_ang[i] = p_i - g[i, i] * vm[i] ** 2
                d_vm = vm[i] * (g[i] * sin_t - b[i] * cos_t)
                d_vm[i] = q_i / vm[i] - b[i, i] * vm[i]
            row[ang_col[ang_ok]] = d_ang[ang_ok]
            row[n_ang:] = d_vm
            continue
        fr, to = (br_from[loc], br_to[loc]) if m_side[r] > 0 else (br_to[loc], br_from[loc])
        gb, bb, bsh = br_g[loc], br_b[loc], br_bsh[loc]
        theta = va[fr] - va[to]
        cos_t, sin_t = np.cos(theta), np.sin(theta)
        if kind == PFLOW:
            d_fr_ang = vm[fr] * vm[to] * (gb * sin_t - bb * cos_t)
            d_to_ang = -d_fr_ang
            d_fr_vm = 2.0 * gb * vm[fr] - vm[to] * (gb * cos_t + bb * sin_t)
            d_to_vm = -vm[fr] * (gb * cos_t + bb * sin_t)
        else:
            d_fr_ang = -vm[fr] * vm[to] * (gb * cos_t + bb * sin_t)
            d_to_ang = -d_fr_ang
            d_fr_vm = -2.0 * vm[fr] * (bb + bsh) - vm[to] * (gb * sin_t - bb * cos_t)
            d_to_vm = -vm[fr] * (gb * sin_t - bb * cos_t)
        if ang_col[fr] >= 0:
            row[ang_col[fr]] = d_fr_ang
        if ang_col[to] >= 0:
            row[ang_col[to]] = d_to_ang
        row[n_ang + fr] = d_fr_vm
        row[n_ang + to] = d_to_vm
    return h_mat
