"""Numba @njit implementations of the hot kernels (default backend).

Loop bodies mirror the closed-form partial derivatives in the numpy backend;
parity between the two is asserted in the test suite.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit

PFLOW, QFLOW, PINJ, QINJ, VMAG = 0, 1, 2, 3, 4
SLACK, PV, PQ = 0, 1, 2


@njit(cache=True)
def calc_injections(ybus, v):
    n = v.shape[0]
    p = np.empty(n)
    q = np.empty(n)
    for i in range(n):
        acc = 0.0 + 0.0j
        for j in range(n):
            acc += ybus[i, j] * v[j]
        s = v[i] * acc.conjugate()
        p[i] = s.real
        q[i] = s.imag
    return p, q


@njit(cache=True)
def gs_sweep(ybus, v, p_sched, q_sched, kind, v_set, q_min, q_max, accel):
    n = v.shape[0]
    for k in range(n):
        if kind[k] == SLACK:
            continue
        acc = 0.0 + 0.0j
        for j in range(n):
            acc += ybus[k, j] * v[j]
        clamped = False
        if kind[k] == PV:
            q = (v[k] * acc.conjugate()).imag
            if q < q_min[k]:
                q = q_min[k]
                clamped = True
            elif q > q_max[k]:
                q = q_max[k]
                clamped = True
            s = complex(p_sched[k], q)
        else:
            s = complex(p_sched[k], q_sched[k])
        rest = acc - ybus[k, k] * v[k]
        v_new = ((s / v[k]).conjugate() - rest) / ybus[k, k]
        v[k] = v[k] + accel * (v_new - v[k])
        if kind[k] == PV and not clamped:
            v[k] = v_set[k] * v[k] / abs(v[k])


@njit(cache=True)
def power_jacobian(ybus, v, pvpq, pq):
    n = v.shape[0]
    npvpq = pvpq.shape[0]
    npq = pq.shape[0]
    vm = np.abs(v)
    va = np.empty(n)
    for i in range(n):
        va[i] = math.atan2(v[i].imag, v[i].real)

    pos_pvpq = np.full(n, -1, dtype=np.int64)
    for a in range(npvpq):
        pos_pvpq[pvpq[a]] = a
    pos_pq = np.full(n, -1, dtype=np.int64)
    for a in range(npq):
        pos_pq[pq[a]] = a

    p = np.empty(n)
    q = np.empty(n)
    for i in range(n):
        pi = 0.0
        qi = 0.0
        for j in range(n):
            gij = ybus[i, j].real
            bij = ybus[i, j].imag
            th = va[i] - va[j]
            ct = math.cos(th)
            st = math.sin(th)
            pi += vm[i] * vm[j] * (gij * ct + bij * st)
            qi += vm[i] * vm[j] * (gij * st - bij * ct)
        p[i] = pi
        q[i] = qi

    m = npvpq + npq
    jac = np.zeros((m, m))
    for a in range(npvpq):
        i = pvpq[a]
        gii = ybus[i, i].real
        bii = ybus[i, i].imag
        for j in range(n):
            gij = ybus[i, j].real
            bij = ybus[i, j].imag
            th = va[i] - va[j]
            ct = math.cos(th)
            st = math.sin(th)
            if j == i:
                d_ang = -q[i] - bii * vm[i] * vm[i]
                d_vm = p[i] / vm[i] + gii * vm[i]
            else:
                d_ang = vm[i] * vm[j] * (gij * st - bij * ct)
                d_vm = vm[i] * (gij * ct + bij * st)
            if pos_pvpq[j] >= 0:
                jac[a, pos_pvpq[j]] = d_ang
            if pos_pq[j] >= 0:
                jac[a, npvpq + pos_pq[j]] = d_vm
    for c in range(npq):
        i = pq[c]
        gii = ybus[i, i].real
        bii = ybus[i, i].imag
        for j in range(n):
            gij = ybus[i, j].real
            bij = ybus[i, j].imag
            th = va[i] - va[j]
            ct = math.cos(th)
            st = math.sin(th)
            if j == i:
                d_ang = p[i] - gii * vm[i] * vm[i]
                d_vm = q[i] / vm[i] - bii * vm[i]
            else:
                d_ang = -vm[i] * vm[j] * (gij * ct + bij * st)
                d_vm = vm[i] * (gij * st - bij * ct)
            if pos_pvpq[j] >= 0:
                jac[npvpq + c, pos_pvpq[j]] = d_ang
            if pos_pq[j] >= 0:
                jac[npvpq + c, npvpq + pos_pq[j]] = d_vm
    return jac


@njit(cache=True)
def meas_h(vm, va, g, b, br_from, br_to, br_g, br_b, br_bsh, m_kind, m_loc, m_side):
    n = vm.shape[0]
    m = m_kind.shape[0]
    h = np.empty(m)
    for r in range(m):
        kind = m_kind[r]
        loc = m_loc[r]
        if kind == VMAG:
            h[r] = vm[loc]
        elif kind == PINJ or kind == QINJ:
            i = loc
            acc = 0.0
            for j in range(n):
                th = va[i] - va[j]
                if kind == PINJ:
                    acc += vm[j] * (g[i, j] * math.cos(th) + b[i, j] * math.sin(th))
                else:
                    acc += vm[j] * (g[i, j] * math.sin(th) - b[i, j] * math.cos(th))
            h[r] = vm[i] * acc
        else:
            if m_side[r] > 0:
                fr, to = br_from[loc], br_to[loc]
            else:
                fr, to = br_to[loc], br_from[loc]
            gb = br_g[loc]
            bb = br_b[loc]
            th = va[fr] - va[to]
            ct = math.cos(th)
            st = math.sin(th)
            if kind == PFLOW:
                h[r] = vm[fr] * vm[fr] * gb - vm[fr] * vm[to] * (gb * ct + bb * st)
            else:
                h[r] = (-vm[fr] * vm[fr] * (bb + br_bsh[loc])
                        - vm[fr] * vm[to] * (gb * st - bb * ct))
    return h


@njit(cache=True)
def meas_jacobian(vm, va, g, b, br_from, br_to, br_g, br_b, br_bsh,
                  m_kind, m_loc, m_side, ang_col):
    n = vm.shape[0]
    m = m_kind.shape[0]
    n_ang = 0
    for i in range(n):
        if ang_col[i] >= 0:
            n_ang += 1
    jac = np.zeros((m, n_ang + n))
    for r in range(m):
        kind = m_kind[r]
        loc = m_loc[r]
        if kind == VMAG:
            jac[r, n_ang + loc] = 1.0
            continue
        if kind == PINJ or kind == QINJ:
            i = loc
            p_i = 0.0
            q_i = 0.0
            for j in range(n):
                th = va[i] - va[j]
                ct = math.cos(th)
                st = math.sin(th)
                p_i += vm[i] * vm[j] * (g[i, j] * ct + b[i, j] * st)
                q_i += vm[i] * vm[j] * (g[i, j] * st - b[i, j] * ct)
            for j in range(n):
                th = va[i] - va[j]
                ct = math.cos(th)
                st = math.sin(th)
                if j == i:
                    if kind == PINJ:
                        d_ang = -q_i - b[i, i] * vm[i] * vm[i]
                        d_vm = p_i / vm[i] + g[i, i] * vm[i]
                    else:
                        d_ang = p_i - g[i, i] * vm[i] * vm[i]
                        d_vm = q_i / vm[i] - b[i, i] * vm[i]
                else:
                    if kind == PINJ:
                        d_ang = vm[i] * vm[j] * (g[i, j] * st - b[i, j] * ct)
                        d_vm = vm[i] * (g[i, j] * ct + b[i, j] * st)
                    else:
                        d_ang = -vm[i] * vm[j] * (g[i, j] * ct + b[i, j] * st)
                        d_vm = vm[i] * (g[i, j] * st - b[i, j] * ct)
                if ang_col[j] >= 0:
                    jac[r, ang_col[j]] = d_ang
                jac[r, n_ang + j] = d_vm
            continue
        if m_side[r] > 0:
            fr, to = br_from[loc], br_to[loc]
        else:
            fr, to = br_to[loc], br_from[loc]
        gb = br_g[loc]
        bb = br_b[loc]
        bsh = br_bsh[loc]
        th = va[fr] - va[to]
        ct = math.cos(th)
        st = math.sin(th)
        if kind == PFLOW:
            d_fr_ang = vm[fr] * vm[to] * (gb * st - bb * ct)
            d_fr_vm = 2.0 * gb * vm[fr] - vm[to] * (gb * ct + bb * st)
            d_to_vm = -vm[fr] * (gb * ct + bb * st)
        else:
            d_fr_ang = -vm[fr] * vm[to] * (gb * ct + bb * st)
            d_fr_vm = -2.0 * vm[fr] * (bb + bsh) - vm[to] * (gb * st - bb * ct)
            d_to_vm = -vm[fr] * (gb * st - bb * ct)
        if ang_col[fr] >= 0:
            jac[r, ang_col[fr]] = d_fr_ang
        if ang_col[to] >= 0:
            jac[r, ang_col[to]] = -d_fr_ang
        jac[r, n_ang + fr] = d_fr_vm
        jac[r, n_ang + to] = d_to_vm
    return jac
