"""Backend parity: the numba kernels and the pure-numpy fallback must agree to
floating-point noise, and the env flag must select the fallback."""

import os
import subprocess
import sys

import numpy as np
import pytest

import sldkit.kernels as kernels
from sldkit.kernels import numpy_backend

numba_backend = pytest.importorskip("sldkit.kernels.numba_backend")


@pytest.fixture(scope="module")
def system_arrays():
    rng = np.random.default_rng(7)
    n = 10
    ybus = np.zeros((n, n), dtype=complex)
    for i in range(n - 1):   # chain plus a few chords
        y = 1.0 / complex(rng.uniform(0.0, 0.05), rng.uniform(0.05, 0.3))
        ybus[i, i] += y
        ybus[i + 1, i + 1] += y
        ybus[i, i + 1] -= y
        ybus[i + 1, i] -= y
    for i, j in ((0, 5), (2, 8), (3, 9)):
        y = 1.0 / complex(0.02, rng.uniform(0.1, 0.4))
        ybus[i, i] += y
        ybus[j, j] += y
        ybus[i, j] -= y
        ybus[j, i] -= y
    v = rng.uniform(0.95, 1.05, n) * np.exp(1j * rng.uniform(-0.3, 0.3, n))
    return ybus, v


def test_injections_parity(system_arrays):
    ybus, v = system_arrays
    p1, q1 = numpy_backend.calc_injections(ybus, v)
    p2, q2 = numba_backend.calc_injections(ybus, v)
    assert np.allclose(p1, p2, atol=1e-12)
    assert np.allclose(q1, q2, atol=1e-12)


def test_jacobian_parity(system_arrays):
    ybus, v = system_arrays
    n = v.size
    pvpq = np.arange(1, n, dtype=np.int64)
    pq = np.arange(2, n, dtype=np.int64)
    j1 = numpy_backend.power_jacobian(ybus, v, pvpq, pq)
    j2 = numba_backend.power_jacobian(ybus, v, pvpq, pq)
    assert np.allclose(j1, j2, atol=1e-11)


def test_gs_sweep_parity(system_arrays):
    ybus, v = system_arrays
    n = v.size
    kind = np.full(n, numpy_backend.PQ, dtype=np.int64)
    kind[0] = numpy_backend.SLACK
    kind[3] = numpy_backend.PV
    p = np.linspace(-0.5, 0.4, n)
    q = np.linspace(-0.2, 0.2, n)
    v_set = np.abs(v)
    q_min = np.full(n, -np.inf)
    q_max = np.full(n, np.inf)
    va = v.copy()
    vb = v.copy()
    numpy_backend.gs_sweep(ybus, va, p, q, kind, v_set, q_min, q_max, 1.6)
    numba_backend.gs_sweep(ybus, vb, p, q, kind, v_set, q_min, q_max, 1.6)
    assert np.allclose(va, vb, atol=1e-12)


def test_gs_sweep_parity_with_finite_limits(system_arrays):
    ybus, v = system_arrays
    n = v.size
    kind = np.full(n, numpy_backend.PQ, dtype=np.int64)
    kind[0] = numpy_backend.SLACK
    kind[2] = numpy_backend.PV
    kind[6] = numpy_backend.PV
    p = np.linspace(-0.4, 0.4, n)
    q = np.zeros(n)
    v_set = np.abs(v)
    q_min = np.full(n, -0.02)   # tight: forces the clamped code path
    q_max = np.full(n, 0.02)
    va = v.copy()
    vb = v.copy()
    numpy_backend.gs_sweep(ybus, va, p, q, kind, v_set, q_min, q_max, 1.2)
    numba_backend.gs_sweep(ybus, vb, p, q, kind, v_set, q_min, q_max, 1.2)
    assert np.allclose(va, vb, atol=1e-12)


def _measurement_arrays(n, n_branch, rng):
    fr = rng.integers(0, n, n_branch).astype(np.int64)
    to = ((fr + rng.integers(1, n, n_branch)) % n).astype(np.int64)
    g = rng.uniform(0.5, 4.0, n_branch)
    b = rng.uniform(-12.0, -2.0, n_branch)
    bsh = rng.uniform(0.0, 0.05, n_branch)
    kinds = np.array([0, 1, 2, 3, 4] * 3, dtype=np.int64)
    locs = np.concatenate([rng.integers(0, n_branch, 6),
                           rng.integers(0, n, 9)]).astype(np.int64)
    locs[:6] %= n_branch
    kinds = kinds[:15]
    sides = np.where(rng.random(15) < 0.5, 1, -1).astype(np.int64)
    return fr, to, g, b, bsh, kinds, locs, sides


def test_measurement_kernels_parity(system_arrays):
    ybus, v = system_arrays
    n = v.size
    rng = np.random.default_rng(21)
    fr, to, g, b, bsh, kinds, locs, sides = _measurement_arrays(n, 6, rng)
    # flow rows index branches, others buses
    locs = np.where(kinds <= 1, locs % 6, locs % n).astype(np.int64)
    vm, va = np.abs(v), np.angle(v)
    gm = np.ascontiguousarray(ybus.real)
    bm = np.ascontiguousarray(ybus.imag)
    ang = np.full(n, -1, dtype=np.int64)
    ang[1:] = np.arange(n - 1)
    h1 = numpy_backend.meas_h(vm, va, gm, bm, fr, to, g, b, bsh, kinds, locs, sides)
    h2 = numba_backend.meas_h(vm, va, gm, bm, fr, to, g, b, bsh, kinds, locs, sides)
    assert np.allclose(h1, h2, atol=1e-12)
    j1 = numpy_backend.meas_jacobian(vm, va, gm, bm, fr, to, g, b, bsh,
                                     kinds, locs, sides, ang)
    j2 = numba_backend.meas_jacobian(vm, va, gm, bm, fr, to, g, b, bsh,
                                     kinds, locs, sides, ang)
    assert np.allclose(j1, j2, atol=1e-11)


def test_default_backend_is_numba():
    if os.environ.get("SLDKIT_NO_NUMBA", "").lower() in ("1", "true", "yes", "on"):
        pytest.skip("suite running with the fallback forced")
    assert kernels.BACKEND == "numba"


def test_env_flag_selects_numpy_fallback():
    code = ("import sldkit.kernels as k; print(k.BACKEND)")
    env = dict(os.environ, SLDKIT_NO_NUMBA="1")
    out = subprocess.run([sys.executable, "-c", code], capture_output=True,
                         text=True, env=env, check=True)
    assert out.stdout.strip() == "numpy"
