#!/usr/bin/env python3
"""Benchmark the numba kernels against the pure-numpy fallback.

Builds synthetic ring-with-chords systems of growing size and times each hot
kernel on both backends. Run from the repo root:

    python3 benchmarks/bench_kernels.py --sizes 50 200 500 --repeats 7
"""

from __future__ import annotations

import argparse
import statistics
import time

import numpy as np

from sldkit.kernels import numba_backend, numpy_backend

KERNELS = ("calc_injections", "power_jacobian", "gs_sweep", "meas_h", "meas_jacobian")


def synthetic_system(n: int, seed: int = 0):
    """Ring of n buses plus n//3 random chords; measurement set covering
    every bus (V, P, Q) and every branch (P, Q flows)."""
    rng = np.random.default_rng(seed)
    edges = [(i, (i + 1) % n) for i in range(n)]
    chords = {(int(a), int(b)) for a, b in
              zip(rng.integers(0, n, n // 3), rng.integers(0, n, n // 3)) if a != b}
    edges.extend(sorted(chords))
    nb = len(edges)
    ybus = np.zeros((n, n), dtype=complex)
    br_g = np.empty(nb)
    br_b = np.empty(nb)
    br_bsh = rng.uniform(0.0, 0.02, nb)
    fr = np.empty(nb, dtype=np.int64)
    to = np.empty(nb, dtype=np.int64)
    for k, (i, j) in enumerate(edges):
        y = 1.0 / complex(rng.uniform(0.005, 0.05), rng.uniform(0.05, 0.3))
        ybus[i, i] += y + 1j * br_bsh[k]
        ybus[j, j] += y + 1j * br_bsh[k]
        ybus[i, j] -= y
        ybus[j, i] -= y
        fr[k], to[k] = i, j
        br_g[k], br_b[k] = y.real, y.imag
    v = rng.uniform(0.97, 1.05, n) * np.exp(1j * rng.uniform(-0.2, 0.2, n))

    kinds = np.concatenate([np.full(n, 4), np.full(n, 2), np.full(n, 3),
                            np.full(nb, 0), np.full(nb, 1)]).astype(np.int64)
    locs = np.concatenate([np.arange(n)] * 3 + [np.arange(nb)] * 2).astype(np.int64)
    sides = np.ones(kinds.size, dtype=np.int64)
    ang = np.full(n, -1, dtype=np.int64)
    ang[1:] = np.arange(n - 1)
    return {
        "ybus": ybus, "v": v, "fr": fr, "to": to,
        "br_g": br_g, "br_b": br_b, "br_bsh": br_bsh,
        "kinds": kinds, "locs": locs, "sides": sides, "ang": ang,
    }


def make_calls(backend, data):
    n = data["v"].size
    ybus, v = data["ybus"], data["v"]
    vm, va = np.abs(v), np.angle(v)
    g = np.ascontiguousarray(ybus.real)
    b = np.ascontiguousarray(ybus.imag)
    pvpq = np.arange(1, n, dtype=np.int64)
    pq = np.arange(1 + n // 5, n, dtype=np.int64)
    kind = np.full(n, 2, dtype=np.int64)
    kind[0] = 0
    kind[1:1 + n // 5] = 1
    p_sched = np.zeros(n)
    q_sched = np.zeros(n)
    v_set = np.ones(n)
    q_lim = np.full(n, np.inf)

    def gs_call():
        backend.gs_sweep(ybus, v.copy(), p_sched, q_sched, kind, v_set,
                         -q_lim, q_lim, 1.6)

    return {
        "calc_injections": lambda: backend.calc_injections(ybus, v),
        "power_jacobian": lambda: backend.power_jacobian(ybus, v, pvpq, pq),
        "gs_sweep": gs_call,
        "meas_h": lambda: backend.meas_h(
            vm, va, g, b, data["fr"], data["to"], data["br_g"], data["br_b"],
            data["br_bsh"], data["kinds"], data["locs"], data["sides"]),
        "meas_jacobian": lambda: backend.meas_jacobian(
            vm, va, g, b, data["fr"], data["to"], data["br_g"], data["br_b"],
            data["br_bsh"], data["kinds"], data["locs"], data["sides"], data["ang"]),
    }


def time_call(fn, repeats: int) -> float:
    samples = []
    for _ in range(repeats):
        start = time.perf_counter()
        fn()
        samples.append(time.perf_counter() - start)
    return statistics.median(samples)


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--sizes", type=int, nargs="+", default=[50, 200, 500])
    parser.add_argument("--repeats", type=int, default=7)
    args = parser.parse_args()

    print(f"{'kernel':<16} {'n':>5} {'numpy [ms]':>12} {'numba [ms]':>12} {'speedup':>8}")
    print("-" * 58)
    for n in args.sizes:
        data = synthetic_system(n)
        np_calls = make_calls(numpy_backend, data)
        nb_calls = make_calls(numba_backend, data)
        for name in KERNELS:
            nb_calls[name]()  # JIT warmup outside the timed region
            t_np = time_call(np_calls[name], args.repeats)
            t_nb = time_call(nb_calls[name], args.repeats)
            speedup = t_np / t_nb if t_nb > 0 else float("inf")
            print(f"{name:<16} {n:>5} {t_np * 1e3:>12.3f} {t_nb * 1e3:>12.3f} "
                  f"{speedup:>7.1f}x")
        print("-" * 58)


if __name__ == "__main__":
    main()
