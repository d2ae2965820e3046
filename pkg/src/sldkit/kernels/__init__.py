"""Hot-kernel backend selection.

The numba @njit backend is the default; set SLDKIT_NO_NUMBA=1 to force the
pure-numpy fallback (it is also used automatically when numba is missing).
``benchmarks/bench_kernels.py`` compares both.
"""

from __future__ import annotations

import os

from . import numpy_backend
from .numpy_backend import PFLOW, PINJ, PQ, PV, QFLOW, QINJ, SLACK, VMAG

_FLAG = os.environ.get("SLDKIT_NO_NUMBA", "").strip().lower()
_FORCE_NUMPY = _FLAG in ("1", "true", "yes", "on")

if _FORCE_NUMPY:
    _impl = numpy_backend
    BACKEND = "numpy"
else:
    try:
        from . import numba_backend as _impl
        BACKEND = "numba"
    except ImportError:  # pragma: no cover - numba is a declared dependency
        _impl = numpy_backend
        BACKEND = "numpy"

calc_injections = _impl.calc_injections
gs_sweep = _impl.gs_sweep
power_jacobian = _impl.power_jacobian
meas_h = _impl.meas_h
meas_jacobian = _impl.meas_jacobian

__all__ = [
    "BACKEND", "calc_injections", "gs_sweep", "power_jacobian", "meas_h",
    "meas_jacobian", "numpy_backend",
    "PFLOW", "QFLOW", "PINJ", "QINJ", "VMAG", "SLACK", "PV", "PQ",
]
