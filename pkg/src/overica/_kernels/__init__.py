"""Kernel backend selection.

The compiled extension is preferred; the numpy fallback is used when it is
missing or when OVERICA_PURE_PYTHON=1. `BACKEND` names the selected one.
"""

import os

import numpy as np

from . import pyref

if os.environ.get("OVERICA_PURE_PYTHON", "").strip() in ("1", "true", "yes"):
    _impl = pyref
    BACKEND = "python"
else:
    try:
        from . import _core as _impl

        BACKEND = "compiled"
    except ImportError:
        _impl = pyref
        BACKEND = "python"


def project_simplex(v):
    return _impl.project_simplex(np.ascontiguousarray(v, dtype=np.float64))


def project_psd_trace1(B):
    return _impl.project_psd_trace1(np.ascontiguousarray(B, dtype=np.float64))


def fista_mm(g, U, mu, max_iter, mm_rounds, tol, b0, p):
    return _impl.fista_mm(
        np.ascontiguousarray(g, dtype=np.float64),
        np.ascontiguousarray(U, dtype=np.float64),
        float(mu),
        int(max_iter),
        int(mm_rounds),
        float(tol),
        np.ascontiguousarray(b0, dtype=np.float64),
        int(p),
    )
