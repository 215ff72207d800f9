"""Monte Carlo backend selection.

The compiled Cython kernel is preferred when importable; the vectorized
numpy kernel is the fallback.  Both consume identical pre-generated
random buffers and share the floating-point accumulation order, so
switching backends never changes results beyond the last few ulps (and
never changes sampled outcomes).

Selection happens at import; override with the QNDTRADEOFF_BACKEND
environment variable ("cython" or "numpy") or `set_backend` at runtime.
"""

from __future__ import annotations

import os

import numpy as np

from . import _mc_numpy

try:
    from . import _mc_cython
except ImportError:
    _mc_cython = None

_BACKENDS = {"numpy": _mc_numpy}
if _mc_cython is not None:
    _BACKENDS["cython"] = _mc_cython

_requested = os.environ.get("QNDTRADEOFF_BACKEND")
if _requested:
    if _requested not in _BACKENDS:
        raise ImportError(
            f"QNDTRADEOFF_BACKEND={_requested!r} unavailable; "
            f"have {sorted(_BACKENDS)}"
        )
    _active = _requested
else:
    _active = "cython" if "cython" in _BACKENDS else "numpy"


def available_backends() -> tuple:
    return tuple(sorted(_BACKENDS))


def active_backend() -> str:
    return _active


def set_backend(name: str) -> None:
    global _active
    if name not in _BACKENDS:
        raise ValueError(f"unknown backend {name!r}; have {sorted(_BACKENDS)}")
    _active = name


def simulate_batch(d, psi_gauss, psi_fixed, twirl_gauss, u_out, adjoint, w, q, phase, est_idx):
    mod = _BACKENDS[_active]
    if mod is _mc_numpy:
        return mod.simulate_batch(
            d, psi_gauss, psi_fixed, twirl_gauss, u_out, adjoint, w, q, phase, est_idx
        )
    return mod.simulate_batch(
        d,
        psi_gauss,
        psi_fixed,
        twirl_gauss,
        u_out,
        adjoint,
        w,
        q,
        phase,
        est_idx.astype(np.int32),
    )
