"""Compiled kernel versus pure-numpy fallback: same draws, same story."""

import os
import subprocess
import sys

import numpy as np
import pytest

from qndtradeoff import active_backend, available_backends, set_backend
from qndtradeoff.channel import qubit_pointer_spec
from qndtradeoff.states import PureState
from qndtradeoff.tradeoff import (
    _batch_arrays,
    imperfect_protocol,
    mc_fg,
    perfect_protocol,
)

HAVE_CYTHON = "cython" in available_backends()
needs_both = pytest.mark.skipif(not HAVE_CYTHON, reason="compiled backend not built")


@pytest.fixture
def restore_backend():
    previous = active_backend()
    yield
    set_backend(previous)


def test_backend_registry():
    backends = available_backends()
    assert "numpy" in backends
    assert active_backend() in backends
    with pytest.raises(ValueError):
        set_backend("fortran")


def _collect_arrays(protocol, n, seed, fixed=None):
    return _batch_arrays(protocol, n, seed, 0, 1024, fixed)


@needs_both
@pytest.mark.parametrize(
    "protocol, fixed",
    [
        (perfect_protocol(3, 0.7, twirl=True), None),
        (perfect_protocol(2, 0.5, twirl=False), None),
        (imperfect_protocol(qubit_pointer_spec(0.7), strategy="unambiguous"), None),
        (perfect_protocol(3, 0.6, twirl=True), PureState.basis(3, 1)),
    ],
)
def test_backends_agree_sample_by_sample(restore_backend, protocol, fixed):
    n, seed = 4000, 90
    set_backend("cython")
    fc, gc, oc, wc, _ = _collect_arrays(protocol, n, seed, fixed)
    set_backend("numpy")
    fn, gn, on, wn, _ = _collect_arrays(protocol, n, seed, fixed)
    # identical outcome sequences, fidelities to float accumulation error
    assert np.array_equal(oc, on)
    assert np.nanmax(np.abs(fc - fn)) <= 1e-10
    both = ~(np.isnan(gc) | np.isnan(gn))
    assert np.array_equal(np.isnan(gc), np.isnan(gn))
    assert np.max(np.abs(gc[both] - gn[both])) <= 1e-10
    assert np.max(np.abs(wc[both] - wn[both])) <= 1e-10


@needs_both
def test_mc_estimates_backend_independent(restore_backend):
    protocol = perfect_protocol(2, 0.5)
    set_backend("cython")
    a = mc_fg(protocol, 3000, 91)
    set_backend("numpy")
    b = mc_fg(protocol, 3000, 91)
    assert abs(a.F - b.F) <= 1e-12
    assert abs(a.G - b.G) <= 1e-12


def test_env_var_selects_backend():
    code = "import qndtradeoff; print(qndtradeoff.active_backend())"
    env = dict(os.environ, QNDTRADEOFF_BACKEND="numpy")
    out = subprocess.run(
        [sys.executable, "-c", code], env=env, capture_output=True, text=True
    )
    assert out.returncode == 0
    assert out.stdout.strip() == "numpy"
    env["QNDTRADEOFF_BACKEND"] = "bogus"
    out = subprocess.run(
        [sys.executable, "-c", code], env=env, capture_output=True, text=True
    )
    assert out.returncode != 0
