"""Vectorized numpy Monte Carlo kernel (fallback backend).

Implements the same per-sample pipeline as the compiled kernel:
build the input state from its Gaussian draw (or take a fixed state),
orthonormalize the twirl matrix, rotate into the measured basis, pick a
readout outcome from one uniform, and evaluate both single-run
fidelities from the precompiled pointer forms.

Reductions deliberately use plain einsum (no optimized contraction
paths), whose accumulation order matches the compiled kernel's loops, so
the two backends produce bit-identical outcome sequences.
"""

from __future__ import annotations

import numpy as np


def _gauss_to_states(gauss: np.ndarray) -> np.ndarray:
    z = gauss[:, 0::2] + 1j * gauss[:, 1::2]
    sq = gauss[:, 0::2] ** 2 + gauss[:, 1::2] ** 2
    norm = np.sqrt(np.einsum("mi->m", sq))
    return z / norm[:, None]


def _gauss_to_twirls(gauss: np.ndarray, d: int) -> np.ndarray:
    """Row-major complex fill then column-by-column Gram-Schmidt."""
    m = gauss.shape[0]
    z = (gauss[:, 0::2] + 1j * gauss[:, 1::2]).reshape(m, d, d)
    t = np.empty_like(z)
    for k in range(d):
        v = z[:, :, k].copy()
        for j in range(k):
            qj = t[:, :, j]
            proj = np.einsum("mi,mi->m", qj.conj(), v)
            v -= proj[:, None] * qj
        sq = v.real**2 + v.imag**2
        norm = np.sqrt(np.einsum("mi->m", sq))
        t[:, :, k] = v / norm[:, None]
    return t


def simulate_batch(d, psi_gauss, psi_fixed, twirl_gauss, u_out, adjoint, w, q, phase, est_idx):
    m = u_out.shape[0]
    n_out = q.shape[0]
    if psi_fixed is not None:
        amps = np.broadcast_to(psi_fixed, (m, d))
    else:
        amps = _gauss_to_states(psi_gauss)
    if twirl_gauss is not None:
        twirls = _gauss_to_twirls(twirl_gauss, d)
        amps = np.einsum("mij,mj->mi", twirls, amps)
    c = np.einsum("ij,mj->mi", adjoint, amps)
    csq = c.real**2 + c.imag**2

    probs = np.einsum("mi,ki->mk", csq, q)
    total = np.einsum("mk->m", probs)
    threshold = u_out * total
    cum = np.cumsum(probs, axis=1)
    outcome = np.minimum(
        (cum <= threshold[:, None]).sum(axis=1), n_out - 1
    )
    rows = np.arange(m)
    p_sel = probs[rows, outcome]

    z = csq * phase[None, :]
    w_sel = w[outcome]
    f = np.einsum("mi,mij,mj->m", z, w_sel.conj(), z.conj()).real / p_sel

    e_sel = est_idx[outcome]
    conclusive = e_sel >= 0
    e_safe = np.where(conclusive, e_sel, 0)
    g = csq[rows, e_safe]
    weight = g * q[outcome, e_safe] / p_sel
    g = np.where(conclusive, g, np.nan)
    weight = np.where(conclusive, weight, np.nan)
    return f, g, outcome.astype(np.int64), weight
