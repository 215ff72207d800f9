"""Dense complex linear algebra for small bipartite systems.

Everything is plain numpy: vectors are 1-D complex arrays, matrices 2-D.
One global index convention is used throughout the package: in a tensor
product the system factor is the slow (left) index and the ancilla the
fast one, idx = i_sys * dim_anc + i_anc.
"""

from __future__ import annotations

import numpy as np

# Shared tolerances.  Unitarity and eigenvector residuals live at the
# 1e-10 scale, Hermiticity and trace bookkeeping at 1e-12.
TOL_UNITARY = 1e-10
TOL_HERM = 1e-12
TOL_NORM = 1e-10

# Gram-Schmidt completion drops candidate basis vectors whose residual
# norm falls below this (near-parallel to the span built so far).
GS_SKIP_THRESHOLD = 1e-8


def max_abs(a: np.ndarray) -> float:
    """Largest entry magnitude, 0 for empty input."""
    a = np.asarray(a)
    return float(np.abs(a).max()) if a.size else 0.0


def dagger(m: np.ndarray) -> np.ndarray:
    return m.conj().T


def unitarity_defect(u: np.ndarray) -> float:
    """max |U†U - I|."""
    u = np.asarray(u)
    return max_abs(u.conj().T @ u - np.eye(u.shape[0]))


def hermiticity_defect(m: np.ndarray) -> float:
    """max |M - M†|."""
    m = np.asarray(m)
    return max_abs(m - m.conj().T)


def tensor(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Kronecker product; the first factor carries the slow index."""
    return np.kron(np.asarray(a), np.asarray(b))


def partial_trace(
    rho: np.ndarray, dims: tuple[int, int], over: str = "second"
) -> np.ndarray:
    """Reduced matrix of a bipartite operator.

    Parameters
    ----------
    rho : (dA*dB, dA*dB) array on the product space, first factor slow.
    dims : (dA, dB) factor dimensions.
    over : "second" traces out the fast (ancilla) factor, "first" the
        slow one.
    """
    rho = np.asarray(rho)
    da, db = int(dims[0]), int(dims[1])
    if rho.shape != (da * db, da * db):
        raise ValueError(
            f"matrix shape {rho.shape} does not factor as ({da}*{db})**2"
        )
    r = rho.reshape(da, db, da, db)
    if over == "second":
        return np.einsum("iaja->ij", r)
    if over == "first":
        return np.einsum("iaib->ab", r)
    raise ValueError("over must be 'first' or 'second'")


def hermitian_eig(m: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition of a Hermitian matrix.

    Returns (eigenvalues ascending, eigenvector columns).  Non-Hermitian
    input (defect above TOL_HERM) is rejected.
    """
    m = np.asarray(m)
    defect = hermiticity_defect(m)
    if defect > TOL_HERM:
        raise ValueError(f"matrix is not Hermitian (defect {defect:.3e})")
    w, v = np.linalg.eigh(m)
    return w, v


def _complete_orthonormal(v: np.ndarray) -> np.ndarray:
    """Orthonormal basis with v as the first column.

    Remaining columns come from Gram-Schmidt over the canonical basis in
    index order, skipping candidates nearly parallel to the span built so
    far.  Deterministic by construction.
    """
    n = v.shape[0]
    cols = [v]
    for k in range(n):
        if len(cols) == n:
            break
        w = np.zeros(n, dtype=complex)
        w[k] = 1.0
        for c in cols:
            w = w - c * (c.conj() @ w)
        nrm = np.linalg.norm(w)
        if nrm > GS_SKIP_THRESHOLD:
            cols.append(w / nrm)
    if len(cols) != n:
        raise RuntimeError("orthonormal completion failed")
    return np.stack(cols, axis=1)


def unitary_with_column(target: np.ndarray, source: np.ndarray) -> np.ndarray:
    """Deterministic unitary V with V @ source = target.

    Both vectors must be normalized and of equal length.  V is built as
    B_t @ B_s† from the canonical orthonormal completions of target and
    source, so equal inputs give exactly the identity.
    """
    target = np.asarray(target, dtype=complex)
    source = np.asarray(source, dtype=complex)
    if target.shape != source.shape or target.ndim != 1:
        raise ValueError("target and source must be vectors of equal length")
    for name, vec in (("target", target), ("source", source)):
        if abs(np.linalg.norm(vec) - 1.0) > TOL_NORM:
            raise ValueError(f"{name} vector is not normalized")
    bt = _complete_orthonormal(target)
    bs = _complete_orthonormal(source)
    return bt @ bs.conj().T
