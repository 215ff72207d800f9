"""State types, Haar-random sampling, and pure-state fidelity.

Sampling conventions (shared with the Monte Carlo kernels, so identical
seeds give identical states everywhere in the package):

* `haar_state` draws 2d Gaussians from the stream and uses them as
  interleaved real/imaginary parts, then normalizes;
* `haar_unitary` draws 2d² Gaussians as interleaved real/imaginary parts
  of a row-major d x d matrix and orthonormalizes it, fixing the phases
  so the factorization has a positive-diagonal triangular factor.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .qlinalg import hermiticity_defect, max_abs
from .rng import SeededRng

__all__ = [
    "PureState",
    "DensityMatrix",
    "SeededRng",
    "haar_state",
    "haar_unitary",
    "fidelity",
]

_TOL_STATE_NORM = 1e-12
_TOL_TRACE = 1e-10
_TOL_PSD = 1e-10


@dataclass(frozen=True, eq=False)
class PureState:
    """Normalized pure state of a d-level system."""

    dim: int
    amplitudes: np.ndarray = field(repr=False)

    def __post_init__(self):
        amps = np.array(self.amplitudes, dtype=complex)
        if amps.shape != (self.dim,):
            raise ValueError("amplitude vector length must equal dim")
        if not np.all(np.isfinite(amps)):
            raise ValueError("amplitudes must be finite")
        if abs(np.linalg.norm(amps) - 1.0) > _TOL_STATE_NORM:
            raise ValueError("state vector is not normalized")
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def normalized(cls, vec: np.ndarray) -> "PureState":
        vec = np.asarray(vec, dtype=complex)
        nrm = np.linalg.norm(vec)
        if nrm == 0:
            raise ValueError("cannot normalize the zero vector")
        return cls(len(vec), vec / nrm)

    @classmethod
    def basis(cls, dim: int, index: int) -> "PureState":
        vec = np.zeros(dim, dtype=complex)
        vec[index] = 1.0
        return cls(dim, vec)

    def projector(self) -> np.ndarray:
        return np.outer(self.amplitudes, self.amplitudes.conj())


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Valid density matrix: Hermitian, unit trace, positive semidefinite."""

    dim: int
    matrix: np.ndarray = field(repr=False)

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        if m.shape != (self.dim, self.dim):
            raise ValueError("matrix must be dim x dim")
        defect = hermiticity_defect(m)
        if defect > 1e-12:
            raise ValueError(f"matrix is not Hermitian (defect {defect:.3e})")
        tr = m.trace()
        if abs(tr - 1.0) > _TOL_TRACE:
            raise ValueError(f"trace is {tr:.12g}, not 1")
        w = np.linalg.eigvalsh((m + m.conj().T) / 2)
        if w[0] < -_TOL_PSD:
            raise ValueError(f"matrix has negative eigenvalue {w[0]:.3e}")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @classmethod
    def from_pure(cls, psi: PureState) -> "DensityMatrix":
        return cls(psi.dim, psi.projector())

    @classmethod
    def maximally_mixed(cls, dim: int) -> "DensityMatrix":
        return cls(dim, np.eye(dim, dtype=complex) / dim)


def haar_state(d: int, rng: SeededRng) -> PureState:
    """Haar-random pure state in dimension d >= 2."""
    if d < 2:
        raise ValueError("dimension must be at least 2")
    g = rng.gaussians(2 * d)
    amps = g[0::2] + 1j * g[1::2]
    return PureState(d, amps / np.linalg.norm(amps))


def _gram_schmidt_columns(z: np.ndarray) -> np.ndarray:
    """Orthonormalize columns in order (modified Gram-Schmidt)."""
    d = z.shape[0]
    q = np.array(z, dtype=complex)
    for k in range(d):
        v = q[:, k]
        for j in range(k):
            v = v - q[:, j] * (q[:, j].conj() @ v)
        q[:, k] = v / np.linalg.norm(v)
    return q


def haar_unitary(d: int, rng: SeededRng) -> np.ndarray:
    """Haar-random unitary in dimension d >= 2.

    Gram-Schmidt on a complex Gaussian matrix equals its QR factor with
    the R diagonal made real positive, which makes the distribution Haar
    and the output a deterministic function of the Gaussian draw.
    """
    if d < 2:
        raise ValueError("dimension must be at least 2")
    g = rng.gaussians(2 * d * d)
    z = (g[0::2] + 1j * g[1::2]).reshape(d, d)
    return _gram_schmidt_columns(z)


def fidelity(psi: PureState, rho: DensityMatrix) -> float:
    """Overlap ⟨ψ|ρ|ψ⟩, clamped to [0, 1]."""
    if psi.dim != rho.dim:
        raise ValueError("state and density matrix dimensions differ")
    val = psi.amplitudes.conj() @ rho.matrix @ psi.amplitudes
    if abs(val.imag) > 1e-12:
        raise ValueError(f"fidelity has imaginary residue {val.imag:.3e}")
    return float(min(1.0, max(0.0, val.real)))
