"""The QND measurement as a Kraus channel and as an explicit circuit.

Two constructions of the same physics live here and are cross-checked in
the tests:

* closed form: `kraus_qnd` builds the diagonal Kraus family
  (A_r)_ij = (alpha * delta_ir + beta / sqrt(d)) * delta_ij directly from
  an ancilla preparation;
* circuit form: `channel_from_circuit` compiles (interaction unitary,
  ancilla state, readout basis) into Kraus operators
  K_r = (I ⊗ ⟨b_r|) U (I ⊗ |tau⟩).

With the qudit CNOT interaction and computational readout the two agree
element-wise.  `qnd_unitary` generalizes the interaction to arbitrary
(possibly non-orthogonal) pointer states for the imperfect-coupling
study, and `phase_correction` removes the pointer-overlap phase that
otherwise spoils the fidelity trade-off for qubits.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .qlinalg import (
    TOL_HERM,
    TOL_UNITARY,
    max_abs,
    tensor,
    unitarity_defect,
    unitary_with_column,
)
from .states import PureState

ChannelApplication = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True, eq=False)
class AncillaPreparation:
    """Ancilla superposition tau = alpha * mu + beta * kappa.

    alpha in [0, 1] sets the measurement strength: alpha = 1 is a full
    projective measurement, alpha = 0 switches the interaction off.
    kappa is the uniform superposition, which the interaction leaves
    untouched; mu is the fiducial pointer.
    """

    dim: int
    alpha: float
    beta: float
    mu: PureState
    kappa: PureState
    tau: PureState

    def __post_init__(self):
        d = self.dim
        if self.alpha < 0 or self.beta < 0:
            raise ValueError("alpha and beta must be nonnegative")
        norm_residual = abs(
            self.alpha**2
            + self.beta**2
            + 2 * self.alpha * self.beta / np.sqrt(d)
            - 1.0
        )
        if norm_residual > 1e-12:
            raise ValueError(f"normalization residual {norm_residual:.3e}")
        overlap = self.mu.amplitudes.conj() @ self.kappa.amplitudes
        if abs(overlap - 1 / np.sqrt(d)) > 1e-12:
            raise ValueError("mu/kappa overlap must be 1/sqrt(d)")
        recon = self.alpha * self.mu.amplitudes + self.beta * self.kappa.amplitudes
        if max_abs(recon - self.tau.amplitudes) > 1e-12:
            raise ValueError("tau must equal alpha*mu + beta*kappa")


def make_ancilla(d: int, alpha: float) -> AncillaPreparation:
    """Ancilla preparation for measurement strength alpha in [0, 1].

    beta is the nonnegative root of the normalization quadratic, written
    as (sqrt(d - alpha^2 (d-1)) - alpha) / sqrt(d) so that the endpoint
    values beta(1) = 0 and beta(0) = 1 come out exact in floating point.
    """
    if not 0.0 <= alpha <= 1.0:
        raise ValueError("alpha must lie in [0, 1]")
    d = int(d)
    if d < 2:
        raise ValueError("dimension must be at least 2")
    beta = (np.sqrt(d - alpha**2 * (d - 1)) - alpha) / np.sqrt(d)
    beta = float(max(beta, 0.0))
    mu = PureState.basis(d, 0)
    kappa = PureState(d, np.full(d, 1 / np.sqrt(d), dtype=complex))
    tau = PureState(d, alpha * mu.amplitudes + beta * kappa.amplitudes)
    return AncillaPreparation(d, float(alpha), beta, mu, kappa, tau)


@dataclass(frozen=True, eq=False)
class KrausChannel:
    """Trace-preserving channel given by an ordered Kraus family."""

    dim: int
    kraus: tuple = field(repr=False)

    def __post_init__(self):
        mats = tuple(np.asarray(k, dtype=complex) for k in self.kraus)
        for k in mats:
            if k.shape != (self.dim, self.dim):
                raise ValueError("Kraus operators must be dim x dim")
        residual = kraus_completeness_residual(mats, self.dim)
        if residual > 1e-12:
            raise ValueError(f"completeness residual {residual:.3e}")
        for k in mats:
            k.setflags(write=False)
        object.__setattr__(self, "kraus", mats)

    def apply(self, rho: np.ndarray) -> np.ndarray:
        out = np.zeros((self.dim, self.dim), dtype=complex)
        for k in self.kraus:
            out += k @ rho @ k.conj().T
        return out

    def outcome_probabilities(self, psi: PureState) -> np.ndarray:
        return np.array(
            [np.linalg.norm(k @ psi.amplitudes) ** 2 for k in self.kraus]
        )

    def natural_matrix(self) -> np.ndarray:
        return natural_matrix(self.apply, self.dim)


def kraus_completeness_residual(mats, dim: int) -> float:
    """max |sum_r A_r† A_r - I|; usable on raw matrix lists."""
    acc = np.zeros((dim, dim), dtype=complex)
    for k in mats:
        k = np.asarray(k, dtype=complex)
        acc += k.conj().T @ k
    return max_abs(acc - np.eye(dim))


def natural_matrix(apply_channel: ChannelApplication, dim: int) -> np.ndarray:
    """Natural d² x d² representation, built column-by-column.

    Column a*d + b is the row-major vectorization of the channel applied
    to the matrix unit |a⟩⟨b|.  Used for process-level comparisons.
    """
    n = np.empty((dim * dim, dim * dim), dtype=complex)
    for a in range(dim):
        for b in range(dim):
            unit = np.zeros((dim, dim), dtype=complex)
            unit[a, b] = 1.0
            n[:, a * dim + b] = apply_channel(unit).ravel()
    return n


def kraus_qnd(prep: AncillaPreparation) -> KrausChannel:
    """Closed-form QND Kraus family, one diagonal operator per outcome."""
    d = prep.dim
    base = prep.beta / np.sqrt(d)
    mats = []
    for r in range(d):
        diag = np.full(d, base, dtype=complex)
        diag[r] += prep.alpha
        mats.append(np.diag(diag))
    return KrausChannel(d, tuple(mats))


def cnot_qudit(d: int) -> np.ndarray:
    """Permutation unitary |i⟩|j⟩ → |i⟩|i ⊕ j⟩ with ⊕ addition mod d."""
    if d < 2:
        raise ValueError("dimension must be at least 2")
    u = np.zeros((d * d, d * d))
    for i in range(d):
        for j in range(d):
            u[i * d + (i + j) % d, i * d + j] = 1.0
    return u


@dataclass(frozen=True, eq=False)
class QndSpec:
    """Description of a (possibly imperfect) QND coupling.

    system_basis columns are the measured basis {|a_i⟩}; pointer_states
    columns are the ancilla states {|mu_i⟩} the interaction correlates
    with them (normalized, not necessarily orthogonal); fiducial is the
    ancilla input state.  gram holds all pointer overlaps.
    """

    dim: int
    system_basis: np.ndarray = field(repr=False)
    pointer_states: np.ndarray = field(repr=False)
    fiducial: PureState = field(repr=False)
    gram: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        d = self.dim
        basis = np.asarray(self.system_basis, dtype=complex)
        pointers = np.asarray(self.pointer_states, dtype=complex)
        if basis.shape != (d, d) or pointers.shape != (d, d):
            raise ValueError("basis and pointer arrays must be dim x dim")
        defect = max_abs(basis.conj().T @ basis - np.eye(d))
        if defect > TOL_UNITARY:
            raise ValueError(f"system basis not orthonormal (defect {defect:.3e})")
        norms = np.linalg.norm(pointers, axis=0)
        if max_abs(norms - 1.0) > 1e-12:
            raise ValueError("pointer states must be normalized")
        if self.fiducial.dim != d:
            raise ValueError("fiducial dimension mismatch")
        basis.setflags(write=False)
        pointers.setflags(write=False)
        gram = pointers.conj().T @ pointers
        gram.setflags(write=False)
        object.__setattr__(self, "system_basis", basis)
        object.__setattr__(self, "pointer_states", pointers)
        object.__setattr__(self, "gram", gram)

    @property
    def phi(self) -> float:
        """Phase of the pointer overlap ⟨mu_1|mu_2⟩ (qubit case)."""
        if self.dim != 2:
            raise ValueError("phi is defined for qubit pointers only")
        return float(np.angle(self.gram[0, 1]))

    @property
    def overlap(self) -> float:
        """|⟨mu_1|mu_2⟩| (qubit case)."""
        if self.dim != 2:
            raise ValueError("overlap is defined for qubit pointers only")
        return float(np.abs(self.gram[0, 1]))


def qubit_pointer_spec(overlap: float, phase: float = 0.0) -> QndSpec:
    """Qubit QND coupling with pointer overlap |⟨mu_1|mu_2⟩| = overlap.

    mu_1 = |0⟩ and mu_2 = overlap * e^{i phase} |0⟩ + sqrt(1-overlap²)|1⟩,
    so arg⟨mu_1|mu_2⟩ = phase.  System basis is computational; the
    fiducial ancilla state is |0⟩.
    """
    if not 0.0 <= overlap <= 1.0:
        raise ValueError("overlap must lie in [0, 1]")
    pointers = np.zeros((2, 2), dtype=complex)
    pointers[0, 0] = 1.0
    pointers[0, 1] = overlap * np.exp(1j * phase)
    pointers[1, 1] = np.sqrt(max(0.0, 1.0 - overlap**2))
    return QndSpec(
        2,
        np.eye(2, dtype=complex),
        pointers,
        PureState.basis(2, 0),
    )


def qnd_unitary(spec: QndSpec) -> np.ndarray:
    """Controlled-rotation unitary realizing the coupling.

    U = sum_i |a_i⟩⟨a_i| ⊗ V_i with V_i mapping the fiducial ancilla
    state to pointer state i, so U(|a_i⟩|fiducial⟩) = |a_i⟩|mu_i⟩.
    """
    d = spec.dim
    u = np.zeros((d * d, d * d), dtype=complex)
    for i in range(d):
        a = spec.system_basis[:, i]
        v = unitary_with_column(spec.pointer_states[:, i], spec.fiducial.amplitudes)
        u += tensor(np.outer(a, a.conj()), v)
    return u


def channel_from_circuit(
    u: np.ndarray, tau: PureState, readout_basis: np.ndarray
) -> KrausChannel:
    """Kraus operators of (prepare ancilla, interact, read out ancilla).

    readout_basis columns are the measured orthonormal ancilla basis;
    K_r = (I ⊗ ⟨b_r|) U (I ⊗ |tau⟩).
    """
    u = np.asarray(u, dtype=complex)
    basis = np.asarray(readout_basis, dtype=complex)
    da = tau.dim
    ds = u.shape[0] // da
    if u.shape != (ds * da, ds * da):
        raise ValueError("unitary size must factor as system * ancilla")
    defect = unitarity_defect(u)
    if defect > TOL_UNITARY:
        raise ValueError(f"interaction is not unitary (defect {defect:.3e})")
    if basis.shape != (da, da) or max_abs(
        basis.conj().T @ basis - np.eye(da)
    ) > TOL_UNITARY:
        raise ValueError("readout basis must be a complete orthonormal set")
    u4 = u.reshape(ds, da, ds, da)
    kraus = np.einsum("ar,satb,b->rst", basis.conj(), u4, tau.amplitudes)
    return KrausChannel(ds, tuple(kraus))


def phase_correction(spec: QndSpec) -> np.ndarray:
    """Qubit unitary removing the pointer-overlap phase.

    diag(1, e^{-i phi}) in the measured basis, returned in the
    computational representation.
    """
    if spec.dim != 2:
        raise ValueError("phase correction is defined for qubits only")
    d = np.diag([1.0, np.exp(-1j * spec.phi)])
    a = spec.system_basis
    return a @ d @ a.conj().T


def twirl_wrap(apply_channel: ChannelApplication, t: np.ndarray) -> ChannelApplication:
    """Conjugate a channel by a twirl: rho → T† Λ(T rho T†) T."""
    t = np.asarray(t, dtype=complex)
    defect = unitarity_defect(t)
    if defect > TOL_UNITARY:
        raise ValueError(f"twirl is not unitary (defect {defect:.3e})")

    def wrapped(rho: np.ndarray) -> np.ndarray:
        return t.conj().T @ apply_channel(t @ rho @ t.conj().T) @ t

    return wrapped
