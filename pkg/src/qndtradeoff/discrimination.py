"""POVMs for the ancilla readout: projective, minimum-error, unambiguous.

Outcome labels are 0-based estimate indices (label r means "pointer state
r"), with the string `INCONCLUSIVE` reserved for the unambiguous
strategy's third outcome.  Equal priors are hard-coded throughout.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .qlinalg import hermitian_eig, max_abs
from .rng import SeededRng
from .states import PureState

INCONCLUSIVE = "inconclusive"

# Eigenvalues this close to zero count as the null space in the
# minimum-error construction (tie-broken to outcome 0).
_TIE_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class Povm:
    """Measurement with elements and matching outcome labels.

    Validation of positivity/completeness is report-based via
    `povm_validate`, so deliberately broken element sets can be
    constructed and diagnosed.
    """

    dim: int
    elements: tuple = field(repr=False)
    labels: tuple
    degenerate: bool = False

    def __post_init__(self):
        mats = tuple(np.asarray(e, dtype=complex) for e in self.elements)
        for m in mats:
            if m.shape != (self.dim, self.dim):
                raise ValueError("POVM elements must be dim x dim")
            m.setflags(write=False)
        if len(self.labels) != len(mats):
            raise ValueError("one label per element required")
        object.__setattr__(self, "elements", mats)
        object.__setattr__(self, "labels", tuple(self.labels))

    def element_for(self, label) -> np.ndarray:
        return self.elements[self.labels.index(label)]


@dataclass(frozen=True)
class PovmReport:
    positivity_margin: float
    completeness_residual: float

    @property
    def ok(self) -> bool:
        return self.positivity_margin >= -1e-10 and self.completeness_residual <= 1e-10


def povm_validate(p: Povm) -> PovmReport:
    """Positivity margin (smallest element eigenvalue) and completeness."""
    margin = np.inf
    acc = np.zeros((p.dim, p.dim), dtype=complex)
    for e in p.elements:
        herm = (e + e.conj().T) / 2
        margin = min(margin, float(np.linalg.eigvalsh(herm)[0]))
        acc += e
    return PovmReport(float(margin), max_abs(acc - np.eye(p.dim)))


def projective_povm(basis: np.ndarray) -> Povm:
    """Rank-1 projectors onto the columns of an orthonormal basis."""
    basis = np.asarray(basis, dtype=complex)
    d = basis.shape[0]
    elements = tuple(
        np.outer(basis[:, k], basis[:, k].conj()) for k in range(d)
    )
    return Povm(d, elements, tuple(range(d)))


def helstrom_povm(mu1: PureState, mu2: PureState) -> Povm:
    """Minimum-error two-state discrimination for qubit pointers.

    Projects onto the positive/negative eigenspaces of
    (|mu1⟩⟨mu1| - |mu2⟩⟨mu2|)/2; null directions are tie-broken to
    outcome 0.  Identical states give a degenerate but valid POVM
    (error rate 1/2) with the `degenerate` flag set.
    """
    if mu1.dim != 2 or mu2.dim != 2:
        raise ValueError("minimum-error construction supports qubits only")
    overlap = abs(mu1.amplitudes.conj() @ mu2.amplitudes)
    delta = (mu1.projector() - mu2.projector()) / 2
    w, v = hermitian_eig(delta)
    p0 = np.zeros((2, 2), dtype=complex)
    p1 = np.zeros((2, 2), dtype=complex)
    for k in range(2):
        proj = np.outer(v[:, k], v[:, k].conj())
        if w[k] >= -_TIE_TOL:
            p0 += proj
        else:
            p1 += proj
    return Povm(2, (p0, p1), (0, 1), degenerate=bool(overlap >= 1 - _TIE_TOL))


def _qubit_perp(v: np.ndarray) -> np.ndarray:
    return np.array([-np.conj(v[1]), np.conj(v[0])])


def unambiguous_povm(mu1: PureState, mu2: PureState) -> Povm:
    """Unambiguous two-state discrimination for qubit pointers.

    Conclusive elements project onto the states orthogonal to the other
    pointer, scaled by 1/(1 + |⟨mu1|mu2⟩|) so the inconclusive remainder
    stays positive; the average inconclusive probability then attains its
    minimum |⟨mu1|mu2⟩|.
    """
    if mu1.dim != 2 or mu2.dim != 2:
        raise ValueError("unambiguous construction supports qubits only")
    overlap = abs(mu1.amplitudes.conj() @ mu2.amplitudes)
    if overlap > 1 - _TIE_TOL:
        raise ValueError("pointer states are linearly dependent")
    perp1 = _qubit_perp(mu1.amplitudes)
    perp2 = _qubit_perp(mu2.amplitudes)
    scale = 1.0 / (1.0 + overlap)
    s1 = scale * np.outer(perp2, perp2.conj())
    s2 = scale * np.outer(perp1, perp1.conj())
    s0 = np.eye(2) - s1 - s2
    return Povm(2, (s1, s2, s0), (0, 1, INCONCLUSIVE))


def error_rate(p: Povm, pointers) -> float:
    """Average misidentification probability over equally likely pointers.

    1 - (1/d) sum_r ⟨mu_r|element_r|mu_r⟩; requires a label for every
    estimate index and no inconclusive outcome.
    """
    d = len(pointers)
    if set(p.labels) != set(range(d)):
        raise ValueError("POVM labels must be exactly the estimate indices")
    hit = 0.0
    for r, mu in enumerate(pointers):
        e = p.element_for(r)
        hit += (mu.amplitudes.conj() @ e @ mu.amplitudes).real
    return float(1.0 - hit / d)


def sample_outcome(p: Povm, state: PureState, rng: SeededRng):
    """Born-rule draw; returns the label of the sampled element.

    Probabilities are renormalized when they sum to 1 within 1e-10;
    larger residuals (or an invalid POVM) raise.  The cumulative walk and
    threshold rule here match the Monte Carlo kernels exactly.
    """
    report = povm_validate(p)
    if not report.ok:
        raise ValueError(
            f"invalid POVM (margin {report.positivity_margin:.3e}, "
            f"residual {report.completeness_residual:.3e})"
        )
    amps = state.amplitudes
    probs = np.array(
        [max(0.0, (amps.conj() @ e @ amps).real) for e in p.elements]
    )
    total = probs.sum()
    if abs(total - 1.0) > 1e-10:
        raise ValueError(f"outcome probabilities sum to {total:.12g}")
    threshold = rng.uniforms(1)[0] * total
    cum = 0.0
    for k, prob in enumerate(probs):
        cum += prob
        if threshold < cum:
            return p.labels[k]
    return p.labels[len(probs) - 1]
