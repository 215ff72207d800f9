"""Fidelity trade-off: analytic formulas, tight bound, Monte Carlo.

The two figures of merit are Haar averages over input states: G (Eve's
estimation fidelity) and F (Bob's output fidelity).  For a d-level
system they obey

    sqrt(F - 1/(d+1)) <= sqrt(G - 1/(d+1)) + sqrt((d-1) (2/(d+1) - G)),

with the ancilla-coupling protocol saturating the bound along its whole
boundary.  This module evaluates the closed forms, the bound, and a full
Monte Carlo of the protocol (twirl, interaction, readout, collapse), and
checks they agree.

`simulate_run` is a deliberately explicit single-run reference: it
builds the joint state, applies the interaction unitary, and traces out
the ancilla with the generic linear-algebra ops.  `mc_fg` runs the same
protocol through a batch kernel (compiled when available) consuming the
identical random streams; tests hold the two routes together.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from . import _backend
from .channel import (
    KrausChannel,
    QndSpec,
    cnot_qudit,
    make_ancilla,
    phase_correction,
    qnd_unitary,
)
from .discrimination import (
    INCONCLUSIVE,
    Povm,
    helstrom_povm,
    povm_validate,
    projective_povm,
    unambiguous_povm,
)
from .qlinalg import partial_trace, tensor
from .rng import SeededRng, batch_substream_uniforms, gaussian_pairs
from .states import DensityMatrix, PureState, fidelity, haar_unitary

_STRATEGIES = ("projective", "minerror", "unambiguous", "custom")


@dataclass(frozen=True)
class TradeoffPoint:
    """One (G, F) pair, with standard errors when Monte Carlo produced it."""

    F: float
    G: float
    se_F: float | None = None
    se_G: float | None = None
    n_samples: int | None = None


@dataclass(frozen=True)
class SubensembleStats:
    """Monte Carlo statistics split on conclusive readout outcomes.

    F_C and G_C are conditioned on conclusive runs.  unconditional_F
    averages Bob's fidelity over all runs and is a diagnostic only; no
    optimality is claimed for it.  misidentified counts conclusive runs
    whose output state was not the estimated basis state (weight below
    1 - 1e-10); the unambiguous strategy must keep it at zero.
    """

    conclusive_fraction: float
    F_C: float
    G_C: float
    se_fraction: float
    se_F_C: float
    se_G_C: float
    n_samples: int
    n_conclusive: int
    misidentified: int
    unconditional_F: float
    se_unconditional_F: float


def bound_rhs(g: float, d: int) -> float:
    """Largest output fidelity F compatible with estimation fidelity G.

    Defined for G in [1/(d+1), 2/(d+1)]; out-of-domain input raises with
    the offending side named.  Radicands within 1e-10 below zero are
    clamped so boundary points computed in floating point pass.
    """
    d = int(d)
    r1 = g - 1.0 / (d + 1)
    r2 = 2.0 / (d + 1) - g
    if r1 < -1e-10:
        raise ValueError(
            f"G={g:.12g} below 1/(d+1): first radicand negative ({r1:.3e})"
        )
    if r2 < -1e-10:
        raise ValueError(
            f"G={g:.12g} above 2/(d+1): second radicand negative ({r2:.3e})"
        )
    root = np.sqrt(max(r1, 0.0)) + np.sqrt((d - 1) * max(r2, 0.0))
    return float(1.0 / (d + 1) + root**2)


def saturation_gap(p: TradeoffPoint, d: int) -> float:
    """bound_rhs(G) - F; zero (to float error) for optimal points."""
    return bound_rhs(p.G, d) - p.F


def analytic_fg(d: int, alpha: float) -> TradeoffPoint:
    """Closed-form (F, G) of the coupling-strength-alpha protocol.

    With s = sqrt(d - alpha^2 (d-1)) the fidelities are
    F = (1 + s^2)/(d+1) and G = (1 + ((d-1) alpha + s)^2 / d^2)/(d+1).
    The endpoint values are returned in exact rational form: alpha=0
    gives (F, G) = (1, 1/d) and alpha=1 gives (2/(d+1), 2/(d+1)).
    """
    d = int(d)
    if d < 2:
        raise ValueError("dimension must be at least 2")
    if not 0.0 <= alpha <= 1.0:
        raise ValueError("alpha must lie in [0, 1]")
    if alpha == 0.0:
        return TradeoffPoint(F=1.0, G=1.0 / d)
    if alpha == 1.0:
        return TradeoffPoint(F=2.0 / (d + 1), G=2.0 / (d + 1))
    s_sq = d - alpha**2 * (d - 1)
    f = (1.0 + s_sq) / (d + 1)
    t = ((d - 1) * alpha + np.sqrt(s_sq)) / d
    g = (1.0 + t**2) / (d + 1)
    return TradeoffPoint(F=float(f), G=float(g))


def kraus_fg(channel: KrausChannel, estimate_basis: np.ndarray | None = None) -> TradeoffPoint:
    """(F, G) of a channel whose outcomes map to basis-state estimates.

    F = (d + sum_r |tr A_r|^2) / (d (d+1));
    G = (d + sum_r ⟨a_r|A_r† A_r|a_r⟩) / (d (d+1)).
    """
    d = channel.dim
    if estimate_basis is None:
        estimate_basis = np.eye(d, dtype=complex)
    basis = np.asarray(estimate_basis, dtype=complex)
    if len(channel.kraus) != d or basis.shape != (d, d):
        raise ValueError("need one Kraus operator per estimate basis state")
    tr_sum = 0.0
    hit_sum = 0.0
    for r, a in enumerate(channel.kraus):
        tr_sum += abs(np.trace(a)) ** 2
        col = basis[:, r]
        hit_sum += (col.conj() @ (a.conj().T @ a) @ col).real
    denom = d * (d + 1)
    return TradeoffPoint(F=float((d + tr_sum) / denom), G=float((d + hit_sum) / denom))


def imperfect_fg(spec: QndSpec, p: Povm, phase_fix: bool = True) -> TradeoffPoint:
    """(F, G) for an imperfect coupling with a conclusive readout POVM.

    G = (2 - P_e)/(d+1) with P_e the readout's average error rate on the
    pointer states; F = (2 + S/d)/(d+1) with S the off-diagonal pointer
    Gram sum.  With phase_fix (qubits only) the overlap phase is removed,
    S = 2 |⟨mu_1|mu_2⟩|, which is what the corrected protocol attains.
    """
    from .discrimination import error_rate

    d = spec.dim
    if INCONCLUSIVE in p.labels:
        raise ValueError("inconclusive readout: use the subensemble path")
    pointers = [PureState(d, spec.pointer_states[:, i]) for i in range(d)]
    pe = error_rate(p, pointers)
    g = (2.0 - pe) / (d + 1)
    if phase_fix:
        if d != 2:
            raise ValueError("phase correction is defined for qubits only")
        s = 2.0 * abs(spec.gram[0, 1])
    else:
        s_complex = spec.gram.sum() - np.trace(spec.gram)
        if abs(s_complex.imag) > 1e-10:
            warnings.warn(
                f"pointer Gram sum has imaginary residual {s_complex.imag:.3e}",
                stacklevel=2,
            )
        s = s_complex.real
    f = (2.0 + s / d) / (d + 1)
    return TradeoffPoint(F=float(f), G=float(g))


def qubit_minerror_point(overlap: float, phase: float = 0.0) -> TradeoffPoint:
    """Closed-form (F, G) for qubit pointers under minimum-error readout.

    F = (2 + overlap cos(phase))/3, G = (3 + sqrt(1 - overlap^2))/6.
    The bound is saturated exactly when the overlap phase vanishes.
    """
    if not 0.0 <= overlap <= 1.0:
        raise ValueError("overlap must lie in [0, 1]")
    f = (2.0 + overlap * np.cos(phase)) / 3.0
    g = (3.0 + np.sqrt(1.0 - overlap**2)) / 6.0
    return TradeoffPoint(F=float(f), G=float(g))


@dataclass(frozen=True, eq=False)
class Protocol:
    """Closed enumeration of simulated protocols.

    kind "perfect": coupling strength alpha, computational measured
    basis, projective ancilla readout.  kind "imperfect": explicit
    pointer states with a readout strategy in {projective, minerror,
    unambiguous, custom}.  twirl wraps every run in a fresh Haar unitary;
    phase_fix (qubits) applies the overlap-phase correction to Bob's
    state.
    """

    kind: str
    dim: int
    alpha: float | None = None
    spec: QndSpec | None = None
    strategy: str = "projective"
    povm: Povm | None = None
    twirl: bool = True
    phase_fix: bool = False

    def readout_povm(self) -> Povm:
        """The ancilla POVM this protocol measures."""
        if self.kind == "perfect":
            return projective_povm(np.eye(self.dim))
        pointers = [
            PureState(self.dim, self.spec.pointer_states[:, i])
            for i in range(self.dim)
        ]
        if self.strategy == "projective":
            return projective_povm(np.eye(self.dim))
        if self.strategy == "minerror":
            return helstrom_povm(pointers[0], pointers[1])
        if self.strategy == "unambiguous":
            return unambiguous_povm(pointers[0], pointers[1])
        return self.povm

    def has_inconclusive(self) -> bool:
        return INCONCLUSIVE in self.readout_povm().labels

    def _compiled(self):
        return _compile(self)


def perfect_protocol(d: int, alpha: float, twirl: bool = True) -> Protocol:
    """QND protocol at coupling strength alpha on a d-level system."""
    make_ancilla(d, alpha)  # validates d and alpha
    return Protocol(kind="perfect", dim=int(d), alpha=float(alpha), twirl=twirl)


def imperfect_protocol(
    spec: QndSpec,
    strategy: str = "minerror",
    povm: Povm | None = None,
    twirl: bool = True,
    phase_fix: bool | None = None,
) -> Protocol:
    """Imperfect-coupling protocol with a chosen readout strategy.

    phase_fix defaults to on for qubit pointers (where the correction is
    defined) and off otherwise.
    """
    if strategy not in _STRATEGIES:
        raise ValueError(f"strategy must be one of {_STRATEGIES}")
    if strategy == "custom":
        if povm is None:
            raise ValueError("custom strategy requires a POVM")
        report = povm_validate(povm)
        if not report.ok:
            raise ValueError("custom POVM fails validation")
        if povm.dim != spec.dim:
            raise ValueError("POVM dimension must match the coupling")
    elif povm is not None:
        raise ValueError("explicit POVM only valid with the custom strategy")
    if phase_fix is None:
        phase_fix = spec.dim == 2
    if phase_fix and spec.dim != 2:
        raise ValueError("phase correction is defined for qubits only")
    return Protocol(
        kind="imperfect",
        dim=spec.dim,
        spec=spec,
        strategy=strategy,
        povm=povm,
        twirl=twirl,
        phase_fix=bool(phase_fix),
    )


@dataclass(frozen=True, eq=False)
class _Compiled:
    """Arrays the batch kernels consume, shared by both backends."""

    dim: int
    adjoint: np.ndarray  # measured-basis adjoint A†, applied to T|psi⟩
    w: np.ndarray  # (K, d, d): W_k[i, j] = ⟨omega_i|Pi_k|omega_j⟩
    q: np.ndarray  # (K, d): diagonal of W_k, real
    phase: np.ndarray  # (d,) phase-correction diagonal in the measured basis
    est_idx: np.ndarray  # (K,) estimate index per outcome, -1 inconclusive
    labels: tuple


def _compile(protocol: Protocol) -> _Compiled:
    d = protocol.dim
    if protocol.kind == "perfect":
        prep = make_ancilla(d, protocol.alpha)
        # row i: ancilla component paired with |a_i⟩ after the interaction
        omega = protocol.alpha * np.eye(d) + prep.beta / np.sqrt(d)
        omega = omega.astype(complex)
        adjoint = np.eye(d, dtype=complex)
        phase = np.ones(d, dtype=complex)
    else:
        spec = protocol.spec
        omega = spec.pointer_states.T.copy()
        adjoint = spec.system_basis.conj().T.copy()
        if protocol.phase_fix:
            phase = np.array([1.0, np.exp(-1j * spec.phi)])
        else:
            phase = np.ones(d, dtype=complex)
    povm = protocol.readout_povm()
    elements = np.stack([np.asarray(e, dtype=complex) for e in povm.elements])
    w = np.einsum("ia,kab,jb->kij", omega.conj(), elements, omega)
    q = np.ascontiguousarray(np.real(np.einsum("kii->ki", w)))
    est_idx = np.array(
        [-1 if lab == INCONCLUSIVE else int(lab) for lab in povm.labels],
        dtype=np.int64,
    )
    return _Compiled(
        dim=d,
        adjoint=np.ascontiguousarray(adjoint),
        w=np.ascontiguousarray(w),
        q=q,
        phase=np.ascontiguousarray(phase),
        est_idx=est_idx,
        labels=povm.labels,
    )


@dataclass(frozen=True, eq=False)
class RunRecord:
    """One protocol run: Bob's state, Eve's estimate, both fidelities."""

    outcome: object
    output: DensityMatrix
    estimate: PureState | None
    f: float
    g: float | None
    estimate_weight: float | None
    twirl: np.ndarray | None

    @property
    def conclusive(self) -> bool:
        return self.estimate is not None


def simulate_run(protocol: Protocol, psi: PureState, rng: SeededRng) -> RunRecord:
    """Single protocol run via the explicit joint-state pipeline.

    Draws (in stream order) the twirl unitary, then one uniform for the
    readout outcome; the batch kernels consume the same layout, so a
    substream that first produced `psi` continues identically here.

    The ancilla is traced out with the POVM element inserted directly:
    for a pure joint state the reduced post-measurement state does not
    depend on which Kraus square root of the element the measurement
    implements (the tests verify this against an explicit square-root
    route).
    """
    d = protocol.dim
    if psi.dim != d:
        raise ValueError("input state dimension mismatch")
    if protocol.kind == "perfect":
        prep = make_ancilla(d, protocol.alpha)
        ancilla = prep.tau
        interaction = cnot_qudit(d)
        basis = np.eye(d, dtype=complex)
        correction = None
    else:
        spec = protocol.spec
        ancilla = spec.fiducial
        interaction = qnd_unitary(spec)
        basis = spec.system_basis
        correction = phase_correction(spec) if protocol.phase_fix else None
    twirl = haar_unitary(d, rng) if protocol.twirl else None

    amps = twirl @ psi.amplitudes if protocol.twirl else psi.amplitudes
    joint = interaction @ tensor(amps, ancilla.amplitudes)

    povm = protocol.readout_povm()
    eye_s = np.eye(d)
    lifted = [tensor(eye_s, e) for e in povm.elements]
    probs = np.array([(joint.conj() @ l @ joint).real for l in lifted])
    total = probs.sum()
    threshold = rng.uniforms(1)[0] * total
    pick = len(probs) - 1
    cum = 0.0
    for k, prob in enumerate(probs):
        cum += prob
        if threshold < cum:
            pick = k
            break

    joint_rho = np.outer(joint, joint.conj())
    rho = partial_trace(lifted[pick] @ joint_rho, (d, ancilla.dim), over="second")
    rho = rho / probs[pick]
    rho = (rho + rho.conj().T) / 2
    if correction is not None:
        rho = correction @ rho @ correction.conj().T
    if protocol.twirl:
        rho = twirl.conj().T @ rho @ twirl

    label = povm.labels[pick]
    if label == INCONCLUSIVE:
        estimate = None
        g = None
        weight = None
    else:
        est_amps = basis[:, int(label)]
        if protocol.twirl:
            est_amps = twirl.conj().T @ est_amps
        estimate = PureState(d, est_amps)
        g = float(abs(psi.amplitudes.conj() @ est_amps) ** 2)
        weight = float((est_amps.conj() @ rho @ est_amps).real)
    output = DensityMatrix(d, rho)
    return RunRecord(
        outcome=label,
        output=output,
        estimate=estimate,
        f=fidelity(psi, output),
        g=g,
        estimate_weight=weight,
        twirl=twirl,
    )


def _batch_arrays(
    protocol: Protocol,
    n: int,
    seed: int,
    stream_id: int,
    chunk_size: int,
    fixed_psi: PureState | None,
):
    """Run the batch kernel over per-sample substreams; concatenated outputs.

    Per-sample uniform layout: [2d state Gaussians] (omitted for a fixed
    input state), [2d² twirl Gaussians] (if twirling), [1 readout draw].
    """
    cp = protocol._compiled()
    d = protocol.dim
    ns = 0 if fixed_psi is not None else 2 * d
    nt = 2 * d * d if protocol.twirl else 0
    count = ns + nt + 1
    fixed = None
    if fixed_psi is not None:
        # owning copy: the state's amplitudes are read-only, kernels want
        # a plain writable buffer
        fixed = np.array(fixed_psi.amplitudes, dtype=complex)
    parts = []
    for i0 in range(0, n, chunk_size):
        m = min(chunk_size, n - i0)
        u = batch_substream_uniforms(seed, stream_id, i0, m, count)
        psi_gauss = None
        twirl_gauss = None
        if ns:
            psi_gauss = np.ascontiguousarray(gaussian_pairs(u[:, :ns]))
        if nt:
            twirl_gauss = np.ascontiguousarray(gaussian_pairs(u[:, ns : ns + nt]))
        u_out = np.ascontiguousarray(u[:, count - 1])
        parts.append(
            _backend.simulate_batch(
                d, psi_gauss, fixed, twirl_gauss, u_out, cp.adjoint, cp.w, cp.q,
                cp.phase, cp.est_idx,
            )
        )
    f = np.concatenate([p[0] for p in parts])
    g = np.concatenate([p[1] for p in parts])
    outcome = np.concatenate([p[2] for p in parts])
    weight = np.concatenate([p[3] for p in parts])
    return f, g, outcome, weight, cp


def _mean_se(x: np.ndarray) -> tuple[float, float]:
    n = len(x)
    mean = float(np.mean(x))
    se = float(np.std(x, ddof=1) / np.sqrt(n)) if n > 1 else np.inf
    return mean, se


def mc_fg(
    protocol: Protocol,
    n: int,
    seed: int,
    stream_id: int = 0,
    chunk_size: int = 16384,
):
    """Monte Carlo (F, G) over n Haar-random input states.

    Deterministic given (seed, stream_id, n) and independent of
    chunk_size, because each sample draws from its own substream.
    Returns a TradeoffPoint for fully conclusive readouts and
    SubensembleStats when the readout has an inconclusive outcome.
    """
    if n < 1000:
        raise ValueError("need at least 1000 samples")
    f, g, outcome, weight, cp = _batch_arrays(
        protocol, n, seed, stream_id, chunk_size, None
    )
    return _collect(protocol, f, g, weight, n)


def mc_fixed_state(
    protocol: Protocol,
    psi: PureState,
    n: int,
    seed: int,
    stream_id: int = 0,
    chunk_size: int = 16384,
):
    """Monte Carlo over n runs on one fixed input state (no Haar draw)."""
    f, g, outcome, weight, cp = _batch_arrays(
        protocol, n, seed, stream_id, chunk_size, psi
    )
    return _collect(protocol, f, g, weight, n)


def _collect(protocol: Protocol, f, g, weight, n: int):
    if not protocol.has_inconclusive():
        f_mean, f_se = _mean_se(f)
        g_mean, g_se = _mean_se(g)
        return TradeoffPoint(
            F=f_mean, G=g_mean, se_F=f_se, se_G=g_se, n_samples=n
        )
    conclusive = ~np.isnan(g)
    n_c = int(conclusive.sum())
    frac = n_c / n
    se_frac = float(np.sqrt(frac * (1 - frac) / n))
    f_c, se_f_c = _mean_se(f[conclusive]) if n_c > 1 else (np.nan, np.inf)
    g_c, se_g_c = _mean_se(g[conclusive]) if n_c > 1 else (np.nan, np.inf)
    f_all, se_f_all = _mean_se(f)
    missed = int(np.sum(weight[conclusive] < 1 - 1e-10))
    return SubensembleStats(
        conclusive_fraction=frac,
        F_C=f_c,
        G_C=g_c,
        se_fraction=se_frac,
        se_F_C=se_f_c,
        se_G_C=se_g_c,
        n_samples=n,
        n_conclusive=n_c,
        misidentified=missed,
        unconditional_F=f_all,
        se_unconditional_F=se_f_all,
    )
