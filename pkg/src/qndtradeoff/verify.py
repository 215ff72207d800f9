"""Deterministic invariant suite behind the ``verify`` CLI command.

Every check is registered under a stable name and reports the worst
defect it observed together with the tolerance it was held to.  All
randomness comes from substreams of one master seed and the report body
carries no timing or host information, so two runs with the same seed
produce byte-identical JSON.

Statistical checks report a z-score (deviation over standard error)
instead of a raw defect; their tolerance is the 4-sigma band used
throughout the package.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .channel import (
    channel_from_circuit,
    cnot_qudit,
    kraus_completeness_residual,
    kraus_qnd,
    make_ancilla,
    qnd_unitary,
    qubit_pointer_spec,
)
from .discrimination import (
    error_rate,
    helstrom_povm,
    povm_validate,
    projective_povm,
    unambiguous_povm,
)
from .qlinalg import (
    dagger,
    hermitian_eig,
    max_abs,
    partial_trace,
    tensor,
    unitarity_defect,
    unitary_with_column,
)
from .rng import SeededRng, batch_substream_uniforms
from .states import PureState, haar_state, haar_unitary
from .tradeoff import analytic_fg, bound_rhs, kraus_fg

_Z_BAND = 4.0

_CHECKS: dict[str, object] = {}


def _check(name):
    def register(fn):
        _CHECKS[name] = fn
        return fn

    return register


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    value: float
    tolerance: float


def check_names() -> tuple[str, ...]:
    return tuple(_CHECKS)


def run_check(name: str, seed: int) -> CheckResult:
    """Run one named check with its own stream of the master seed."""
    fn = _CHECKS[name]
    stream = 1000 + list(_CHECKS).index(name)
    value, tolerance = fn(SeededRng(seed, stream_id=stream))
    value = float(value)
    return CheckResult(name=name, passed=value <= tolerance, value=value, tolerance=tolerance)


def run_all(seed: int) -> list[CheckResult]:
    return [run_check(name, seed) for name in _CHECKS]


def report_dict(results: list[CheckResult], seed: int) -> dict:
    return {
        "seed": seed,
        "passed": all(r.passed for r in results),
        "n_checks": len(results),
        "n_failed": sum(not r.passed for r in results),
        "checks": [
            {
                "name": r.name,
                "passed": r.passed,
                "value": r.value,
                "tolerance": r.tolerance,
            }
            for r in results
        ],
    }


def render_report(results: list[CheckResult], seed: int) -> str:
    return json.dumps(report_dict(results, seed), indent=2) + "\n"


def qnd_channel_fixture(d: int, alpha: float):
    """Raw Kraus matrices fed to the completeness check.

    Kept as a module-level hook so a corrupted set can be injected when
    exercising the failure path of the verification suite.
    """
    return [np.array(a) for a in kraus_qnd(make_ancilla(d, alpha)).kraus]


def _rand_matrix(d: int, rng: SeededRng) -> np.ndarray:
    g = rng.gaussians(2 * d * d)
    return (g[0::2] + 1j * g[1::2]).reshape(d, d)


# ---------------------------------------------------------------------------
# linear-algebra checks


@_check("tensor_associativity")
def _tensor_associativity(rng):
    worst = 0.0
    for _ in range(5):
        a, b, c = _rand_matrix(2, rng), _rand_matrix(3, rng), _rand_matrix(2, rng)
        worst = max(worst, max_abs(tensor(tensor(a, b), c) - tensor(a, tensor(b, c))))
    return worst, 1e-12


@_check("partial_trace_product")
def _partial_trace_product(rng):
    worst = 0.0
    for da, db in ((2, 2), (2, 3), (3, 2), (4, 3)):
        a, b = _rand_matrix(da, rng), _rand_matrix(db, rng)
        m = tensor(a, b)
        worst = max(worst, max_abs(partial_trace(m, (da, db), over="second") - np.trace(b) * a))
        worst = max(worst, max_abs(partial_trace(m, (da, db), over="first") - np.trace(a) * b))
        worst = max(worst, abs(np.trace(partial_trace(m, (da, db))) - np.trace(m)))
    return worst, 1e-12


@_check("hermitian_eig_reconstruction")
def _hermitian_eig_reconstruction(rng):
    worst = 0.0
    for d in (2, 3, 5, 8):
        m = _rand_matrix(d, rng)
        m = m + dagger(m)
        w, v = hermitian_eig(m)
        worst = max(worst, max_abs(v @ np.diag(w) @ dagger(v) - m))
        worst = max(worst, max_abs(dagger(v) @ v - np.eye(d)))
    return worst, 1e-12


@_check("unitary_completion")
def _unitary_completion(rng):
    worst = 0.0
    for d in (2, 3, 5, 8):
        target = haar_state(d, rng).amplitudes
        source = haar_state(d, rng).amplitudes
        u = unitary_with_column(target, source)
        worst = max(worst, unitarity_defect(u))
        worst = max(worst, max_abs(u @ source - target))
    return worst, 1e-12


# ---------------------------------------------------------------------------
# channel checks


def _imperfect_channel(spec):
    return channel_from_circuit(qnd_unitary(spec), spec.fiducial, np.eye(spec.dim))


@_check("channel_completeness")
def _channel_completeness(rng):
    worst = 0.0
    for d in (2, 3, 5):
        for alpha in (0.0, 0.25, 0.5, 0.75, 1.0):
            worst = max(worst, kraus_completeness_residual(qnd_channel_fixture(d, alpha), d))
    for overlap in (0.0, 0.3, 0.7, 1.0):
        for phase in (0.0, np.pi / 3):
            spec = qubit_pointer_spec(overlap, phase)
            chan = _imperfect_channel(spec)
            worst = max(worst, kraus_completeness_residual(chan.kraus, 2))
    return worst, 1e-12


@_check("alpha0_identity_channel")
def _alpha0_identity_channel(rng):
    worst = 0.0
    for d in (2, 3, 5):
        chan = kraus_qnd(make_ancilla(d, 0.0))
        worst = max(worst, max_abs(chan.natural_matrix() - np.eye(d * d)))
    return worst, 1e-12


@_check("qnd_fixed_points")
def _qnd_fixed_points(rng):
    worst = 0.0
    for d in (2, 3, 5):
        for alpha in (0.0, 0.5, 1.0):
            chan = kraus_qnd(make_ancilla(d, alpha))
            for i in range(d):
                p = PureState.basis(d, i).projector()
                worst = max(worst, max_abs(chan.apply(p) - p))
    for overlap in (0.0, 0.5, 1.0):
        spec = qubit_pointer_spec(overlap, 0.0)
        chan = _imperfect_channel(spec)
        for i in range(2):
            p = PureState(2, spec.system_basis[:, i]).projector()
            worst = max(worst, max_abs(chan.apply(p) - p))
    return worst, 1e-12


@_check("circuit_equivalence")
def _circuit_equivalence(rng):
    worst = 0.0
    for d in (2, 3):
        for alpha in (0.0, 0.5, 1.0):
            prep = make_ancilla(d, alpha)
            direct = kraus_qnd(prep).natural_matrix()
            circuit = channel_from_circuit(cnot_qudit(d), prep.tau, np.eye(d)).natural_matrix()
            worst = max(worst, max_abs(direct - circuit))
    return worst, 1e-12


# ---------------------------------------------------------------------------
# discrimination checks


def _pointer_pair(overlap: float):
    spec = qubit_pointer_spec(overlap, 0.0)
    return (
        PureState(2, spec.pointer_states[:, 0]),
        PureState(2, spec.pointer_states[:, 1]),
    )


@_check("povm_validity")
def _povm_validity(rng):
    worst = 0.0
    povms = [projective_povm(haar_unitary(d, rng)) for d in (2, 3, 5)]
    for overlap in (0.0, 0.3, 0.7, 0.95):
        mu1, mu2 = _pointer_pair(overlap)
        povms.append(helstrom_povm(mu1, mu2))
        povms.append(unambiguous_povm(mu1, mu2))
    for p in povms:
        report = povm_validate(p)
        worst = max(worst, report.completeness_residual)
        worst = max(worst, max(0.0, -report.positivity_margin))
    return worst, 1e-10


@_check("helstrom_error_rate")
def _helstrom_error_rate(rng):
    worst = 0.0
    for overlap in (0.0, 0.25, 0.5, 0.75, 1.0):
        mu1, mu2 = _pointer_pair(overlap)
        expected = 0.5 * (1.0 - np.sqrt(1.0 - overlap**2))
        worst = max(worst, abs(error_rate(helstrom_povm(mu1, mu2), (mu1, mu2)) - expected))
    return worst, 1e-10


@_check("unambiguous_zero_crosstalk")
def _unambiguous_zero_crosstalk(rng):
    worst = 0.0
    for overlap in (0.0, 0.3, 0.6, 0.9):
        mu1, mu2 = _pointer_pair(overlap)
        p = unambiguous_povm(mu1, mu2)
        v1, v2 = mu1.amplitudes, mu2.amplitudes
        worst = max(worst, abs(v2.conj() @ p.element_for(0) @ v2))
        worst = max(worst, abs(v1.conj() @ p.element_for(1) @ v1))
        inconclusive = p.elements[2]
        for v in (v1, v2):
            worst = max(worst, abs((v.conj() @ inconclusive @ v).real - overlap))
    return worst, 1e-12


# ---------------------------------------------------------------------------
# trade-off checks


@_check("saturation_grid")
def _saturation_grid(rng):
    worst = 0.0
    for d in (2, 3, 5, 8):
        for alpha in np.linspace(0.0, 1.0, 21):
            point = analytic_fg(d, float(alpha))
            worst = max(worst, abs(bound_rhs(point.G, d) - point.F))
    return worst, 1e-12


@_check("bound_endpoints")
def _bound_endpoints(rng):
    worst = 0.0
    for d in (2, 3, 5, 8):
        worst = max(worst, abs(bound_rhs(2.0 / (d + 1), d) - 2.0 / (d + 1)))
        worst = max(worst, abs(bound_rhs(1.0 / d, d) - 1.0))
    return worst, 1e-12


@_check("triple_equivalence")
def _triple_equivalence(rng):
    worst = 0.0
    for d in (2, 3):
        for alpha in (0.0, 0.5, 1.0):
            prep = make_ancilla(d, alpha)
            a = analytic_fg(d, alpha)
            k = kraus_fg(kraus_qnd(prep))
            c = kraus_fg(channel_from_circuit(cnot_qudit(d), prep.tau, np.eye(d)))
            worst = max(worst, abs(a.F - k.F), abs(a.G - k.G))
            worst = max(worst, abs(a.F - c.F), abs(a.G - c.G))
    return worst, 1e-12


# ---------------------------------------------------------------------------
# sampling checks


@_check("rng_substream_agreement")
def _rng_substream_agreement(rng):
    base = SeededRng(rng.master_seed, stream_id=rng.stream_id)
    batch = batch_substream_uniforms(base.master_seed, base.stream_id, 0, 8, 33)
    worst = 0.0
    for i in range(8):
        row = base.substream(i).uniforms(33)
        worst = max(worst, max_abs(batch[i] - row))
    return worst, 0.0


@_check("haar_state_moments")
def _haar_state_moments(rng):
    worst = 0.0
    n = 3000
    for d in (2, 3):
        p = np.empty(n)
        for i in range(n):
            p[i] = np.abs(haar_state(d, rng).amplitudes[0]) ** 2
        for moment, mean_expected in ((p, 1.0 / d), (p * p, 2.0 / (d * (d + 1)))):
            se = moment.std(ddof=1) / np.sqrt(n)
            worst = max(worst, abs(moment.mean() - mean_expected) / se)
    return worst, _Z_BAND


@_check("haar_unitary_unitarity")
def _haar_unitary_unitarity(rng):
    worst = 0.0
    for d in (2, 3, 5):
        for _ in range(20):
            worst = max(worst, unitarity_defect(haar_unitary(d, rng)))
    return worst, 1e-12


@_check("haar_unitary_invariance")
def _haar_unitary_invariance(rng):
    n = 2000
    d = 3
    psi = PureState.basis(d, 0).amplitudes
    p = np.empty(n)
    for i in range(n):
        p[i] = np.abs(haar_unitary(d, rng) @ psi)[0] ** 2
    # rotated basis state should look Haar distributed: mean 1/d
    se = p.std(ddof=1) / np.sqrt(n)
    return abs(p.mean() - 1.0 / d) / se, _Z_BAND
