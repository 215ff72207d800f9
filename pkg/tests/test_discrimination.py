"""Readout POVMs: minimum-error, unambiguous, sampling."""

import numpy as np
import pytest

from qndtradeoff.discrimination import (
    INCONCLUSIVE,
    Povm,
    error_rate,
    helstrom_povm,
    povm_validate,
    projective_povm,
    sample_outcome,
    unambiguous_povm,
)
from qndtradeoff.qlinalg import max_abs
from qndtradeoff.rng import SeededRng
from qndtradeoff.states import PureState, haar_state, haar_unitary


def _pair(overlap, phase=0.0):
    mu1 = PureState(2, np.array([1.0, 0.0], dtype=complex))
    mu2 = PureState(
        2,
        np.array(
            [overlap * np.exp(1j * phase), np.sqrt(1.0 - overlap**2)], dtype=complex
        ),
    )
    return mu1, mu2


def _rotated_pair(overlap, rng):
    u = haar_unitary(2, rng)
    mu1, mu2 = _pair(overlap)
    return PureState(2, u @ mu1.amplitudes), PureState(2, u @ mu2.amplitudes)


def test_helstrom_error_rate_closed_form():
    # minimum error (1 - sqrt(1 - o^2))/2 for equal priors
    for o in (0.0, 0.25, 0.5, 0.75, 0.95):
        mu1, mu2 = _pair(o)
        got = error_rate(helstrom_povm(mu1, mu2), (mu1, mu2))
        assert abs(got - 0.5 * (1.0 - np.sqrt(1.0 - o**2))) <= 1e-10


def test_helstrom_frozen_values():
    mu1, mu2 = _pair(0.5)
    assert error_rate(helstrom_povm(mu1, mu2), (mu1, mu2)) == pytest.approx(
        0.0669872981077807, abs=1e-12
    )
    mu1, mu2 = _pair(np.sqrt(0.5))
    assert error_rate(helstrom_povm(mu1, mu2), (mu1, mu2)) == pytest.approx(
        0.1464466094067262, abs=1e-12
    )


def test_helstrom_optimal_over_random_projective_readouts():
    rng = SeededRng(30, 0)
    for _ in range(20):
        o = float(rng.uniforms(1)[0]) * 0.95
        mu1, mu2 = _rotated_pair(o, rng)
        best = error_rate(helstrom_povm(mu1, mu2), (mu1, mu2))
        for _ in range(50):
            candidate = projective_povm(haar_unitary(2, rng))
            assert best <= error_rate(candidate, (mu1, mu2)) + 1e-12


def test_helstrom_swap_symmetry():
    mu1, mu2 = _pair(0.6)
    a = error_rate(helstrom_povm(mu1, mu2), (mu1, mu2))
    b = error_rate(helstrom_povm(mu2, mu1), (mu2, mu1))
    assert abs(a - b) <= 1e-12


def test_helstrom_matches_analytic_on_random_pairs():
    rng = SeededRng(31, 0)
    for _ in range(100):
        mu1 = haar_state(2, rng)
        mu2 = haar_state(2, rng)
        o = abs(mu1.amplitudes.conj() @ mu2.amplitudes)
        got = error_rate(helstrom_povm(mu1, mu2), (mu1, mu2))
        assert abs(got - 0.5 * (1.0 - np.sqrt(1.0 - o**2))) <= 1e-10


def test_helstrom_degenerate_identical_states():
    mu = PureState.basis(2, 0)
    p = helstrom_povm(mu, mu)
    assert p.degenerate
    assert povm_validate(p).ok
    assert error_rate(p, (mu, mu)) == pytest.approx(0.5, abs=1e-12)


def test_helstrom_validity():
    for o in (0.0, 0.3, 0.9):
        mu1, mu2 = _pair(o)
        report = povm_validate(helstrom_povm(mu1, mu2))
        assert report.ok


def test_unambiguous_zero_crosstalk_and_inconclusive_rate():
    for o in (0.0, 0.3, 0.6, 0.9):
        mu1, mu2 = _pair(o)
        p = unambiguous_povm(mu1, mu2)
        assert povm_validate(p).ok
        assert p.labels == (0, 1, INCONCLUSIVE)
        v1, v2 = mu1.amplitudes, mu2.amplitudes
        # never identify the wrong pointer
        assert abs(v2.conj() @ p.element_for(0) @ v2) <= 1e-14
        assert abs(v1.conj() @ p.element_for(1) @ v1) <= 1e-14
        # inconclusive probability attains the optimum |<mu1|mu2>|
        s0 = p.element_for(INCONCLUSIVE)
        for v in (v1, v2):
            assert abs((v.conj() @ s0 @ v).real - o) <= 1e-12


def test_unambiguous_rejects_dependent_pointers():
    mu = PureState.basis(2, 0)
    with pytest.raises(ValueError):
        unambiguous_povm(mu, mu)


def test_unambiguous_orthogonal_pointers_always_conclusive():
    mu1, mu2 = _pair(0.0)
    p = unambiguous_povm(mu1, mu2)
    assert max_abs(p.element_for(INCONCLUSIVE)) <= 1e-14
    assert max_abs(p.element_for(0) - mu1.projector()) <= 1e-14


def test_error_rate_basics():
    basis = projective_povm(np.eye(2))
    mu1, mu2 = PureState.basis(2, 0), PureState.basis(2, 1)
    assert error_rate(basis, (mu1, mu2)) <= 1e-15
    assert error_rate(basis, (mu2, mu1)) == pytest.approx(1.0, abs=1e-15)
    with pytest.raises(ValueError):
        error_rate(unambiguous_povm(*_pair(0.5)), _pair(0.5))


def test_povm_element_shapes_validated():
    with pytest.raises(ValueError):
        Povm(2, (np.eye(3),), (0,))
    with pytest.raises(ValueError):
        Povm(2, (np.eye(2),), (0, 1))


def test_povm_validate_flags_bad_sets():
    report = povm_validate(Povm(2, (np.eye(2) * 0.5,), (0,)))
    assert not report.ok
    assert report.completeness_residual == pytest.approx(0.5, abs=1e-15)
    report = povm_validate(Povm(2, (np.diag([1.5, 1.0]), np.diag([-0.5, 0.0])), (0, 1)))
    assert report.positivity_margin == pytest.approx(-0.5, abs=1e-12)
    assert not report.ok


def test_sample_outcome_frequencies():
    rng = SeededRng(32, 0)
    psi = PureState.normalized(np.array([np.sqrt(0.7), np.sqrt(0.3)], dtype=complex))
    p = projective_povm(np.eye(2))
    n = 6000
    hits = sum(sample_outcome(p, psi, rng) == 0 for _ in range(n))
    se = np.sqrt(0.7 * 0.3 / n)
    assert abs(hits / n - 0.7) <= 4.0 * se


def test_sample_outcome_inconclusive_label():
    mu1, mu2 = _pair(0.9)
    p = unambiguous_povm(mu1, mu2)
    rng = SeededRng(33, 0)
    seen = {sample_outcome(p, mu1, rng) for _ in range(200)}
    assert seen <= {0, INCONCLUSIVE}
    assert INCONCLUSIVE in seen


def test_sample_outcome_deterministic():
    p = projective_povm(np.eye(2))
    psi = PureState.normalized(np.array([1.0, 1.0]))
    a = [sample_outcome(p, psi, SeededRng(34, 0).substream(i)) for i in range(40)]
    b = [sample_outcome(p, psi, SeededRng(34, 0).substream(i)) for i in range(40)]
    assert a == b


def test_sample_outcome_rejects_invalid_povm():
    psi = PureState.basis(2, 0)
    with pytest.raises(ValueError):
        sample_outcome(Povm(2, (np.eye(2) * 0.5,), (0,)), psi, SeededRng(35, 0))
