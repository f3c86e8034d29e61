import math

import numpy as np
import pytest

from qwalk.errors import SizeError, ValidationError
from qwalk.qpe import (
    ancilla_bits_for,
    circular_distance,
    failure_probability,
    nearest_outcome_mass,
    phase_estimate,
    qft,
    qft_circuit,
    two_nearest_mass,
)


def phase_gate(phase):
    return np.diag([1.0, np.exp(2j * math.pi * phase)])


def textbook_distribution(phase, m):
    """Closed-form QPE outcome law for an eigenphase ``phase``."""
    N = 1 << m
    k = np.arange(N)
    delta = phase - k / N
    num = np.exp(2j * math.pi * N * delta) - 1
    den = np.exp(2j * math.pi * delta) - 1
    with np.errstate(invalid="ignore", divide="ignore"):
        amp = np.where(np.abs(den) < 1e-12, N, num / den) / N
    return np.abs(amp) ** 2


class TestQFT:
    def test_one_qubit_is_hadamard(self):
        np.testing.assert_allclose(qft(1), np.array([[1, 1], [1, -1]]) / math.sqrt(2), atol=1e-15)

    def test_uniform_from_zero(self):
        np.testing.assert_allclose(qft(4)[:, 0], np.full(16, 0.25), atol=1e-15)

    @pytest.mark.parametrize("n", [1, 2, 5, 8])
    def test_unitary(self, n):
        F = qft(n)
        np.testing.assert_allclose(F @ F.conj().T, np.eye(1 << n), atol=1e-10)

    @pytest.mark.parametrize("n", [1, 2, 3, 6])
    def test_circuit_matches_matrix(self, n):
        np.testing.assert_allclose(qft_circuit(n), qft(n), atol=1e-12)

    def test_limits(self):
        with pytest.raises(SizeError):
            qft(13)
        with pytest.raises(ValidationError):
            qft(0)


class TestPhaseEstimate:
    def test_dyadic_quarter(self):
        est = phase_estimate(phase_gate(0.25), [0.0, 1.0], 2)
        assert est.distribution[1] == pytest.approx(1.0, abs=1e-12)

    def test_phase_zero(self):
        est = phase_estimate(phase_gate(0.3), [1.0, 0.0], 5)
        assert est.distribution[0] == pytest.approx(1.0, abs=1e-12)
        assert est.most_likely() == 0

    def test_third_four_bits(self):
        est = phase_estimate(phase_gate(1 / 3), [0.0, 1.0], 4)
        assert nearest_outcome_mass(est, 1 / 3) >= 4 / math.pi**2

    def test_matches_closed_form(self, rng):
        for phase in rng.random(10):
            for m in (3, 6):
                est = phase_estimate(phase_gate(phase), [0.0, 1.0], m)
                np.testing.assert_allclose(
                    est.distribution, textbook_distribution(phase, m), atol=1e-12
                )

    def test_dense_unitary_eigenvector(self, rng):
        z = rng.normal(size=(5, 5)) + 1j * rng.normal(size=(5, 5))
        U, _ = np.linalg.qr(z)
        w, V = np.linalg.eig(U)
        phase = (np.angle(w[2]) / (2 * math.pi)) % 1.0
        est = phase_estimate(U, V[:, 2], 7)
        np.testing.assert_allclose(est.distribution, textbook_distribution(phase, 7), atol=1e-10)

    def test_strict_rejects_mixture(self):
        v = np.array([1.0, 1.0]) / math.sqrt(2)
        with pytest.raises(ValidationError):
            phase_estimate(phase_gate(0.5), v, 3)

    def test_permissive_mixture(self):
        v = np.array([1.0, 1.0]) / math.sqrt(2)
        est = phase_estimate(phase_gate(0.5), v, 3, strict=False)
        assert est.distribution[0] == pytest.approx(0.5, abs=1e-12)
        assert est.distribution[4] == pytest.approx(0.5, abs=1e-12)
        assert est.phase(4) == 0.5

    def test_shape_errors(self):
        with pytest.raises(ValidationError):
            phase_estimate(np.eye(2), [1.0, 0.0, 0.0], 3)


class TestAncillaBits:
    def test_examples(self):
        assert ancilla_bits_for(3, 0.25) == 5
        for t in range(5):
            assert ancilla_bits_for(t, 0.5) == t + 1
        assert ancilla_bits_for(2, 1 / 3) == 3

    def test_domain(self):
        with pytest.raises(ValidationError):
            ancilla_bits_for(2, 1.0)
        with pytest.raises(ValidationError):
            ancilla_bits_for(2, 0.0)
        with pytest.raises(ValidationError):
            ancilla_bits_for(-1, 0.1)

    def test_failure_bound(self):
        for t in (1, 2, 3):
            for p_f in (0.1, 0.3):
                m = ancilla_bits_for(t, p_f)
                for phase in np.arange(50) / 50:
                    est = phase_estimate(phase_gate(phase), [0.0, 1.0], m)
                    assert failure_probability(est, phase, t) <= p_f


class TestMetrics:
    def test_circular_distance(self):
        assert circular_distance(0.95, 0.05) == pytest.approx(0.1)
        assert circular_distance(0.25, 0.25) == 0.0

    def test_two_nearest_wraps(self):
        est = phase_estimate(phase_gate(0.98), [0.0, 1.0], 3)
        assert two_nearest_mass(est, 0.98) == pytest.approx(
            est.distribution[7] + est.distribution[0]
        )
        assert two_nearest_mass(est, 0.98) >= 8 / math.pi**2
