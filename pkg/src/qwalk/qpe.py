"""Quantum Fourier transform and textbook phase estimation on dense unitaries."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import caps
from .errors import SizeError, ValidationError

EIGEN_TOL = 1e-8


def _check_qubits(n: int) -> None:
    if n < 1:
        raise ValidationError("need at least one qubit")
    if n > caps.QFT_MAX_QUBITS:
        raise SizeError(f"{n} qubits exceeds the QFT limit {caps.QFT_MAX_QUBITS}")


def qft(n_qubits: int) -> np.ndarray:
    """``F[j, k] = omega^(j k) / sqrt(N)`` with ``omega = exp(2 pi i / N)``."""
    _check_qubits(n_qubits)
    N = 1 << n_qubits
    j = np.arange(N)
    # reduce the exponent mod N before scaling so large products stay exact
    return np.exp(2j * np.pi * (np.outer(j, j) % N) / N) / math.sqrt(N)


def qft_circuit(n_qubits: int) -> np.ndarray:
    """QFT assembled from Hadamards, controlled ``R_l`` phases and a swap network.

    Qubit 0 is the most significant bit of the basis index.
    """
    _check_qubits(n_qubits)
    n, N = n_qubits, 1 << n_qubits
    idx = np.arange(N)
    bit = [(idx >> (n - 1 - q)) & 1 for q in range(n)]
    h = np.array([[1.0, 1.0], [1.0, -1.0]]) / math.sqrt(2.0)
    out = np.eye(N, dtype=complex)
    for q in range(n):
        gate = np.kron(np.kron(np.eye(1 << q), h), np.eye(1 << (n - 1 - q)))
        out = gate @ out
        for r in range(q + 1, n):
            l = r - q + 1
            phase = np.where((bit[q] == 1) & (bit[r] == 1), np.exp(2j * np.pi / (1 << l)), 1.0)
            out = phase[:, None] * out
    rev = np.zeros(N, dtype=int)
    for q in range(n):
        rev |= bit[q] << q
    return out[rev]


@dataclass(frozen=True, eq=False)
class PhaseEstimate:
    distribution: np.ndarray
    m_bits: int

    def phase(self, k: int) -> float:
        return k / (1 << self.m_bits)

    def most_likely(self) -> int:
        return int(np.argmax(self.distribution))


def phase_estimate_branches(U, state, m_bits: int) -> np.ndarray:
    """Unnormalized system state left behind by each m-bit outcome.

    Ancilla bit ``b`` controls ``U^(2^b)`` (repeated squaring), then the
    inverse QFT acts on the ancilla register.  Row ``k`` of the result is
    the system component paired with outcome ``k``, read most significant
    bit first, so outcome k estimates phase ``k / 2^m``.
    """
    U = np.asarray(U, dtype=complex)
    state = np.asarray(state, dtype=complex)
    if U.ndim != 2 or U.shape[0] != U.shape[1] or state.shape != (U.shape[0],):
        raise ValidationError("U must be square and match the state")
    _check_qubits(m_bits)
    N = 1 << m_bits
    caps.require_dim(N * U.shape[0], caps.COIN_WALK_MAX_DIM, "phase estimation register")
    reg = np.tile(state / math.sqrt(N), (N, 1))
    power = U
    rows = np.arange(N)
    for b in range(m_bits):
        on = (rows >> b) & 1 == 1
        reg[on] = reg[on] @ power.T
        power = power @ power
    return qft(m_bits).conj().T @ reg


def phase_estimate(U, eigenstate, m_bits: int, strict: bool = True) -> PhaseEstimate:
    """Exact outcome distribution of m-bit phase estimation.

    In strict mode the input must be an eigenvector of ``U`` within 1e-8.
    With ``strict=False`` any state is accepted and the result is the
    mixture over its eigencomponents.
    """
    U = np.asarray(U, dtype=complex)
    v = np.asarray(eigenstate, dtype=complex)
    if U.ndim != 2 or U.shape[0] != U.shape[1] or v.shape != (U.shape[0],):
        raise ValidationError("U must be square and match the state")
    if strict:
        uv = U @ v
        residual = np.linalg.norm(uv - np.vdot(v, uv) / np.vdot(v, v) * v)
        if residual > EIGEN_TOL:
            raise ValidationError(f"state is not an eigenvector (residual {residual:.3g})")
    branches = phase_estimate_branches(U, v, m_bits)
    dist = np.sum(np.abs(branches) ** 2, axis=1)
    return PhaseEstimate(dist / dist.sum(), m_bits)


def ancilla_bits_for(t_bits: int, p_f: float) -> int:
    """``t + ceil(log2(1/2 + 1/(2 p_f)))``.

    The ceiling is found by integer search with a 1e-12 relative slack, so
    inputs whose logarithm is an exact integer (p_f = 1/3 gives log2 2 = 1)
    do not round up through floating error.
    """
    if t_bits < 0:
        raise ValidationError("t_bits must be nonnegative")
    if not 0.0 < p_f < 1.0:
        raise ValidationError("p_f must lie in (0, 1)")
    x = 0.5 + 0.5 / p_f
    k = 0
    while 2.0**k < x * (1.0 - 1e-12):
        k += 1
    return t_bits + k


def circular_distance(a: float, b: float) -> float:
    d = abs(a - b) % 1.0
    return min(d, 1.0 - d)


def failure_probability(est: PhaseEstimate, phase: float, t_bits: int) -> float:
    """Mass on outcomes whose phase is at least ``2^-t`` away (mod 1)."""
    N = 1 << est.m_bits
    far = np.array(
        [circular_distance(k / N, phase) >= 2.0**-t_bits for k in range(N)], dtype=bool
    )
    return float(est.distribution[far].sum())


def nearest_outcome_mass(est: PhaseEstimate, phase: float) -> float:
    N = 1 << est.m_bits
    dist = [circular_distance(k / N, phase) for k in range(N)]
    return float(est.distribution[int(np.argmin(dist))])


def two_nearest_mass(est: PhaseEstimate, phase: float) -> float:
    N = 1 << est.m_bits
    lo = int(math.floor(phase * N)) % N
    return float(est.distribution[lo] + est.distribution[(lo + 1) % N])
