"""Grover search and amplitude amplification as exact dense statevector runs.

Three amplifiers are provided:

* plain amplitude amplification ``Q = -A R_s A^dagger R_t``;
* the pi/3 recursion ``U_{m+1} = U_m R_s U_m^dagger R_t U_m`` whose failure
  probability cubes at every level (``1 - eps**(3**m)``);
* the fixed-point sequence with Chebyshev-derived phases, which reaches
  success ``>= 1 - delta**2`` for every overlap above a width ``w``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import caps
from .errors import SizeError, ValidationError
from .linalg import is_unitary

TIE_TOL = 1e-12


# --- Chebyshev polynomials --------------------------------------------------


def chebyshev_T(L, x: float) -> float:
    """First-kind Chebyshev polynomial ``T_L(x)``.

    Integer orders use the three-term recurrence, which is valid for every
    real ``x``.  Non-integer orders use ``cos(L arccos x)`` on ``[-1, 1]`` and
    ``cosh(L arccosh x)`` for ``x > 1``; they are undefined for ``x < -1``.
    """
    x = float(x)
    if float(L) == int(L) and L >= 0:
        L = int(L)
        if L == 0:
            return 1.0
        prev, cur = 1.0, x
        for _ in range(L - 1):
            prev, cur = cur, 2.0 * x * cur - prev
        return cur
    if L < 0:
        raise ValidationError("order must be nonnegative")
    if abs(x) <= 1.0:
        return math.cos(L * math.acos(x))
    if x > 1.0:
        return math.cosh(L * math.acosh(x))
    raise ValidationError("fractional-order Chebyshev is undefined for x < -1")


# --- Grover search ----------------------------------------------------------


@dataclass(frozen=True)
class SearchInstance:
    n_qubits: int
    marked: frozenset

    def __init__(self, n_qubits: int, marked):
        object.__setattr__(self, "n_qubits", int(n_qubits))
        object.__setattr__(self, "marked", frozenset(int(i) for i in marked))
        if self.n_qubits < 1:
            raise ValidationError("n_qubits must be positive")
        if any(not 0 <= i < self.N for i in self.marked):
            raise ValidationError("marked index out of range")

    @property
    def N(self) -> int:
        return 1 << self.n_qubits

    @property
    def M(self) -> int:
        return len(self.marked)

    @property
    def theta(self) -> float:
        return math.asin(math.sqrt(self.M / self.N))

    def target_mask(self) -> np.ndarray:
        mask = np.zeros(self.N, dtype=bool)
        mask[list(self.marked)] = True
        return mask


@lru_cache(maxsize=16)
def _hadamard_layer(n: int) -> np.ndarray:
    h = np.array([[1.0, 1.0], [1.0, -1.0]]) / math.sqrt(2.0)
    out = np.ones((1, 1))
    for _ in range(n):
        out = np.kron(out, h)
    out.setflags(write=False)
    return out


def hadamard_layer(n: int) -> np.ndarray:
    caps.require_dim(1 << n, caps.DENSE_MAX_DIM, "Hadamard layer dimension")
    return _hadamard_layer(n)


def grover_operators(inst: SearchInstance):
    """Return ``(O, U_s)``: the phase oracle and ``H (1 - 2|0><0|) H``."""
    h = hadamard_layer(inst.n_qubits)
    oracle = np.diag(np.where(inst.target_mask(), -1.0, 1.0))
    reflect0 = np.eye(inst.N)
    reflect0[0, 0] = -1.0
    return oracle, h @ reflect0 @ h


def grover_trajectory(inst: SearchInstance, t_max: int) -> np.ndarray:
    """Success probabilities after 0..t_max Grover rounds."""
    if t_max < 0:
        raise ValidationError("t_max must be nonnegative")
    oracle, diffusion = grover_operators(inst)
    g = diffusion @ oracle
    mask = inst.target_mask()
    psi = np.full(inst.N, 1.0 / math.sqrt(inst.N))
    out = np.empty(t_max + 1)
    for t in range(t_max + 1):
        out[t] = float(np.sum(np.abs(psi[mask]) ** 2))
        psi = g @ psi
    return out


def grover_success_probability(inst: SearchInstance, t: int) -> float:
    return float(grover_trajectory(inst, t)[-1])


def optimal_iterations(N: int, M: int) -> int:
    """Integer maximizer of ``sin^2((2t+1) theta)``; ties go to the smaller t."""
    if not 1 <= M < N:
        raise ValidationError("need 1 <= M < N")
    theta = math.asin(math.sqrt(M / N))
    upper = int(math.ceil(math.pi / (4.0 * theta))) + 1
    best_t, best_p = 0, -1.0
    for t in range(upper + 1):
        p = math.sin((2 * t + 1) * theta) ** 2
        if p > best_p + TIE_TOL:
            best_t, best_p = t, p
    return best_t


# --- amplitude amplification --------------------------------------------


@dataclass(frozen=True, eq=False)
class AmplitudeProcess:
    """A preparer ``A`` acting on ``|start>`` and a set of good basis states."""

    A: np.ndarray
    target: np.ndarray
    start: int = 0

    def __post_init__(self):
        a = np.asarray(self.A, dtype=complex)
        target = np.asarray(self.target)
        if target.dtype != bool:
            # accept either a 0/1 diagonal projector or an index list
            if target.ndim == 2:
                target = np.isclose(np.diag(target).real, 1.0)
            else:
                mask = np.zeros(a.shape[0], dtype=bool)
                mask[target.astype(int)] = True
                target = mask
        if a.ndim != 2 or a.shape[0] != a.shape[1] or target.shape != (a.shape[0],):
            raise ValidationError("A must be square and match the target size")
        if not is_unitary(a):
            raise ValidationError("A must be unitary")
        object.__setattr__(self, "A", a)
        object.__setattr__(self, "target", target)

    @property
    def dim(self) -> int:
        return self.A.shape[0]

    @property
    def prepared(self) -> np.ndarray:
        return self.A[:, self.start]

    @property
    def lam(self) -> float:
        return success_probability(self.prepared, self.target)


def success_probability(state, target_mask) -> float:
    return float(np.sum(np.abs(np.asarray(state)[target_mask]) ** 2))


def _phase_projector(dim, mask_or_vec, phase):
    """``1 - (1 - e^{i phase}) P`` for a basis mask or the rank-one |v><v|."""
    factor = 1.0 - np.exp(1j * phase)
    if np.asarray(mask_or_vec).dtype == bool:
        return np.diag(np.where(mask_or_vec, 1.0 - factor, 1.0 + 0j))
    v = np.asarray(mask_or_vec, dtype=complex)
    return np.eye(dim, dtype=complex) - factor * np.outer(v, v.conj())


def amplification_operator(proc: AmplitudeProcess) -> np.ndarray:
    """``Q = -A R_s A^dagger R_t`` with ``R = 2 P - 1``."""
    e = np.zeros(proc.dim)
    e[proc.start] = 1.0
    r_s = -_phase_projector(proc.dim, e, math.pi)
    r_t = -_phase_projector(proc.dim, proc.target, math.pi)
    return -proc.A @ r_s @ proc.A.conj().T @ r_t


def amplitude_amplification(proc: AmplitudeProcess, rounds: int):
    if rounds < 0:
        raise ValidationError("rounds must be nonnegative")
    q = amplification_operator(proc)
    psi = proc.prepared.copy()
    for _ in range(rounds):
        psi = q @ psi
    return psi, success_probability(psi, proc.target)


def pi_over_3_operator(proc: AmplitudeProcess, depth: int) -> np.ndarray:
    """``U_m`` of the pi/3 recursion, as a dense matrix."""
    if depth < 0:
        raise ValidationError("depth must be nonnegative")
    if depth > caps.PI3_MAX_DEPTH:
        raise SizeError(f"depth {depth} exceeds the limit {caps.PI3_MAX_DEPTH}")
    e = np.zeros(proc.dim)
    e[proc.start] = 1.0
    r_s = _phase_projector(proc.dim, e, math.pi / 3.0)
    r_t = _phase_projector(proc.dim, proc.target, math.pi / 3.0)
    u = proc.A.copy()
    for _ in range(depth):
        u = u @ r_s @ u.conj().T @ r_t @ u
    return u


def pi_over_3_amplify(proc: AmplitudeProcess, depth: int):
    psi = pi_over_3_operator(proc, depth)[:, proc.start]
    return psi, success_probability(psi, proc.target)


def pi_over_3_success(lam: float, depth: int) -> float:
    return 1.0 - (1.0 - lam) ** (3**depth)


# --- fixed-point amplification with Chebyshev phases ------------------------


def _gamma(L: int, delta: float) -> float:
    return 1.0 / chebyshev_T(1.0 / L, 1.0 / delta)


def fixed_point_angles(L: int, delta: float):
    """Phase pairs ``(alpha_j, beta_j)`` for j = 1..(L-1)/2.

    ``alpha_j = 2 arccot(tan(2 pi j / L) sqrt(1 - gamma^2))`` with the
    ``atan2`` branch of arccot, and ``beta_j = -alpha_{l-j+1}``.
    """
    if L < 1 or L % 2 == 0:
        raise ValidationError("L must be a positive odd integer")
    if not 0.0 < delta <= 1.0:
        raise ValidationError("delta must lie in (0, 1]")
    l = (L - 1) // 2
    g = _gamma(L, delta)
    root = math.sqrt(max(0.0, 1.0 - g * g))
    alphas = [2.0 * math.atan2(1.0, math.tan(2.0 * math.pi * j / L) * root) for j in range(1, l + 1)]
    betas = [-alphas[l - j] for j in range(1, l + 1)]
    return list(zip(alphas, betas))


def fixed_point_operator(proc: AmplitudeProcess, L: int, delta: float) -> np.ndarray:
    """``G(alpha_l, beta_l) ... G(alpha_1, beta_1)`` with ``G = -S_s(alpha) S_t(beta)``.

    ``S_s(a) = 1 - (1 - e^{-i a}) |s><s|`` for ``|s> = A|start>`` and
    ``S_t(b) = 1 - (1 - e^{i b}) P_t``.
    """
    s = proc.prepared
    q = np.eye(proc.dim, dtype=complex)
    for alpha, beta in fixed_point_angles(L, delta):
        g = -_phase_projector(proc.dim, s, -alpha) @ _phase_projector(proc.dim, proc.target, beta)
        q = g @ q
    return q


def fixed_point_amplify(proc: AmplitudeProcess, L: int, delta: float):
    psi = fixed_point_operator(proc, L, delta) @ proc.prepared
    return psi, success_probability(psi, proc.target)


def fixed_point_success(L: int, delta: float, lam: float) -> float:
    """``1 - delta^2 T_L(T_{1/L}(1/delta) sqrt(1 - lam))^2``."""
    x = chebyshev_T(1.0 / L, 1.0 / delta) * math.sqrt(max(0.0, 1.0 - lam))
    return 1.0 - delta**2 * chebyshev_T(L, x) ** 2


def fixed_point_width(L: int, delta: float) -> float:
    """Smallest overlap ``w`` guaranteed to reach success ``1 - delta^2``."""
    return 1.0 - chebyshev_T(1.0 / L, 1.0 / delta) ** -2


def fixed_point_length(lam: float, delta: float) -> int:
    """Smallest odd ``L >= log(2/delta) / sqrt(lam)``."""
    L = math.ceil(math.log(2.0 / delta) / math.sqrt(lam))
    return L if L % 2 else L + 1
