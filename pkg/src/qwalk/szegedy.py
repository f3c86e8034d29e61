"""Szegedy bipartite walks, fast forwarding, LCU blocks and quantum detection.

Bipartite basis ``|x, y>`` has flat index ``x * d + y``.  The update map
``U`` is block diagonal with ``U|x, 0> = |x> sum_y sqrt(P[x, y]) |y>``, and
``S`` swaps the two registers.  Operators are stored in the frame rotated by
``U^dagger`` (the "U-frame"), where the A-subspace is simply
``span{|x, 0>}``:

* ``M = U^dagger S U`` (a reflection, ``M^2 = 1``);
* ``R_A = 1 (x) (2|0><0| - 1)``;
* ``W = M R_A M R_A`` is the two-reflection walk ``R_B R_A``;
* ``W_qff = R_A M`` is the single-step walk whose A-block powers are
  Chebyshev polynomials of the discriminant.

``lab_walk`` converts back to the unrotated frame.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import caps
from .errors import UnsupportedChainError, ValidationError
from .linalg import NORMALIZATION_TOL, is_normalized, symmetric_eig
from .markov import (
    MarkovChain,
    discriminant,
    eigenvalue_gap,
    stationary_distribution,
)

ZERO_PROB_TOL = 1e-14


def _householder_to(u: np.ndarray) -> np.ndarray:
    """Real orthogonal reflection mapping ``e_0`` to the unit vector ``u``."""
    d = u.shape[0]
    w = -u.copy()
    w[0] += 1.0
    nw = float(w @ w)
    if nw < 1e-30:
        return np.eye(d)
    return np.eye(d) - 2.0 * np.outer(w, w) / nw


def update_map(P: np.ndarray) -> np.ndarray:
    """Block-diagonal ``U`` with ``U|x, 0> = |x> sum_y sqrt(P[x, y]) |y>``."""
    d = P.shape[0]
    U = np.zeros((d * d, d * d))
    for x in range(d):
        U[x * d : (x + 1) * d, x * d : (x + 1) * d] = _householder_to(np.sqrt(P[x]))
    return U


def swap_operator(d: int) -> np.ndarray:
    idx = np.arange(d * d)
    S = np.zeros((d * d, d * d))
    S[(idx % d) * d + idx // d, idx] = 1.0
    return S


def embedding(d: int) -> np.ndarray:
    """``E|x> = |x, 0>``, a ``d^2 x d`` isometry."""
    E = np.zeros((d * d, d))
    E[np.arange(d) * d, np.arange(d)] = 1.0
    return E


@dataclass(frozen=True, eq=False)
class SzegedyWalk:
    dim_base: int
    chain: MarkovChain
    pi: np.ndarray
    D: np.ndarray
    U: np.ndarray
    M: np.ndarray
    R_A: np.ndarray
    W: np.ndarray
    W_qff: np.ndarray
    E: np.ndarray

    @property
    def T_isometry(self) -> np.ndarray:
        """``|x> -> |x> sum_y sqrt(P[x, y]) |y>`` in the lab frame."""
        return self.U @ self.E

    @property
    def proj_A(self) -> np.ndarray:
        return self.E @ self.E.T

    def lab_walk(self) -> np.ndarray:
        return self.U @ self.W @ self.U.T

    def stationary_state(self) -> np.ndarray:
        """U-frame coherent stationary state ``sum_x sqrt(pi_x) |x, 0>``."""
        return self.E @ np.sqrt(self.pi)


def _walk_operators(P: np.ndarray):
    d = P.shape[0]
    caps.require_dim(d * d, caps.DENSE_MAX_DIM, "bipartite dimension")
    U = update_map(P)
    M = U.T @ swap_operator(d) @ U
    E = embedding(d)
    R_A = 2.0 * (E @ E.T) - np.eye(d * d)
    return U, M, R_A, E


def build_szegedy_walk(chain: MarkovChain) -> SzegedyWalk:
    pi = stationary_distribution(chain)
    D = discriminant(chain, pi)
    U, M, R_A, E = _walk_operators(chain.P)
    W = M @ R_A @ M @ R_A
    W_qff = R_A @ M
    return SzegedyWalk(chain.dim, chain, pi, D, U, M, R_A, W, W_qff, E)


def plane_rotations(walk: SzegedyWalk):
    """Per discriminant eigenvector, ``(lambda_j, angle_j)`` of the walk.

    On the plane spanned by ``a = E v_j`` and the unit part of ``M a`` that is
    orthogonal to ``a``, ``W`` rotates by ``angle_j = 2 phi_j``.  The angle is
    read off ``W a`` in ``[0, 2 pi)`` so ``cos(angle_j / 2)`` recovers the
    signed eigenvalue.  One-dimensional planes (``|lambda| = 1``) report the
    phase of ``<a|W|a>``.
    """
    spec = symmetric_eig(walk.D)
    out = []
    for lam, v in zip(spec.eigenvalues, spec.eigenvectors.T):
        a = walk.E @ v
        wa = walk.W @ a
        c = float(a @ wa)
        r = walk.M @ a - lam * a
        nr = float(np.linalg.norm(r))
        s = float((r / nr) @ wa) if nr > 1e-12 else 0.0
        angle = math.atan2(s, c) % (2.0 * math.pi)
        out.append((float(lam), angle))
    return out


def phase_gap(walk: SzegedyWalk) -> float:
    """``2 arccos`` of the second-largest discriminant eigenvalue magnitude."""
    if walk.dim_base == 1:
        return math.pi
    mags = np.sort(np.abs(symmetric_eig(walk.D).eigenvalues))[::-1]
    return 2.0 * math.acos(min(1.0, float(mags[1])))


# --- quantum fast forwarding ---------------------------------------------


def qff_coefficients(t: int, tau: int) -> np.ndarray:
    """Chebyshev coefficients of ``cos^t`` truncated to degrees ``0..tau``.

    ``cos^t x = sum_l p_l cos(l x)`` with ``p_l = 2^(1-t) C(t, (t-l)/2)``
    for ``l > 0`` of the same parity as t, and ``p_0 = 2^-t C(t, t/2)``.
    """
    if t < 1:
        raise ValidationError("t must be positive")
    if not 0 <= tau <= t:
        raise ValidationError("tau must lie in [0, t]")
    p = np.zeros(tau + 1)
    for l in range(t % 2, tau + 1, 2):
        scale = 1 if l == 0 else 2
        p[l] = scale * math.comb(t, (t - l) // 2) / (1 << t)
    return p


def qff_tau(t: int, eps: float) -> int:
    if not eps > 0:
        raise ValidationError("eps must be positive")
    return min(int(math.ceil(math.sqrt(2.0 * t * math.log(2.0 / eps)))), t)


def quantum_fast_forward(walk: SzegedyWalk, psi, t: int, eps: float, tau: int | None = None):
    """Approximate ``D^t psi`` by ``sum_l p_l Pi_A W_qff^l`` on the A-subspace.

    Returns ``(state, success)``: the normalized A-component and its squared
    norm, so ``state * sqrt(success)`` is the unnormalized approximation.
    """
    psi = np.asarray(psi, dtype=complex)
    if psi.shape != (walk.dim_base,):
        raise ValidationError("psi must live on the chain's state space")
    if not is_normalized(psi, NORMALIZATION_TOL):
        raise ValidationError("psi must be normalized")
    if tau is None:
        tau = qff_tau(t, eps)
    elif not eps > 0:
        raise ValidationError("eps must be positive")
    coeffs = qff_coefficients(t, tau)
    phi = walk.E @ psi
    acc = np.zeros(walk.dim_base, dtype=complex)
    for l, p in enumerate(coeffs):
        if p:
            acc += p * (walk.E.T @ phi)
        phi = walk.W_qff @ phi
    success = float(np.vdot(acc, acc).real)
    if success == 0.0:
        return None, 0.0
    return acc / math.sqrt(success), success


# --- linear combination of unitaries -------------------------------------


@dataclass(frozen=True, eq=False)
class LCUProgram:
    coefficients: np.ndarray
    unitaries: tuple

    def __post_init__(self):
        c = np.asarray(self.coefficients, dtype=float)
        us = tuple(np.asarray(u, dtype=complex) for u in self.unitaries)
        if c.ndim != 1 or c.size == 0 or c.size != len(us):
            raise ValidationError("need one nonnegative coefficient per unitary")
        if np.any(c < 0) or not np.any(c > 0):
            raise ValidationError("coefficients must be nonnegative with one positive")
        shape = us[0].shape
        if len(shape) != 2 or shape[0] != shape[1] or any(u.shape != shape for u in us):
            raise ValidationError("unitaries must be square and of equal size")
        object.__setattr__(self, "coefficients", c)
        object.__setattr__(self, "unitaries", us)

    @property
    def ancilla_dim(self) -> int:
        return 1 << max(0, (self.coefficients.size - 1).bit_length())

    @property
    def system_dim(self) -> int:
        return self.unitaries[0].shape[0]


def prep_operator(prog: LCUProgram) -> np.ndarray:
    """Real unitary on the ancilla with first column ``sqrt(p / sum p)``."""
    col = np.zeros(prog.ancilla_dim)
    col[: prog.coefficients.size] = np.sqrt(prog.coefficients / prog.coefficients.sum())
    return _householder_to(col)


def select_operator(prog: LCUProgram) -> np.ndarray:
    """``sum_l |l><l| (x) U_l`` padded with identities."""
    a, n = prog.ancilla_dim, prog.system_dim
    sel = np.eye(a * n, dtype=complex)
    for l, u in enumerate(prog.unitaries):
        sel[l * n : (l + 1) * n, l * n : (l + 1) * n] = u
    return sel


def lcu_block_encoding(prog: LCUProgram) -> np.ndarray:
    """Dense ``(Prep^dagger (x) 1) Sel (Prep (x) 1)``."""
    caps.require_dim(prog.ancilla_dim * prog.system_dim, caps.DENSE_MAX_DIM, "LCU dimension")
    prep = np.kron(prep_operator(prog), np.eye(prog.system_dim))
    return prep.T @ select_operator(prog) @ prep


def lcu_apply(prog: LCUProgram, psi):
    """Run the block on ``|0>|psi>`` and post-select the ancilla on ``|0>``.

    The branch is ``sum_l p_l U_l psi / sum_l p_l``; returns the normalized
    branch and its probability, or ``(None, 0.0)`` if the branch vanishes.
    """
    psi = np.asarray(psi, dtype=complex)
    n = prog.system_dim
    if psi.shape != (n,):
        raise ValidationError("psi does not match the unitaries")
    prep = prep_operator(prog)
    # Prep (x) 1 on |0>|psi>, then Sel blockwise, then row 0 of Prep^dagger
    blocks = prep[:, 0][:, None] * psi[None, :]
    for l, u in enumerate(prog.unitaries):
        blocks[l] = u @ blocks[l]
    branch = prep[:, 0] @ blocks
    success = float(np.vdot(branch, branch).real)
    if success <= ZERO_PROB_TOL**2:
        return None, 0.0
    return branch / math.sqrt(success), success


# --- quantum detection ----------------------------------------------------


def absorbing_chain(chain: MarkovChain, marked) -> MarkovChain:
    """Delete marked-to-unmarked transitions, moving their mass to self-loops."""
    mask = np.zeros(chain.dim, dtype=bool)
    mask[list(marked)] = True
    P = chain.P.copy()
    for x in np.flatnonzero(mask):
        leak = P[x, ~mask].sum()
        P[x, ~mask] = 0.0
        P[x, x] += leak
    return MarkovChain(P)


def detection_t_max(chain: MarkovChain, eps: float, c: float = 4.0) -> int:
    delta = eigenvalue_gap(chain)
    if delta <= 0:
        raise UnsupportedChainError("chain has no eigenvalue gap")
    return int(math.ceil(c / math.sqrt(delta * eps)))


def detection_probabilities(chain: MarkovChain, marked, eps: float, c: float = 4.0):
    """``q[t-1] = ||(1 - W'^t)|pi>||^2 / 4`` for t = 1..t_max.

    ``|pi>`` is the coherent stationary state of the original walk and
    ``W'`` the walk of the absorbing chain, both in the lab frame.  Values
    below ``1e-14`` are rounding noise of an exact zero and are set to 0.
    """
    if not chain.is_symmetric():
        raise UnsupportedChainError("detection needs a symmetric chain")
    marked = sorted(set(int(i) for i in marked))
    if any(not 0 <= i < chain.dim for i in marked):
        raise ValidationError("marked index out of range")
    if marked and len(marked) < eps * chain.dim:
        raise ValidationError("fewer than eps * d marked states")
    t_max = detection_t_max(chain, eps, c)
    d = chain.dim
    pi = np.full(d, 1.0 / d)
    U, _, _, E = _walk_operators(chain.P)
    start = U @ E @ np.sqrt(pi)
    Up, Mp, R_A, _ = _walk_operators(absorbing_chain(chain, marked).P)
    w_lab = Up @ (Mp @ R_A @ Mp @ R_A) @ Up.T
    q = np.empty(t_max)
    phi = start.copy()
    for t in range(t_max):
        phi = w_lab @ phi
        diff = start - phi
        q[t] = 0.25 * float(diff @ diff)
    q[q < ZERO_PROB_TOL] = 0.0
    return q


def detection_repetitions(p_f: float, factor: float = 2.0) -> int:
    if not 0 < p_f < 1:
        raise ValidationError("p_f must lie in (0, 1)")
    return int(math.ceil(factor * math.log(1.0 / p_f)))


def szegedy_detect(
    chain: MarkovChain,
    marked,
    eps: float,
    p_f: float,
    rng_seed,
    c: float = 4.0,
    reps: int | None = None,
) -> bool:
    """Swap-test detection: True iff some repetition measures the control in |1>.

    Each repetition draws t uniformly from ``[1, ceil(c / sqrt(delta eps))]``.
    With no marked state ``W' = W`` fixes ``|pi>`` and the result is False
    with certainty.
    """
    q = detection_probabilities(chain, marked, eps, c)
    if reps is None:
        reps = detection_repetitions(p_f)
    rng = np.random.default_rng(rng_seed)
    for _ in range(reps):
        t = int(rng.integers(1, q.size + 1))
        if q[t - 1] > 0.0 and rng.random() < q[t - 1]:
            return True
    return False
