"""Dense vector/matrix kernels used throughout the package.

Everything here is a pure function of its inputs.  Matrices are plain
``numpy.ndarray`` objects; walk spaces are small enough that dense storage is
both the simplest and the fastest option.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, ValidationError

UNITARY_TOL = 1e-10
RECONSTRUCTION_TOL = 1e-8
NORMALIZATION_TOL = 1e-10
SYMMETRY_TOL = 1e-10
JACOBI_TOL = 1e-12
JACOBI_MAX_SWEEPS = 100


@dataclass(frozen=True)
class SpectralData:
    """Eigen-decomposition of a real symmetric matrix.

    ``eigenvalues`` are sorted in descending order and ``eigenvectors[:, j]``
    is the unit eigenvector belonging to ``eigenvalues[j]``.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        v = self.eigenvectors
        return (v * self.eigenvalues) @ v.T


def _require_square(m: np.ndarray, name: str = "matrix") -> None:
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DimensionError(f"{name} must be square, got shape {m.shape}")


def is_unitary(m, tol: float = UNITARY_TOL) -> bool:
    """True iff ``max |(M^dagger M - I)_ij| <= tol``."""
    m = np.asarray(m)
    _require_square(m)
    gram = m.conj().T @ m
    gram[np.diag_indices_from(gram)] -= 1.0
    return bool(np.max(np.abs(gram), initial=0.0) <= tol)


def is_normalized(v, tol: float = NORMALIZATION_TOL) -> bool:
    v = np.asarray(v)
    return bool(abs(np.vdot(v, v).real - 1.0) <= tol)


def normalize(v) -> np.ndarray:
    v = np.asarray(v, dtype=complex)
    norm = np.linalg.norm(v)
    if norm == 0.0:
        raise ValidationError("cannot normalize the zero vector")
    return v / norm


def apply(m, v) -> np.ndarray:
    """Dense matrix-vector product with a shape check."""
    m = np.asarray(m)
    v = np.asarray(v)
    if m.ndim != 2 or v.ndim != 1 or m.shape[1] != v.shape[0]:
        raise DimensionError(f"cannot apply {m.shape} matrix to {v.shape} vector")
    return m @ v


def kron(a, b) -> np.ndarray:
    a = np.asarray(a)
    b = np.asarray(b)
    if a.ndim != 2 or b.ndim != 2:
        raise DimensionError("kron expects two matrices")
    return np.kron(a, b)


def _round_robin(n: int):
    """Yield rounds of disjoint index pairs covering every pair exactly once."""
    players = list(range(n)) + ([-1] if n % 2 else [])
    m = len(players)
    for _ in range(m - 1):
        pairs = [(players[i], players[m - 1 - i]) for i in range(m // 2)]
        yield [(p, q) if p < q else (q, p) for p, q in pairs if p >= 0 and q >= 0]
        players = [players[0], players[-1]] + players[1:-1]


def symmetric_eig(s, tol: float = JACOBI_TOL) -> SpectralData:
    """Eigen-decomposition of a real symmetric matrix by cyclic Jacobi rotations.

    Rotations on disjoint index pairs commute, so each round of a round-robin
    ordering is applied as one vectorized update.  Sweeps continue until the
    off-diagonal Frobenius norm drops below ``tol * max(1, ||S||_F)``.
    """
    s = np.asarray(s)
    _require_square(s)
    if np.iscomplexobj(s):
        if np.max(np.abs(s.imag), initial=0.0) > SYMMETRY_TOL:
            raise ValidationError("symmetric_eig expects a real matrix")
        s = s.real
    s = s.astype(float)
    if np.max(np.abs(s - s.T), initial=0.0) > SYMMETRY_TOL:
        raise ValidationError("matrix is not symmetric within 1e-10")

    n = s.shape[0]
    a = 0.5 * (s + s.T)
    v = np.eye(n)
    threshold = tol * max(1.0, float(np.linalg.norm(a)))
    rounds = [np.array(r, dtype=int).reshape(-1, 2) for r in _round_robin(n)]

    offdiag = ~np.eye(n, dtype=bool)
    for _ in range(JACOBI_MAX_SWEEPS):
        if np.linalg.norm(a[offdiag]) <= threshold:
            break
        for pairs in rounds:
            if pairs.size == 0:
                continue
            p, q = pairs[:, 0], pairs[:, 1]
            apq = a[p, q]
            active = np.abs(apq) > 1e-300
            if not np.any(active):
                continue
            p, q, apq = p[active], q[active], apq[active]
            theta = (a[q, q] - a[p, p]) / (2.0 * apq)
            t = np.sign(theta) / (np.abs(theta) + np.sqrt(theta * theta + 1.0))
            t[theta == 0.0] = 1.0
            c = 1.0 / np.sqrt(t * t + 1.0)
            sn = t * c

            rp, rq = a[p, :].copy(), a[q, :].copy()
            a[p, :] = c[:, None] * rp - sn[:, None] * rq
            a[q, :] = sn[:, None] * rp + c[:, None] * rq
            cp, cq = a[:, p].copy(), a[:, q].copy()
            a[:, p] = cp * c - cq * sn
            a[:, q] = cp * sn + cq * c
            a[p, q] = 0.0
            a[q, p] = 0.0

            vp, vq = v[:, p].copy(), v[:, q].copy()
            v[:, p] = vp * c - vq * sn
            v[:, q] = vp * sn + vq * c

    evals = np.diag(a).copy()
    order = np.argsort(-evals, kind="stable")
    return SpectralData(eigenvalues=evals[order], eigenvectors=v[:, order])
