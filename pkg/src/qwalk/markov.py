"""Metropolis-Hastings chains over energy landscapes and their classical analysis.

Chains are row-stochastic: ``P[x, y]`` is the probability of stepping from
``x`` to ``y``, so distributions are row vectors and evolve as ``p @ P``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from . import caps
from .errors import (
    ErgodicityError,
    SingularityError,
    UnsupportedChainError,
    ValidationError,
)
from .landscape import EnergyLandscape
from .linalg import symmetric_eig

ROW_SUM_TOL = 1e-12
REVERSIBILITY_TOL = 1e-10
SCHEDULE_KINDS = ("fixed", "boltzmann", "cauchy", "geometric", "exponential")
DEFAULT_ALPHA = 0.9


@dataclass(frozen=True, eq=False)
class MarkovChain:
    P: np.ndarray
    beta: float | None = None

    def __post_init__(self):
        p = np.array(self.P, dtype=float)
        if p.ndim != 2 or p.shape[0] != p.shape[1] or p.shape[0] == 0:
            raise ValidationError(f"transition matrix must be square, got {p.shape}")
        if np.any(p < 0):
            raise ValidationError("transition probabilities must be nonnegative")
        err = np.max(np.abs(p.sum(axis=1) - 1.0))
        if err > ROW_SUM_TOL:
            raise ValidationError(f"rows must sum to 1 (max deviation {err:.3g})")
        p.setflags(write=False)
        object.__setattr__(self, "P", p)

    @property
    def dim(self) -> int:
        return self.P.shape[0]

    def is_symmetric(self, tol: float = REVERSIBILITY_TOL) -> bool:
        return bool(np.max(np.abs(self.P - self.P.T)) <= tol)


# --- construction -----------------------------------------------------------


def capped_beta(beta: float) -> float:
    if beta < 0 or math.isnan(beta):
        raise ValidationError(f"beta must be >= 0, got {beta}")
    if beta > caps.BETA_MAX:
        warnings.warn(
            f"beta={beta:.6g} exceeds {caps.BETA_MAX:g}; capping", RuntimeWarning, stacklevel=3
        )
        return caps.BETA_MAX
    return float(beta)


def metropolis_acceptance(landscape: EnergyLandscape, beta: float) -> np.ndarray:
    """``acc[m, s] = min(1, exp(-beta * (E(move(s, m)) - E(s))))``."""
    beta = capped_beta(beta)
    uphill = np.maximum(landscape.energy_deltas(), 0.0)
    return np.exp(-beta * uphill)


def build_metropolis_chain(landscape: EnergyLandscape, beta: float) -> MarkovChain:
    caps.require_dim(landscape.num_states, caps.DENSE_MAX_DIM, "dense chain dimension")
    acc = metropolis_acceptance(landscape, beta)
    n, moves = landscape.num_states, landscape.num_moves
    P = np.zeros((n, n))
    rows = np.arange(n)
    for m in range(moves):
        # with one bit per coordinate the +1 and -1 moves coincide, hence add.at
        np.add.at(P, (rows, landscape.neighbor_table[m]), acc[m] / moves)
    P[rows, rows] = 0.0
    P[rows, rows] = 1.0 - P.sum(axis=1)
    return MarkovChain(P, beta=float(beta))


def gibbs_distribution(landscape: EnergyLandscape, beta: float) -> np.ndarray:
    e = landscape.energies
    w = np.exp(-beta * (e - e.min()))
    return w / w.sum()


def random_reversible_chain(d: int, rng: np.random.Generator) -> MarkovChain:
    """Random ergodic reversible chain from a positive symmetric weight matrix."""
    w = rng.uniform(0.05, 1.0, size=(d, d))
    w = w + w.T
    return MarkovChain(w / w.sum(axis=1, keepdims=True))


def random_symmetric_chain(d: int, rng: np.random.Generator) -> MarkovChain:
    """Random ergodic doubly stochastic symmetric chain (uniform π)."""
    w = rng.uniform(0.05, 1.0, size=(d, d))
    w = w + w.T
    w /= w.sum(axis=1).max() * 1.0001
    w[np.diag_indices(d)] += 1.0 - w.sum(axis=1)
    return MarkovChain(w)


def lazy_ring_chain(d: int, stay: float = 1.0 / 3.0) -> MarkovChain:
    P = np.zeros((d, d))
    idx = np.arange(d)
    move = (1.0 - stay) / 2.0
    P[idx, idx] += stay
    P[idx, (idx + 1) % d] += move
    P[idx, (idx - 1) % d] += move
    return MarkovChain(P)


# --- ergodicity and stationarity -------------------------------------------


def _bfs_levels(adj: np.ndarray, start: int = 0) -> np.ndarray:
    level = np.full(adj.shape[0], -1, dtype=np.int64)
    level[start] = 0
    frontier = np.array([start])
    depth = 0
    while frontier.size:
        depth += 1
        reached = adj[frontier].any(axis=0) & (level < 0)
        frontier = np.flatnonzero(reached)
        level[frontier] = depth
    return level


def chain_period(chain: MarkovChain) -> int:
    """Period of an irreducible chain (gcd of cycle lengths through BFS levels)."""
    adj = chain.P > 0
    level = _bfs_levels(adj)
    u, v = np.nonzero(adj)
    return int(np.gcd.reduce(np.abs(level[u] + 1 - level[v])))


def is_irreducible(chain: MarkovChain) -> bool:
    adj = chain.P > 0
    return bool(np.all(_bfs_levels(adj) >= 0) and np.all(_bfs_levels(adj.T) >= 0))


def is_ergodic(chain: MarkovChain) -> bool:
    return is_irreducible(chain) and chain_period(chain) == 1


def require_ergodic(chain: MarkovChain) -> None:
    if not is_irreducible(chain):
        raise ErgodicityError("chain is reducible")
    period = chain_period(chain)
    if period != 1:
        raise ErgodicityError(f"chain is periodic with period {period}")


def stationary_distribution(chain: MarkovChain, require_aperiodic: bool = True) -> np.ndarray:
    """Unique stationary distribution by Grassmann-Taksar-Heyman elimination.

    GTH uses no subtractions, so tiny Gibbs weights keep full relative
    accuracy even at large beta.  Irreducibility alone makes pi unique;
    ``require_aperiodic=False`` accepts periodic chains such as a Metropolis
    chain at beta = 0, whose move graph is bipartite.
    """
    if require_aperiodic:
        require_ergodic(chain)
    elif not is_irreducible(chain):
        raise ErgodicityError("chain is reducible")
    a = chain.P.copy()
    n = a.shape[0]
    for k in range(n - 1, 0, -1):
        s = a[k, :k].sum()
        a[:k, k] /= s
        a[:k, :k] += np.outer(a[:k, k], a[k, :k])
    pi = np.zeros(n)
    pi[0] = 1.0
    for k in range(1, n):
        pi[k] = pi[:k] @ a[:k, k]
    pi /= pi.sum()
    pi.setflags(write=False)
    return pi


def check_detailed_balance(chain: MarkovChain, pi, tol: float = 1e-12) -> bool:
    pi = np.asarray(pi, dtype=float)
    if pi.shape != (chain.dim,):
        raise ValidationError("pi does not match the chain dimension")
    flow = pi[:, None] * chain.P
    return bool(np.max(np.abs(flow - flow.T)) <= tol)


def discriminant(chain: MarkovChain, pi=None) -> np.ndarray:
    """``D[x, y] = sqrt(pi_x / pi_y) * P[x, y]``, symmetric for reversible chains."""
    if pi is None:
        pi = stationary_distribution(chain)
    pi = np.asarray(pi, dtype=float)
    if np.any(pi <= 0):
        raise SingularityError("stationary distribution has zero mass")
    root = np.sqrt(pi)
    d = (root[:, None] / root[None, :]) * chain.P
    asym = np.max(np.abs(d - d.T))
    if asym > REVERSIBILITY_TOL:
        raise UnsupportedChainError(f"chain is not reversible (asymmetry {asym:.3g})")
    return 0.5 * (d + d.T)


def _spectral_matrix(chain: MarkovChain) -> np.ndarray:
    if chain.is_symmetric():
        return 0.5 * (chain.P + chain.P.T)
    return discriminant(chain)


def eigenvalue_gap(chain: MarkovChain) -> float:
    """``1 - |lambda_2|`` from the discriminant spectrum.

    A symmetric chain is its own discriminant, so it needs no stationary
    solve; this keeps the gap defined (as 0) for the identity chain.
    """
    if chain.dim == 1:
        return 1.0
    ev = symmetric_eig(_spectral_matrix(chain)).eigenvalues
    mags = np.sort(np.abs(ev))[::-1]
    return float(1.0 - mags[1])


# --- annealing schedules ----------------------------------------------------


@dataclass(frozen=True)
class AnnealingSchedule:
    kind: str
    beta1: float
    alpha: float = DEFAULT_ALPHA
    dimension_n: int = 1

    def __post_init__(self):
        if self.kind not in SCHEDULE_KINDS:
            raise ValidationError(f"unknown schedule kind {self.kind!r}")
        if not self.beta1 > 0:
            raise ValidationError("beta1 must be positive")
        if self.dimension_n < 1:
            raise ValidationError("dimension_n must be positive")

    def beta(self, t: int) -> float:
        return schedule_beta(self, t)


def schedule_beta(s: AnnealingSchedule, t: int) -> float:
    if t < 1:
        raise ValidationError(f"t must be >= 1, got {t}")
    try:
        if s.kind == "fixed":
            return s.beta1
        if s.kind == "boltzmann":
            return s.beta1 * (math.log(t) + 1.0)
        if s.kind == "cauchy":
            return s.beta1 * t
        if s.kind == "geometric":
            return s.beta1 * s.alpha ** (-(t - 1))
        return s.beta1 * math.exp(s.alpha * (t - 1) ** (1.0 / s.dimension_n))
    except OverflowError:
        return math.inf


# --- classical annealing ----------------------------------------------------


def initial_ground_mass(landscape: EnergyLandscape) -> float:
    return len(landscape.ground_set) / landscape.num_states


def _move_probabilities(landscape, beta, absorbing):
    q = metropolis_acceptance(landscape, beta) / landscape.num_moves
    if absorbing is not None:
        q[:, absorbing] = 0.0
    return q


def classical_distributions(landscape, schedule, T: int, event: str = "occupancy"):
    """Yield the exact state distribution after each annealing step t = 1..T."""
    if event not in ("occupancy", "first_hit"):
        raise ValidationError(f"unknown event {event!r}")
    caps.require_dim(landscape.num_states, caps.PROPAGATION_MAX_STATES, "state count")
    absorbing = landscape.is_ground() if event == "first_hit" else None
    table = landscape.neighbor_table
    dist = np.full(landscape.num_states, 1.0 / landscape.num_states)
    for t in range(1, T + 1):
        q = _move_probabilities(landscape, schedule_beta(schedule, t), absorbing)
        new = dist * (1.0 - q.sum(axis=0))
        for m in range(landscape.num_moves):
            # each move is a bijection of the state space, so no index repeats
            new[table[m]] += dist * q[m]
        dist = new
        yield dist


def classical_success_probability(landscape, schedule, T: int, event: str = "occupancy"):
    """Ground-set probability p(t), t = 1..T, when annealing from the uniform state.

    ``event="occupancy"`` measures the walker at step t; ``"first_hit"`` makes
    ground states absorbing so p(t) is the probability of having hit one by t.
    """
    if T < 1:
        raise ValidationError("T must be >= 1")
    ground = list(landscape.ground_set)
    return np.array(
        [d[ground].sum() for d in classical_distributions(landscape, schedule, T, event)]
    )


def sample_classical_success(
    landscape, schedule, T: int, walkers: int, seed: int, event: str = "occupancy"
):
    """Monte-Carlo estimate of ``classical_success_probability`` from seeded walkers."""
    if event not in ("occupancy", "first_hit"):
        raise ValidationError(f"unknown event {event!r}")
    rng = np.random.default_rng(seed)
    ground = landscape.is_ground()
    table, energies = landscape.neighbor_table, landscape.energies
    s = rng.integers(landscape.num_states, size=walkers)
    hit = ground[s]
    out = np.empty(T)
    for t in range(1, T + 1):
        beta = capped_beta(schedule_beta(schedule, t))
        m = rng.integers(landscape.num_moves, size=walkers)
        y = table[m, s]
        acc = np.exp(-beta * np.maximum(energies[y] - energies[s], 0.0))
        move = rng.random(walkers) < acc
        if event == "first_hit":
            move &= ~hit
        s = np.where(move, y, s)
        hit |= ground[s]
        out[t - 1] = (hit if event == "first_hit" else ground[s]).mean()
    return out


# --- hitting and mixing times ----------------------------------------------


def _marked_mask(d: int, marked) -> np.ndarray:
    idx = np.asarray(sorted(set(int(i) for i in marked)), dtype=int)
    if idx.size == 0:
        raise ValidationError("marked set must be nonempty")
    if idx.min() < 0 or idx.max() >= d:
        raise ValidationError("marked index out of range")
    mask = np.zeros(d, dtype=bool)
    mask[idx] = True
    return mask


def hitting_time(chain: MarkovChain, marked) -> float:
    """Expected steps to reach a marked state from pi conditioned on unmarked.

    Uses the spectrum of the discriminant of the unmarked block,
    ``HT = sum_k <phi_k|sqrt(pi_U)>^2 / (1 - lambda_k)`` with unit ``sqrt(pi_U)``.
    """
    mask = _marked_mask(chain.dim, marked)
    if mask.all():
        return 0.0
    pi = stationary_distribution(chain)
    discriminant(chain, pi)  # reversibility check
    u = ~mask
    puu = chain.P[np.ix_(u, u)]
    duu = np.sqrt(puu * puu.T)
    root = np.sqrt(pi[u])
    root /= np.linalg.norm(root)
    spec = symmetric_eig(duu)
    overlaps = (spec.eigenvectors.T @ root) ** 2
    total = 0.0
    for lam, w in zip(spec.eigenvalues, overlaps):
        gap = 1.0 - lam
        if gap <= 1e-12:
            if w > 1e-12:
                return math.inf
            continue
        total += w / gap
    return float(total)


def total_variation(p, q) -> float:
    return 0.5 * float(np.abs(np.asarray(p) - np.asarray(q)).sum())


def mixing_time(chain: MarkovChain, eps: float, t_max: int = 100_000) -> int:
    """First t with worst point-mass total-variation distance to pi at most eps."""
    if not 0 < eps < 1:
        raise ValidationError("eps must lie in (0, 1)")
    pi = stationary_distribution(chain)
    dists = np.eye(chain.dim)
    previous = math.inf
    for t in range(1, t_max + 1):
        dists = dists @ chain.P
        worst = 0.5 * float(np.abs(dists - pi[None, :]).sum(axis=1).max())
        if worst > previous + 1e-12:
            raise ErgodicityError("distance to stationarity increased under P")
        previous = worst
        if worst <= eps:
            return t
    raise ValidationError(f"chain did not mix to {eps} within {t_max} steps")
