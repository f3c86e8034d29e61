"""Coin-based quantum Metropolis walk and schedule-driven evolution.

Registers are system ``s`` (the landscape state), move ``m`` (one of the
``2N`` coordinate moves) and a Boltzmann coin ``c``, flattened as
``(s * moves + m) * 2 + c``.  One walk step is

    W~ = R V^dagger B^dagger F B V

* ``V`` maps move ``|0>`` to the uniform superposition over moves (a real
  Householder reflection, so ``V^dagger = V``);
* ``B`` rotates the coin so that ``|s, m, 0>`` gains amplitude ``sqrt(A)`` on
  ``|1>``, with ``A`` the Metropolis acceptance of ``s -> move(s, m)``;
* ``F`` sends ``|s, m, 1> -> |move(s, m), m ^ 1, 1>`` and fixes coin ``|0>``;
* ``R = 1 - 2|0><0|`` on move and coin.

``F`` relabels the move to its inverse so that ``F`` is an involution; the
walk then satisfies ``<x,0,0| W~^t |y,0,0> = (-1)^t T_t(D)[x, y]``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import caps
from .errors import ValidationError
from .landscape import EnergyLandscape
from .markov import AnnealingSchedule, MarkovChain, metropolis_acceptance, schedule_beta
from .qpe import phase_estimate_branches
from .szegedy import build_szegedy_walk


@dataclass(frozen=True)
class RegisterLayout:
    num_states: int
    num_moves: int

    @property
    def dim(self) -> int:
        return self.num_states * self.num_moves * 2

    @property
    def shape(self) -> tuple:
        return (self.num_states, self.num_moves, 2)

    def index(self, s: int, m: int, c: int) -> int:
        return (s * self.num_moves + m) * 2 + c

    def system_of(self, index):
        return np.asarray(index) // (2 * self.num_moves)


def layout_for(landscape: EnergyLandscape) -> RegisterLayout:
    return RegisterLayout(landscape.num_states, landscape.num_moves)


def _move_reflection(k: int) -> np.ndarray:
    u = np.full(k, 1.0 / math.sqrt(k))
    w = -u
    w[0] += 1.0
    nw = float(w @ w)
    if nw < 1e-30:
        return np.eye(k)
    return np.eye(k) - 2.0 * np.outer(w, w) / nw


@dataclass(frozen=True, eq=False)
class CoinWalk:
    landscape: EnergyLandscape
    beta: float
    layout: RegisterLayout
    acceptance: np.ndarray  # acceptance[s, m]
    _V: np.ndarray = field(repr=False)
    _cos: np.ndarray = field(repr=False)
    _sin: np.ndarray = field(repr=False)
    _target: np.ndarray = field(repr=False)
    _inverse_move: np.ndarray = field(repr=False)

    @property
    def dim(self) -> int:
        return self.layout.dim

    def _V_apply(self, x):
        return np.einsum("nm,smc->snc", self._V, x)

    def _B_apply(self, x, dagger=False):
        c, s = self._cos, (-self._sin if dagger else self._sin)
        x0, x1 = x[..., 0], x[..., 1]
        return np.stack([c * x0 - s * x1, s * x0 + c * x1], axis=-1)

    def _F_apply(self, x):
        out = x.copy()
        out[self._target, self._inverse_move, 1] = x[..., 1]
        return out

    def apply(self, psi) -> np.ndarray:
        x = np.asarray(psi, dtype=complex).reshape(self.layout.shape)
        x = self._V_apply(x)
        x = self._B_apply(x)
        x = self._F_apply(x)
        x = self._B_apply(x, dagger=True)
        x = self._V_apply(x)
        x[:, 0, 0] *= -1.0
        return x.reshape(-1)

    def matrix(self) -> np.ndarray:
        caps.require_dim(self.dim, caps.DENSE_MAX_DIM, "dense coin walk dimension")
        eye = np.eye(self.dim, dtype=complex)
        return np.stack([self.apply(col) for col in eye], axis=1)


def build_coin_walk(landscape: EnergyLandscape, beta: float) -> CoinWalk:
    layout = layout_for(landscape)
    caps.require_dim(layout.dim, caps.COIN_WALK_MAX_DIM, "coin walk dimension")
    acc = metropolis_acceptance(landscape, beta).T.copy()
    k = landscape.num_moves
    target = landscape.neighbor_table.T.copy()
    inverse = np.broadcast_to(np.arange(k) ^ 1, target.shape).copy()
    return CoinWalk(
        landscape,
        float(beta),
        layout,
        acc,
        _move_reflection(k),
        np.sqrt(1.0 - acc),
        np.sqrt(acc),
        target,
        inverse,
    )


def initial_state(landscape: EnergyLandscape) -> np.ndarray:
    """Uniform system superposition with move and coin registers in ``|0>``."""
    layout = layout_for(landscape)
    x = np.zeros(layout.shape, dtype=complex)
    x[:, 0, 0] = 1.0 / math.sqrt(landscape.num_states)
    return x.reshape(-1)


def system_marginal(state, layout: RegisterLayout) -> np.ndarray:
    probs = np.abs(np.asarray(state).reshape(layout.shape)) ** 2
    return probs.sum(axis=(1, 2))


def quantum_success_probability(state, layout: RegisterLayout, ground_set) -> float:
    return float(system_marginal(state, layout)[list(ground_set)].sum())


@dataclass(frozen=True, eq=False)
class EvolutionTrace:
    schedule: AnnealingSchedule
    p: np.ndarray
    final_state: np.ndarray


def evolve_states(landscape: EnergyLandscape, schedule: AnnealingSchedule, T: int):
    """Yield the full register state after each step t = 1..T."""
    if T < 1:
        raise ValidationError("T must be >= 1")
    psi = initial_state(landscape)
    for t in range(1, T + 1):
        psi = build_coin_walk(landscape, schedule_beta(schedule, t)).apply(psi)
        yield psi


def evolve_schedule(landscape: EnergyLandscape, schedule: AnnealingSchedule, T: int):
    layout = layout_for(landscape)
    ground = landscape.ground_set
    p = np.empty(T)
    psi = None
    for t, psi in enumerate(evolve_states(landscape, schedule, T)):
        p[t] = quantum_success_probability(psi, layout, ground)
    return EvolutionTrace(schedule, p, psi)


def sample_success(state, layout: RegisterLayout, ground_set, shots: int, rng) -> float:
    """Fraction of computational-basis measurements whose system part is ground."""
    probs = np.abs(np.asarray(state)) ** 2
    probs = probs / probs.sum()
    outcomes = rng.choice(probs.size, size=shots, p=probs)
    mask = np.zeros(layout.num_states, dtype=bool)
    mask[list(ground_set)] = True
    return float(mask[layout.system_of(outcomes)].mean())


def sample_evolution(landscape, schedule, T: int, shots: int, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    layout = layout_for(landscape)
    return np.array(
        [
            sample_success(psi, layout, landscape.ground_set, shots, rng)
            for psi in evolve_states(landscape, schedule, T)
        ]
    )


# --- Zeno annealing -----------------------------------------------------


@dataclass(frozen=True, eq=False)
class ZenoResult:
    final_state: np.ndarray | None = field(repr=False)
    success: bool
    restarts: int


def stationary_overlaps(chains) -> np.ndarray:
    """``|<pi_i|pi_{i+1}>|^2`` for the coherent states ``sum_x sqrt(pi_x) |x>``."""
    walks = [build_szegedy_walk(c) for c in chains]
    roots = [np.sqrt(w.pi) for w in walks]
    return np.array([float(roots[i] @ roots[i + 1]) ** 2 for i in range(len(roots) - 1)])


def zeno_anneal(chains, qpe_bits: int, rng_seed, max_restarts: int = 100) -> ZenoResult:
    """Step through the chains with phase estimation, restarting on a nonzero phase.

    Every walk acts in its own U-frame, where each A-subspace is
    ``span{|x, 0>}``, so a state accepted by one projection is a valid input
    to the next.  The run starts from the coherent stationary state of
    ``chains[0]``.
    """
    chains = list(chains)
    if not chains or not all(isinstance(c, MarkovChain) for c in chains):
        raise ValidationError("need a nonempty list of chains")
    if len({c.dim for c in chains}) != 1:
        raise ValidationError("all chains must share a state space")
    walks = [build_szegedy_walk(c) for c in chains]
    roots = [np.sqrt(w.pi) for w in walks]
    for i in range(len(roots) - 1):
        if float(roots[i] @ roots[i + 1]) ** 2 < 1e-12:
            warnings.warn(
                f"stationary states {i} and {i + 1} are orthogonal; annealing cannot succeed",
                RuntimeWarning,
                stacklevel=2,
            )
    rng = np.random.default_rng(rng_seed)
    start = walks[0].stationary_state().astype(complex)
    restarts = 0
    while True:
        psi = start
        ok = True
        for w in walks:
            branches = phase_estimate_branches(w.W, psi, qpe_bits)
            probs = np.sum(np.abs(branches) ** 2, axis=1)
            probs /= probs.sum()
            k = int(rng.choice(probs.size, p=probs))
            if k != 0:
                ok = False
                break
            psi = branches[0] / math.sqrt(probs[0])
        if ok:
            return ZenoResult(psi, True, restarts)
        if restarts >= max_restarts:
            return ZenoResult(None, False, restarts)
        restarts += 1
