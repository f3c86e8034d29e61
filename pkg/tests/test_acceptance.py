"""Acceptance criteria 1-9, each at its stated tolerance.

Every test prints one ``criterion N: PASS|FAIL`` line, collected again in
the terminal summary.
"""

import math
import time

import numpy as np
import pytest

from qwalk.amplitude import SearchInstance, grover_trajectory, optimal_iterations
from qwalk.bench import fit_exponent, format_csv, load_config, run_bench, synthetic_points, tts
from qwalk.cli import bundled_config_path
from qwalk.landscape import bundled_landscape, bundled_landscape_names
from qwalk.linalg import is_unitary
from qwalk.markov import (
    AnnealingSchedule,
    build_metropolis_chain,
    check_detailed_balance,
    eigenvalue_gap,
    gibbs_distribution,
    random_reversible_chain,
    schedule_beta,
    stationary_distribution,
)
from qwalk.qmetropolis import build_coin_walk, evolve_schedule, sample_evolution
from qwalk.qpe import ancilla_bits_for, failure_probability, nearest_outcome_mass, phase_estimate
from qwalk.szegedy import build_szegedy_walk, plane_rotations, qff_tau, quantum_fast_forward

def test_criterion_1_grover_closed_form(acceptance_report):
    rng = np.random.default_rng(1)
    start = time.perf_counter()
    worst = 0.0
    for n in (2, 4, 6, 8, 10):
        N = 1 << n
        for M in sorted({1, 2, N // 4}):
            marked = rng.choice(N, size=M, replace=False)
            inst = SearchInstance(n, marked)
            t_max = 3 * optimal_iterations(N, M)
            t = np.arange(t_max + 1)
            p = grover_trajectory(inst, t_max)
            worst = max(worst, float(np.max(np.abs(p - np.sin((2 * t + 1) * inst.theta) ** 2))))
    elapsed = time.perf_counter() - start
    ok = worst <= 1e-9 and elapsed < 5.0
    acceptance_report(1, ok, f"max |p - sin^2| = {worst:.2e} (tol 1e-9), {elapsed:.2f}s (< 5s)")
    assert ok


def _ab_eigenpairs(walk):
    """Eigenpairs of W restricted to span(A, M A) in the U-frame."""
    basis = np.hstack([walk.E, walk.M @ walk.E])
    u, s, _ = np.linalg.svd(basis, full_matrices=False)
    q = u[:, s > 1e-9 * s[0]]
    restricted = q.T @ walk.W @ q
    assert np.allclose(q @ restricted, walk.W @ q, atol=1e-10)  # invariant subspace
    mu, vecs = np.linalg.eig(restricted)
    return mu, q @ vecs


def test_criterion_2_szegedy_spectral_correspondence(acceptance_report):
    rng = np.random.default_rng(2024)
    start = time.perf_counter()
    worst_plane, worst_dense, worst_margin = 0.0, 0.0, math.inf
    for _ in range(50):
        chain = random_reversible_chain(int(rng.integers(2, 17)), rng)
        walk = build_szegedy_walk(chain)
        lam = np.linalg.eigvalsh(walk.D)
        # structured check: half the plane rotation angle
        for l, angle in plane_rotations(walk):
            j = int(np.argmin(np.abs(lam - l)))
            worst_plane = max(worst_plane, abs(math.cos(angle / 2) - lam[j]))
        # dense check: each eigenpair (e^{i theta}, psi) of W on A+B.  phi is
        # theta / 2 mod pi; lambda is read from the A-component of psi.
        mu, vecs = _ab_eigenpairs(walk)
        n_unit = int(np.sum(np.abs(np.abs(lam) - 1) < 1e-9))
        assert mu.size == 2 * lam.size - n_unit
        for m, v in zip(mu, vecs.T):
            a = walk.E.T @ v
            lam_v = float(np.real(np.vdot(a, walk.D @ a) / np.vdot(a, a)))
            half = np.angle(m) / 2
            err = min(abs(math.cos(half) - lam_v), abs(math.cos(half + math.pi) - lam_v))
            err = max(err, float(np.min(np.abs(lam - lam_v))))
            worst_dense = max(worst_dense, err)
        # phase gap from the dense spectrum: smallest |theta| away from the fixed point
        gap = float(np.sort(np.abs(np.angle(mu)))[1])
        worst_margin = min(worst_margin, gap - 2 * math.sqrt(eigenvalue_gap(chain)))
    elapsed = time.perf_counter() - start
    ok = worst_plane <= 1e-8 and worst_dense <= 1e-8 and worst_margin >= 0 and elapsed < 30
    acceptance_report(
        2,
        ok,
        f"max |cos phi - lambda| = {worst_plane:.2e} (planes), {worst_dense:.2e} (dense eig) "
        f"(tol 1e-8), min(Delta - 2 sqrt delta) = {worst_margin:.3f}, {elapsed:.1f}s (< 30s)",
    )
    assert ok


def test_criterion_3_qff_accuracy(acceptance_report):
    rng = np.random.default_rng(3)
    start = time.perf_counter()
    worst_ratio = 0.0
    for _ in range(10):
        chain = random_reversible_chain(int(rng.integers(2, 9)), rng)
        walk = build_szegedy_walk(chain)
        psi = rng.normal(size=chain.dim) + 1j * rng.normal(size=chain.dim)
        psi /= np.linalg.norm(psi)
        for t in (4, 16, 64):
            exact = np.linalg.matrix_power(walk.D, t) @ psi
            for eps in (1e-2, 1e-3):
                tau = math.ceil(math.sqrt(2 * t * math.log(2 / eps)))
                assert qff_tau(t, eps) == min(tau, t)
                out, success = quantum_fast_forward(walk, psi, t, eps)
                approx = np.zeros_like(psi) if out is None else out * math.sqrt(success)
                worst_ratio = max(worst_ratio, float(np.linalg.norm(approx - exact)) / eps)
    elapsed = time.perf_counter() - start
    ok = worst_ratio <= 1.0 and elapsed < 60
    acceptance_report(3, ok, f"max error / eps = {worst_ratio:.2e} (<= 1), {elapsed:.1f}s (< 60s)")
    assert ok


def test_criterion_4_metropolis_correctness(acceptance_report):
    worst_db, worst_gibbs, failed = 0.0, 0.0, []
    for name in bundled_landscape_names():
        land = bundled_landscape(name)
        for beta in (0.0, 1.0, 50.0, 1000.0):
            chain = build_metropolis_chain(land, beta)
            # the beta = 0 move graph is bipartite, hence periodic
            pi = stationary_distribution(chain, require_aperiodic=beta > 0)
            if not check_detailed_balance(chain, pi, 1e-12):
                failed.append(f"{name}@{beta} detailed balance")
            flux = pi[:, None] * chain.P
            worst_db = max(worst_db, float(np.max(np.abs(flux - flux.T))))
            err = float(np.max(np.abs(pi - gibbs_distribution(land, beta))))
            worst_gibbs = max(worst_gibbs, err)
            if err > 1e-10:
                failed.append(f"{name}@{beta} Gibbs")
    ok = not failed
    acceptance_report(
        4,
        ok,
        f"max flux asymmetry {worst_db:.2e} (tol 1e-12), max |pi - Gibbs| {worst_gibbs:.2e} "
        f"(tol 1e-10), 16 chains" + (f"; failed {failed}" if failed else ""),
    )
    assert ok


def test_criterion_5_quantum_metropolis_consistency(acceptance_report):
    land = bundled_landscape("toy_2x2")
    sched = AnnealingSchedule("fixed", 1000.0, dimension_n=land.num_coords)
    T, shots = 64, 100_000
    worst_unitary = 0.0
    for t in (1, T):
        m = build_coin_walk(land, schedule_beta(sched, t)).matrix()
        worst_unitary = max(
            worst_unitary, float(np.max(np.abs(m.conj().T @ m - np.eye(m.shape[0]))))
        )
    exact = evolve_schedule(land, sched, T).p
    est = sample_evolution(land, sched, T, shots, seed=0)
    sigma = np.sqrt(exact * (1 - exact) / shots)
    z = np.abs(est - exact) / np.where(sigma > 0, sigma, np.inf)
    exact_match = np.all((sigma > 0) | (est == exact))
    ok = worst_unitary <= 1e-10 and bool(np.all(z <= 3)) and bool(exact_match)
    acceptance_report(
        5,
        ok,
        f"unitarity defect {worst_unitary:.2e} (tol 1e-10), max |z| = {float(np.max(z)):.2f} "
        f"over t = 1..{T} (<= 3), {shots} shots",
    )
    assert ok


def test_criterion_6_tts_identities(acceptance_report):
    worst_delta_case = 0
    for delta in (0.1, 0.5, 0.9, 0.99):
        for t in range(0, 129):
            if tts(t, delta, delta) != t:
                worst_delta_case += 1
    # dyadic delta: p = 1 - (1 - delta)^k is exact in binary floating point
    worst = 0.0
    for delta in (0.5, 0.75, 0.875):
        for k in (2, 4, 8):
            p = 1 - (1 - delta) ** k
            for t in (1, 7, 64, 1000):
                worst = max(worst, abs(tts(t, p, delta) - t / k))
    # informational: at the default delta = 0.9 the rounding of p dominates
    info = max(abs(tts(64, 1 - 0.1**k, 0.9) - 64 / k) for k in (2, 4, 8))
    ok = worst_delta_case == 0 and worst <= 1e-12
    acceptance_report(
        6,
        ok,
        f"tts(t, d, d) != t in {worst_delta_case} cases, max |TTS - t/k| = {worst:.2e} "
        f"(tol 1e-12; delta = 0.9 gives {info:.1e} from rounding p)",
    )
    assert ok


def test_criterion_7_exponent_pipeline(acceptance_report):
    start = time.perf_counter()
    rates = {}
    for exponent in (0.5, 0.75, 1.0):
        hits = 0
        for trial in range(100):
            pts = synthetic_points(exponent, np.random.default_rng(trial), n=20, noise=0.1)
            fit = fit_exponent(pts, n_bootstrap=1000, seed=trial)
            hits += abs(fit.exponent - exponent) <= 2 * fit.stderr
        rates[exponent] = hits / 100
    elapsed = time.perf_counter() - start
    ok = all(r >= 0.95 for r in rates.values()) and elapsed < 60
    acceptance_report(
        7,
        ok,
        "coverage " + ", ".join(f"{b}: {r:.2f}" for b, r in rates.items())
        + f" (>= 0.95), {elapsed:.1f}s (< 60s)",
    )
    assert ok


def test_criterion_8_qpe(acceptance_report):
    def gate(phase):
        return np.diag([1.0, np.exp(2j * math.pi * phase)])

    eig1 = np.array([0.0, 1.0])
    dyadic_err = 0.0
    for m in range(1, 9):
        for k in range(1 << m):
            est = phase_estimate(gate(k / (1 << m)), eig1, m)
            dyadic_err = max(dyadic_err, 1.0 - float(est.distribution[k]))
    grid = np.arange(100) / 100
    worst_mass = 1.0
    for m in range(1, 9):
        for phase in grid:
            est = phase_estimate(gate(phase), eig1, m)
            worst_mass = min(worst_mass, nearest_outcome_mass(est, phase))
    worst_excess = -math.inf
    for t in range(1, 5):
        for p_f in (0.05, 0.1, 0.25, 0.5):
            m = ancilla_bits_for(t, p_f)
            for phase in grid:
                est = phase_estimate(gate(phase), eig1, m)
                worst_excess = max(worst_excess, failure_probability(est, phase, t) - p_f)
    ok = dyadic_err <= 1e-12 and worst_mass >= 0.405 - 1e-6 and worst_excess <= 0
    acceptance_report(
        8,
        ok,
        f"dyadic defect {dyadic_err:.1e}, min nearest mass {worst_mass:.4f} (>= 0.405), "
        f"max(failure - p_f) = {worst_excess:.3f} (<= 0)",
    )
    assert ok


def test_criterion_9_determinism_and_reference_table(acceptance_report):
    config = load_config(bundled_config_path())
    first = format_csv(run_bench(config)[0]).encode()
    second = format_csv(run_bench(config)[0]).encode()
    ok = first == second and len(first) > 0
    acceptance_report(
        9,
        ok,
        f"bundled config run twice: {'byte-identical' if first == second else 'DIFFERENT'} "
        f"({len(first)} bytes); reference exponents (e.g. fixed-beta random-init 0.70 +- 0.08) "
        "need quantum-chemistry energies and are not reproduced at desk scale",
    )
    assert ok
