"""End-to-end acceptance checks, one test per criterion.

Each test records a one-line PASS/FAIL verdict that is printed in the pytest
terminal summary, then asserts.
"""
import time

import numpy as np
import pytest

from conftest import record_criterion
from oracles import commutator_direct, haar_unitary, hs_state, qubit_a_classical_correlations_grid
from qdiscord.bloch import c0_residuals, commutator_operator, to_bloch
from qdiscord.channels import (
    CHANNEL_KINDS,
    evolve,
    evolve_spectral,
    make_channel,
    replacement_channel,
    run_trajectory,
    spectral_decompose,
    steady_state,
)
from qdiscord.discord import classical_correlations, commutator_criterion, discord, make_zero_discord
from qdiscord.experiments import ExperimentConfig, run_measure_zero, run_perturbation, run_trajectory_study
from qdiscord.rng import SeededSampler
from qdiscord.sampling import random_mixed_state, random_zero_discord
from qdiscord.states import DensityMatrix, bell_state, tensor_product

SEED = 42


def _measure_zero_config(dims, workers=1):
    return ExperimentConfig("measure_zero", dims=dims, trials=10_000, seed=SEED,
                            thresholds={"c0_tol": 1e-8}, workers=workers)


@pytest.fixture(scope="module")
def measure_zero_runs():
    out = {}
    for dims in [(2, 2), (2, 3)]:
        start = time.perf_counter()
        rep = run_measure_zero(_measure_zero_config(dims))
        out[dims] = (rep, time.perf_counter() - start)
    return out


def test_criterion_1_measure_zero(measure_zero_runs):
    fractions = {d: r.aggregates["fraction_in_c0"] for d, (r, _) in measure_zero_runs.items()}
    mins = {d: r.aggregates["commutator_norm"]["min"] for d, (r, _) in measure_zero_runs.items()}
    runtime = sum(t for _, t in measure_zero_runs.values())
    ok = all(f == 0.0 for f in fractions.values()) and all(m > 1e-6 for m in mins.values()) and runtime <= 60
    detail = ", ".join(f"{d}: fraction={fractions[d]} min_norm={mins[d]:.3e}" for d in fractions)
    record_criterion(1, "measure-zero witness", ok, f"{detail}, runtime={runtime:.1f}s")
    assert ok


def test_criterion_2_nowhere_dense():
    start = time.perf_counter()
    cfg = ExperimentConfig("perturbation", dims=(2, 2), trials=1000, seed=SEED, etas=(1e-3, 1e-6),
                           thresholds={"crossing_tol": 1e-10})
    rep = run_perturbation(cfg)
    runtime = time.perf_counter() - start
    esc = {row["eta"]: row["escape_fraction"] for row in rep.aggregates["per_eta"]}
    ok = esc[1e-3] == 1.0 and esc[1e-6] == 1.0 and runtime <= 60
    record_criterion(2, "nowhere-dense witness", ok,
                     f"escape fraction eta=1e-3: {esc[1e-3]}, eta=1e-6: {esc[1e-6]}, runtime={runtime:.1f}s")
    assert ok


def test_criterion_3_commutator_soundness():
    rng = SeededSampler(SEED, 3).generator()
    worst_norm, worst_d = 0.0, 0.0
    for k in range(500):
        rho = random_zero_discord(*[(2, 2), (2, 3)][k % 2], rng)
        worst_norm = max(worst_norm, commutator_criterion(rho))
        worst_d = max(worst_d, discord(rho).discord)
    bell_norm = commutator_criterion(bell_state(0))
    bell_d = discord(bell_state(0)).discord
    ok = worst_norm <= 1e-10 and worst_d <= 1e-6 and bell_norm <= 1e-12 and abs(bell_d - 1) <= 1e-4
    record_criterion(3, "commutator criterion soundness", ok,
                     f"500 constructed: max norm={worst_norm:.2e} max D={worst_d:.2e}; "
                     f"Bell norm={bell_norm:.2e} D={bell_d:.8f}")
    assert ok


def test_criterion_4_optimizer_vs_grid():
    rng = SeededSampler(SEED, 4).generator()
    gaps = []
    for _ in range(50):
        m = hs_state(4, rng)
        j = classical_correlations(DensityMatrix(2, 2, m)).value
        gaps.append(abs(j - qubit_a_classical_correlations_grid(m, 2)))
    bell_d = discord(bell_state(0)).discord
    product_d = max(
        discord(tensor_product(hs_state(2, rng), hs_state(2, rng))).discord for _ in range(10)
    )
    ok = max(gaps) <= 1e-4 and abs(bell_d - 1) <= 1e-6 and product_d <= 1e-9
    record_criterion(4, "discord optimizer correctness", ok,
                     f"max |J - J_grid|={max(gaps):.2e} over 50 states; Bell D={bell_d:.9f}; "
                     f"max product D={product_d:.1e}")
    assert ok


def _c0_member(dims, rng):
    da, db = dims
    if da <= db and rng.random() < 0.5:
        # mixture of maximally entangled states: rho_A = 1/da, in C0 but outside the zero-discord set
        m = np.zeros((da * db, da * db), dtype=complex)
        for w in rng.dirichlet(np.ones(3)):
            psi = np.zeros((da, db), dtype=complex)
            psi[:, :da] = np.eye(da) / np.sqrt(da)
            psi = (haar_unitary(da, rng) @ psi @ haar_unitary(db, rng).T).ravel()
            m += w * np.outer(psi, psi.conj())
        return m
    p = rng.dirichlet(np.ones(da))
    return make_zero_discord(p, haar_unitary(da, rng), [hs_state(db, rng) for _ in range(da)]).matrix


def test_criterion_5_structure_constant_path():
    rng = SeededSampler(SEED, 5).generator()
    worst = 0.0
    mismatches = 0
    cases = 0
    for dims in [(2, 2), (2, 3), (3, 2), (3, 3)]:
        d = dims[0] * dims[1]
        for _ in range(100):
            m = hs_state(d, rng)
            op = commutator_operator(to_bloch(DensityMatrix(*dims, m)))
            worst = max(worst, float(np.max(np.abs(op - commutator_direct(m, dims)))))
        for k in range(50):
            m = _c0_member(dims, rng) if k % 2 else hs_state(d, rng)
            residual_zero = np.max(np.abs(c0_residuals(to_bloch(DensityMatrix(*dims, m))))) <= 1e-10
            norm_zero = commutator_criterion(DensityMatrix(*dims, m)) <= 1e-10
            mismatches += residual_zero != norm_zero or residual_zero != bool(k % 2)
            cases += 1
    ok = worst <= 1e-10 and mismatches == 0
    record_criterion(5, "structure-constant equivalence", ok,
                     f"max elementwise deviation={worst:.2e} (400 states); "
                     f"equivalence mismatches={mismatches}/{cases}")
    assert ok


def test_criterion_6_crossing_bound():
    start = time.perf_counter()
    results = {}
    for kind, strength in [("global_depolarizing", 1e-4), ("local_dephasing", 1e-4)]:
        ch = make_channel(kind, strength, (2, 2))
        cfg = ExperimentConfig("trajectory", dims=(2, 2), trials=100, seed=SEED, steps=10_000,
                               channel=ch.to_descriptor())
        rep = run_trajectory_study(cfg)
        counts = [len(r["crossings"]) for r in rep.records]
        results[kind] = (max(counts), rep.aggregates["violations"], rep.aggregates["crossing_bound"])
    runtime = time.perf_counter() - start
    ok = (results["global_depolarizing"][0] == 0
          and results["local_dephasing"][0] <= 2
          and all(v == 0 for _, v, _ in results.values())
          and runtime <= 300)
    detail = "; ".join(f"{k}: max crossings={c} bound={b} violations={v}" for k, (c, v, b) in results.items())
    record_criterion(6, "crossing bound", ok, f"{detail}; runtime={runtime:.1f}s")
    assert ok


def test_criterion_7_spectral_machinery():
    rng = SeededSampler(SEED, 7).generator()
    worst_bio = worst_unit = worst_evolve = 0.0
    for dims in [(2, 2), (2, 3)]:
        for kind in CHANNEL_KINDS:
            ch = make_channel(kind, 0.3, dims)
            sd = spectral_decompose(ch)
            gram = np.einsum("iab,jab->ij", sd.left_ops.conj(), sd.right_ops)
            worst_bio = max(worst_bio, float(np.max(np.abs(gram - np.eye(len(gram))))))
            worst_unit = max(worst_unit, abs(float(np.max(np.abs(sd.eigenvalues))) - 1))
            rho = random_mixed_state(ch.dim, random_state=rng, dims=dims)
            for n in (1, 2, 5, 10, 50):
                diff = np.max(np.abs(evolve(ch, rho, n).matrix - evolve_spectral(sd, rho, n).matrix))
                worst_evolve = max(worst_evolve, float(diff))
    ok = worst_bio <= 1e-8 and worst_unit <= 1e-10 and worst_evolve <= 1e-8
    record_criterion(7, "spectral machinery", ok,
                     f"biorthogonality={worst_bio:.1e}, | max|lambda| - 1 |={worst_unit:.1e}, "
                     f"evolve vs spectral={worst_evolve:.1e}")
    assert ok


def test_criterion_8_steady_state_condition():
    rng = SeededSampler(SEED, 8).generator()
    n_max = 1000
    ch = make_channel("global_depolarizing", 0.01, (2, 2))
    fixed = steady_state(spectral_decompose(ch))
    monotone = positive = True
    for _ in range(20):
        traj = run_trajectory(ch, random_mixed_state(4, random_state=rng, dims=(2, 2)), n_max)
        tail = traj.commutator_norms[n_max // 10:]
        monotone &= bool(np.all(np.diff(tail) < 0))
        positive &= bool(np.all(traj.commutator_norms > 0))
    fixed_in_c0 = commutator_criterion(fixed) <= 1e-10

    target = random_mixed_state(4, random_state=rng, dims=(2, 2))
    target_norm = commutator_criterion(target)
    rep = replacement_channel(target, 0.05)
    late_min = min(
        float(run_trajectory(rep, random_mixed_state(4, random_state=rng, dims=(2, 2)), n_max)
              .commutator_norms[n_max // 2:].min())
        for _ in range(20)
    )
    bounded = late_min >= 0.5 * target_norm > 1e-3
    ok = fixed_in_c0 and monotone and positive and bounded
    record_criterion(8, "steady-state condition", ok,
                     f"depolarizing: steady state in C0={fixed_in_c0}, monotone final decade={monotone}, "
                     f"never zero={positive}; outside-C0 target (norm {target_norm:.3e}): "
                     f"late min norm={late_min:.3e}")
    assert ok


def test_criterion_9_determinism(measure_zero_runs):
    serial = measure_zero_runs[(2, 2)][0].to_json(timing=False)
    again = run_measure_zero(_measure_zero_config((2, 2))).to_json(timing=False)
    parallel = run_measure_zero(_measure_zero_config((2, 2), workers=8)).to_json(timing=False)
    ok = serial == again == parallel
    record_criterion(9, "determinism", ok,
                     f"repeat identical={serial == again}, workers 1 vs 8 identical={serial == parallel}, "
                     f"{len(serial)} bytes")
    assert ok
