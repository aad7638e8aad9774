import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from oracles import (
    commutator_direct,
    haar_unitary,
    hs_state,
    qubit_a_classical_correlations_grid,
    werner_discord,
)
from qdiscord.discord import (
    OptimizerConfig,
    ProjectiveMeasurement,
    classical_correlations,
    commutator_criterion,
    commutator_norms,
    conditional_entropy,
    discord,
    in_c0,
    make_zero_discord,
    omega0_residual,
)
from qdiscord.exceptions import InvalidParameterError
from qdiscord.states import (
    DensityMatrix,
    bell_state,
    maximally_mixed,
    partial_trace,
    swap_subsystems,
    tensor_product,
    von_neumann_entropy,
)

FAST = OptimizerConfig(restarts=6)


def werner(p):
    return DensityMatrix(2, 2, p * bell_state(0).matrix + (1 - p) * np.eye(4) / 4)


def zero_discord_state(da, db, rng):
    u = haar_unitary(da, rng)
    p = rng.dirichlet(np.ones(da))
    return make_zero_discord(p, u, [hs_state(db, rng) for _ in range(da)]), u


def test_projective_measurement_invariants(rng):
    m = ProjectiveMeasurement(haar_unitary(3, rng))
    P = m.projectors
    for j in range(3):
        np.testing.assert_allclose(P[j] @ P[j], P[j], atol=1e-12)
        assert np.trace(P[j]).real == pytest.approx(1.0)
        for k in range(j):
            np.testing.assert_allclose(P[j] @ P[k], 0, atol=1e-12)
    np.testing.assert_allclose(P.sum(axis=0), np.eye(3), atol=1e-12)
    back = ProjectiveMeasurement.from_projectors(P)
    np.testing.assert_allclose(back.projectors, P, atol=1e-12)


def test_projective_measurement_rejects_non_unitary():
    with pytest.raises(InvalidParameterError):
        ProjectiveMeasurement(np.array([[1, 1], [0, 1]]))


def test_conditional_entropy_examples(rng):
    rho_b = hs_state(3, rng)
    prod = tensor_product(hs_state(2, rng), rho_b)
    m = ProjectiveMeasurement(haar_unitary(2, rng))
    assert conditional_entropy(prod, m) == pytest.approx(von_neumann_entropy(rho_b), abs=1e-12)
    z = ProjectiveMeasurement.computational(2)
    assert conditional_entropy(bell_state(0), z) == pytest.approx(0.0, abs=1e-12)
    # Werner p = 1/2 measured in z: each outcome leaves B in diag(3/4, 1/4)
    q = np.array([0.75, 0.25])
    assert conditional_entropy(werner(0.5), z) == pytest.approx(-np.sum(q * np.log2(q)), abs=1e-12)


def test_conditional_entropy_dimension_check():
    with pytest.raises(InvalidParameterError):
        conditional_entropy(bell_state(0), ProjectiveMeasurement.computational(3))


def test_zero_probability_outcomes_are_skipped():
    rho = tensor_product(np.diag([1.0, 0.0]), np.eye(2) / 2)
    assert conditional_entropy(rho, ProjectiveMeasurement.computational(2)) == pytest.approx(1.0)


def test_bell_discord():
    res = discord(bell_state(0))
    assert res.mutual_information == pytest.approx(2.0, abs=1e-12)
    assert res.classical_correlations == pytest.approx(1.0, abs=1e-6)
    assert res.discord == pytest.approx(1.0, abs=1e-6)
    assert res.converged
    assert res.optimizer_restarts_used == 20


def test_product_state_discord(rng):
    rho = tensor_product(hs_state(2, rng), hs_state(2, rng))
    res = discord(rho, FAST)
    assert res.discord <= 1e-9
    assert res.classical_correlations <= 1e-9


def test_werner_discord_matches_closed_form():
    for p in (0.2, 0.5, 0.9):
        res = discord(werner(p), FAST)
        assert res.discord == pytest.approx(werner_discord(p), abs=1e-6)
    assert discord(werner(0.5), FAST).discord > 0.2


def test_werner_classical_correlations_against_grid():
    rho = werner(0.5)
    j = classical_correlations(rho).value
    assert abs(j - qubit_a_classical_correlations_grid(rho.matrix, 2)) <= 1e-4


def test_multistart_matches_grid_on_random_states(rng):
    for _ in range(8):
        m = hs_state(4, rng)
        j = classical_correlations(DensityMatrix(2, 2, m)).value
        grid = qubit_a_classical_correlations_grid(m, 2)
        assert grid - 1e-9 <= j <= grid + 1e-4


def test_qubit_a_qutrit_b_against_grid(rng):
    m = hs_state(6, rng)
    j = classical_correlations(DensityMatrix(2, 3, m)).value
    assert abs(j - qubit_a_classical_correlations_grid(m, 3)) <= 1e-4


def test_result_invariants(rng):
    for dims in [(2, 2), (3, 2)]:
        rho = DensityMatrix(*dims, hs_state(dims[0] * dims[1], rng))
        res = discord(rho, FAST)
        assert res.discord == pytest.approx(res.mutual_information - res.classical_correlations, abs=1e-12)
        assert res.discord >= 0 and res.classical_correlations >= 0
        bound = min(von_neumann_entropy(partial_trace(rho, "A")), von_neumann_entropy(partial_trace(rho, "B")))
        assert res.classical_correlations <= bound + 1e-9
        u = res.optimal_measurement.basis
        np.testing.assert_allclose(u.conj().T @ u, np.eye(dims[0]), atol=1e-10)


def test_result_serializes(rng):
    import json
    res = discord(bell_state(1), FAST)
    data = json.loads(json.dumps(res.to_dict()))
    assert set(data) == {
        "mutual_information", "classical_correlations", "discord",
        "optimal_measurement", "optimizer_restarts_used", "converged",
    }


def test_discord_is_asymmetric():
    # classical on A, quantum on B: |0><0| x |0><0| + |1><1| x |+><+|
    plus = np.full((2, 2), 0.5)
    m = 0.5 * (np.kron(np.diag([1.0, 0.0]), np.diag([1.0, 0.0])) + np.kron(np.diag([0.0, 1.0]), plus))
    rho = DensityMatrix(2, 2, m)
    assert discord(rho, FAST).discord <= 1e-9
    assert discord(swap_subsystems(rho), FAST).discord > 1e-2


def test_deterministic_given_seed(rng):
    rho = DensityMatrix(2, 2, hs_state(4, rng))
    a = discord(rho, OptimizerConfig(restarts=4, seed=3))
    b = discord(rho, OptimizerConfig(restarts=4, seed=3))
    assert a.classical_correlations == b.classical_correlations
    np.testing.assert_array_equal(a.optimal_measurement.basis, b.optimal_measurement.basis)


def test_optimizer_config_validation():
    with pytest.raises(InvalidParameterError):
        OptimizerConfig(restarts=0)
    with pytest.raises(InvalidParameterError):
        OptimizerConfig(tol=0)


def test_commutator_matches_direct(rng):
    for dims in [(2, 2), (2, 3), (3, 3)]:
        m = hs_state(dims[0] * dims[1], rng)
        expected = np.linalg.norm(commutator_direct(m, dims))
        assert commutator_criterion(DensityMatrix(*dims, m)) == pytest.approx(expected, rel=1e-10)


def test_commutator_norms_batched(rng):
    ms = np.stack([hs_state(6, rng) for _ in range(5)])
    batched = commutator_norms(ms, (2, 3))
    single = [commutator_criterion(DensityMatrix(2, 3, m)) for m in ms]
    np.testing.assert_allclose(batched, single, rtol=1e-12)


def test_c0_examples(rng):
    assert in_c0(maximally_mixed(2, 3))
    for k in range(4):
        assert commutator_criterion(bell_state(k)) == 0.0
        assert in_c0(bell_state(k))
    rho = DensityMatrix(2, 2, hs_state(4, rng))
    assert commutator_criterion(rho) > 1e-3
    assert not in_c0(rho)


def test_bell_is_in_c0_but_has_discord():
    rho = bell_state(0)
    assert commutator_criterion(rho) == 0.0
    assert discord(rho, FAST).discord >= 0.99
    assert omega0_residual(rho).residual > 0.1


def test_zero_discord_constructions(rng):
    for da, db in [(2, 2), (2, 3), (3, 2), (3, 3)]:
        rho, u = zero_discord_state(da, db, rng)
        assert commutator_criterion(rho) <= 1e-12
        res = omega0_residual(rho)
        assert res.residual <= 1e-10 and res.member()
        overlap = np.abs(res.basis.basis.conj().T @ u) ** 2
        np.testing.assert_allclose(np.sort(overlap, axis=1)[:, -1], 1.0, atol=1e-8)
        assert discord(rho, FAST).discord <= 1e-6


def test_make_zero_discord_examples(rng):
    sigma = hs_state(3, rng)
    rho = make_zero_discord([1.0, 0.0], np.eye(2), [sigma, np.eye(3) / 3])
    np.testing.assert_allclose(rho.matrix, np.kron(np.diag([1.0, 0.0]), sigma), atol=1e-15)
    rho = make_zero_discord(np.full(3, 1 / 3), haar_unitary(3, rng), [np.eye(2) / 2] * 3)
    np.testing.assert_allclose(rho.matrix, np.eye(6) / 6, atol=1e-14)


def test_make_zero_discord_validation():
    with pytest.raises(InvalidParameterError):
        make_zero_discord([0.7, 0.7], np.eye(2), [np.eye(2) / 2] * 2)
    with pytest.raises(InvalidParameterError):
        make_zero_discord([1.2, -0.2], np.eye(2), [np.eye(2) / 2] * 2)
    with pytest.raises(InvalidParameterError):
        make_zero_discord([0.5, 0.5], np.eye(2), [np.eye(2) / 2])


def test_omega0_maximally_mixed_and_degenerate(rng):
    assert omega0_residual(maximally_mixed(2, 2)).residual == pytest.approx(0.0, abs=1e-15)
    # rho_A degenerate (uniform weights) but block diagonal in a hidden random basis
    u = haar_unitary(2, rng)
    rho = make_zero_discord([0.5, 0.5], u, [hs_state(2, rng), hs_state(2, rng)])
    res = omega0_residual(rho, OptimizerConfig(restarts=8))
    assert res.residual <= 1e-6


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1), st.sampled_from([(2, 2), (2, 3), (3, 2), (3, 3)]))
def test_omega0_implies_c0(seed, dims):
    rho, _ = zero_discord_state(*dims, np.random.default_rng(seed))
    assert omega0_residual(rho).residual <= 1e-10
    assert commutator_criterion(rho) <= 1e-8


@settings(max_examples=10, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_discord_nonnegative(seed):
    rho = DensityMatrix(2, 2, hs_state(4, np.random.default_rng(seed)))
    assert discord(rho, OptimizerConfig(restarts=3)).discord >= 0
