from dataclasses import replace

import numpy as np
import pytest
import scipy.linalg
import scipy.sparse as sp

from fanoring.liouville import (
    build_hamiltonian,
    build_liouvillian,
    clamp_negative_eigenvalues,
    check_truncation,
    expectation,
    ladder_operators,
    nonlinear_polarizability,
    nonlinear_spectrum,
    qd_population,
    solve_point,
    solve_sweep,
    steady_state,
)
from fanoring.materials import derive_mnp
from fanoring.metamolecule import analytic_polarizability, assemble_metamolecule, dip_depth
from fanoring.models import (
    DegenerateSteadyStateError,
    DriveSpec,
    HilbertConfig,
    MaterialParams,
    Orientation,
    QDParams,
    SolverError,
)

MAT = MaterialParams()
OMEGA_0 = derive_mnp(MAT, 16e-9).omega_0
OMEGA_X = OMEGA_0 - 0.195e15


def metamolecule(e0_mu_mev=1e-4, omega_x=OMEGA_X):
    return assemble_metamolecule(
        MAT,
        16e-9,
        QDParams(omega_x=omega_x),
        32e-9,
        Orientation.PERPENDICULAR,
        DriveSpec(e0_mu_mev=e0_mu_mev),
    )


def assert_physical(rho):
    np.testing.assert_allclose(rho, rho.conj().T, atol=1e-12)
    assert np.trace(rho) == pytest.approx(1.0, abs=1e-10)
    assert np.linalg.eigvalsh(rho)[0] > -1e-8


# Operators

def test_ladder_operators_act_on_the_joint_space():
    cfg = HilbertConfig(fock_dim=3)

    a, sigma = ladder_operators(cfg)

    assert a.shape == sigma.shape == (6, 6)
    np.testing.assert_allclose((a @ sigma - sigma @ a).toarray(), 0.0)
    np.testing.assert_allclose((sigma @ sigma.conj().T + sigma.conj().T @ sigma).toarray(), np.eye(6))


def test_coupling_hamiltonian_matches_a_hand_built_matrix():
    p = replace(metamolecule(e0_mu_mev=0.0), g=3e12)
    omega = OMEGA_X + 1e11
    delta_0, delta_x = OMEGA_0 - omega, OMEGA_X - omega
    expected = np.diag([0.0, delta_x, delta_0, delta_0 + delta_x]).astype(complex)
    expected[2, 1] = 3e12j
    expected[1, 2] = -3e12j

    H = build_hamiltonian(p, omega, HilbertConfig(fock_dim=2))

    np.testing.assert_allclose(H.toarray(), expected, rtol=1e-12, atol=1e-3)


def test_hamiltonian_is_hermitian_under_drive():
    H = build_hamiltonian(metamolecule(e0_mu_mev=0.2), OMEGA_X, HilbertConfig(fock_dim=6)).toarray()

    np.testing.assert_allclose(H, H.conj().T, rtol=1e-12)


def test_complex_coupling_is_rejected_as_non_hermitian():
    p = replace(metamolecule(), g=1e12 + 1e12j)

    with pytest.raises(SolverError, match="not Hermitian"):
        build_hamiltonian(p, OMEGA_X, HilbertConfig(fock_dim=3))


def test_liouvillian_rejects_mismatched_shapes_and_negative_rates():
    cfg = HilbertConfig(fock_dim=3)
    H = sp.csr_matrix((6, 6))

    with pytest.raises(ValueError, match="does not match"):
        build_liouvillian(sp.csr_matrix((4, 4)), (1.0, 1.0), cfg)
    with pytest.raises(ValueError, match="non-negative"):
        build_liouvillian(H, (-1.0, 1.0), cfg)


def test_qd_decay_alone_leaves_any_plasmon_state_with_a_ground_state_qd():
    cfg = HilbertConfig(fock_dim=3)
    L = build_liouvillian(sp.csr_matrix((6, 6)), (0.0, 8e10), cfg)
    rng = np.random.default_rng(5)
    root = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    plasmon = root @ root.conj().T
    plasmon /= np.trace(plasmon)

    rho = np.kron(plasmon, np.diag([1.0, 0.0]))

    np.testing.assert_allclose(L.apply(rho), 0.0, atol=1e-12 * 8e10)


# Steady state

def test_undriven_system_relaxes_to_the_ground_state():
    cfg = HilbertConfig(fock_dim=4)

    state = solve_point(metamolecule(e0_mu_mev=0.0), OMEGA_X, cfg)

    expected = np.zeros((8, 8))
    expected[0, 0] = 1.0
    np.testing.assert_allclose(state.rho, expected, atol=1e-10)
    assert state.method == "dense"


def test_closed_system_has_no_unique_steady_state():
    cfg = HilbertConfig(fock_dim=3)
    H = build_hamiltonian(replace(metamolecule(e0_mu_mev=0.0), g=0.0), OMEGA_X, cfg)

    with pytest.raises(DegenerateSteadyStateError):
        steady_state(build_liouvillian(H, (0.0, 0.0), cfg), method="dense")


def test_zero_generator_is_degenerate():
    cfg = HilbertConfig(fock_dim=2)
    L = build_liouvillian(sp.csr_matrix((4, 4)), (0.0, 0.0), cfg)

    with pytest.raises(DegenerateSteadyStateError, match="every state"):
        steady_state(L)


def test_sparse_and_dense_solvers_agree():
    p = metamolecule(e0_mu_mev=0.1)
    cfg = HilbertConfig(fock_dim=6)
    L = build_liouvillian(build_hamiltonian(p, OMEGA_X, cfg), (p.mnp.gamma_0, p.qd.gamma_x), cfg)

    dense = steady_state(L, method="dense")
    sparse = steady_state(L, method="sparse")

    np.testing.assert_allclose(sparse.rho, dense.rho, atol=1e-8)
    assert sparse.residuals[-1] == sparse.residual


def test_random_parameters_give_physical_states():
    rng = np.random.default_rng(17)
    cfg = HilbertConfig(fock_dim=4)
    base = metamolecule()
    for _ in range(100):
        p = replace(
            base,
            g=rng.uniform(-1e13, 1e13),
            drive=DriveSpec(e0_mu_mev=rng.uniform(1e-5, 0.2)),
        )
        omega = OMEGA_X + rng.uniform(-1e12, 1e12)

        state = solve_point(p, omega, cfg)

        assert_physical(state.rho)
        assert state.residual <= 1e-9


def test_rounding_level_negative_eigenvalues_are_clamped():
    rho = np.diag([1.0 + 3e-12, 0.5e-12, -3.5e-12]).astype(complex)

    clamped = clamp_negative_eigenvalues(rho)

    assert np.linalg.eigvalsh(clamped)[0] >= 0.0
    assert np.trace(clamped) == pytest.approx(1.0, abs=1e-15)
    np.testing.assert_allclose(clamped, np.diag([1.0, 0.0, 0.0]), atol=1e-11)


def test_weak_drive_reproduces_the_linear_polarizability():
    p = metamolecule()
    for omega in (OMEGA_X - 4e10, OMEGA_X, OMEGA_X + 1e11):
        assert nonlinear_polarizability(p, omega) == pytest.approx(
            analytic_polarizability(p, omega), rel=1e-2
        )


def test_fock_truncation_is_converged_at_the_strongest_drive():
    p = metamolecule(e0_mu_mev=0.2)

    assert check_truncation(p, OMEGA_X, HilbertConfig(fock_dim=15), extra=5) < 1e-6


def test_polarizability_needs_a_drive():
    with pytest.raises(ValueError, match="non-zero drive"):
        nonlinear_polarizability(metamolecule(e0_mu_mev=0.0), OMEGA_X)


# Observables

def test_qd_population_grows_with_drive_and_saturates_below_one_half():
    cfg = HilbertConfig(fock_dim=10)
    populations = [
        qd_population(solve_point(metamolecule(e0_mu_mev=drive), OMEGA_X, cfg), cfg)
        for drive in (1e-4, 0.02, 0.05, 0.1, 0.2)
    ]

    assert populations == sorted(populations)
    assert populations[0] < 1e-3
    assert populations[-1] < 0.5


def test_expectation_is_the_trace_against_the_state():
    cfg = HilbertConfig(fock_dim=5)
    state = solve_point(metamolecule(e0_mu_mev=0.1), OMEGA_X, cfg)
    a, _ = ladder_operators(cfg)

    assert expectation(a, state) == pytest.approx(np.trace(a.toarray() @ state.rho), rel=1e-12)


def test_strong_drive_washes_out_the_fano_dip():
    grid = np.linspace(OMEGA_X - 6e11, OMEGA_X + 6e11, 31)
    cfg = HilbertConfig(fock_dim=15)

    def depth(drive):
        spectrum = nonlinear_spectrum(metamolecule(e0_mu_mev=drive), grid, cfg, workers=4)
        return dip_depth(spectrum, OMEGA_X, 6e11)

    weak = depth(1e-4)

    assert depth(0.1) < 0.75 * weak
    assert depth(0.2) < 0.5 * weak


# Sweeps

@pytest.mark.asyncio
async def test_sweep_keeps_grid_order():
    p = metamolecule(e0_mu_mev=0.05)
    cfg = HilbertConfig(fock_dim=4)
    grid = np.linspace(OMEGA_X - 2e11, OMEGA_X + 2e11, 5)

    points = await solve_sweep(p, grid, cfg, workers=2)

    assert [alpha for alpha, _ in points] == [
        pytest.approx(nonlinear_polarizability(p, w, cfg)) for w in grid
    ]
    assert all(0.0 <= residual < 1e-9 for _, residual in points)


def test_nonlinear_spectrum_rejects_a_reversed_grid():
    grid = np.array([OMEGA_X + 1e11, OMEGA_X])

    with pytest.raises(ValueError, match="strictly increasing"):
        nonlinear_spectrum(metamolecule(), grid, HilbertConfig(fock_dim=3))


def test_sparse_solver_matches_the_svd_null_space_despite_a_small_residual():
    p = metamolecule(e0_mu_mev=0.1)
    cfg = HilbertConfig(fock_dim=6)
    L = build_liouvillian(build_hamiltonian(p, OMEGA_X, cfg), (p.mnp.gamma_0, p.qd.gamma_x), cfg)
    *_, vh = scipy.linalg.svd(L.matrix.toarray())
    expected = vh[-1].conj().reshape(L.dim, L.dim, order="F")
    expected = expected / np.trace(expected)

    sparse = steady_state(L, method="sparse")

    np.testing.assert_allclose(sparse.rho, expected, atol=1e-8)
    # at least two solver steps plus the final normalised residual
    assert len(sparse.residuals) >= 3
