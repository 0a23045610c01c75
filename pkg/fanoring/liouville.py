"""Driven-dissipative master equation for one MNP-QD metamolecule.

The plasmon is a truncated boson and the QD a two-level system with basis
order (ground, excited); the joint space is ``boson ⊗ qubit``.  Hamiltonians
are returned divided by hbar (rad/s) in the frame rotating at the drive
frequency.  Density matrices are vectorised column by column, so
``vec(A rho B) = (B^T ⊗ A) vec(rho)``.
"""

from __future__ import annotations

import asyncio
import logging
import time
import warnings

import numpy as np
import scipy.linalg
import scipy.sparse as sp
from scipy.sparse.linalg import norm as sparse_norm
from scipy.sparse.linalg import splu

from fanoring.config import settings
from fanoring.materials import HBAR
from fanoring.models import (
    ComplexSpectrum,
    DegenerateSteadyStateError,
    HilbertConfig,
    MetamoleculeParams,
    SolverError,
    SolverMethod,
    SteadyState,
    SteadyStateError,
    SuperOperator,
)


# Operators

logger = logging.getLogger(__name__)

DENSE_LIMIT = 2500
HERMITIAN_TOL = 1e-12
TRACE_TOL = 1e-10
POSITIVITY_TOL = -1e-8
INVERSE_SHIFT = 1e-11


def ladder_operators(cfg: HilbertConfig) -> tuple[sp.csr_matrix, sp.csr_matrix]:
    """Plasmon annihilation ``a`` and QD lowering ``sigma`` on the joint space."""
    destroy = sp.diags(np.sqrt(np.arange(1, cfg.fock_dim, dtype=float)), offsets=1)
    lower = sp.csr_matrix(np.array([[0.0, 1.0], [0.0, 0.0]]))
    a = sp.kron(destroy, sp.identity(cfg.qubit_dim), format="csr")
    sigma = sp.kron(sp.identity(cfg.fock_dim), lower, format="csr")
    return a, sigma


def build_hamiltonian(
    p: MetamoleculeParams,
    omega: float,
    cfg: HilbertConfig | None = None,
) -> sp.csr_matrix:
    """H / hbar = D0 a'a + Dx s's + i g (s a' - s' a) - (E0 / hbar)(mu (s + s') + chi* a + chi a')."""
    cfg = cfg or HilbertConfig()
    a, sigma = ladder_operators(cfg)
    ad, sd = a.conj().T.tocsr(), sigma.conj().T.tocsr()
    drive = p.e0 / HBAR
    hamiltonian = (
        (p.mnp.omega_0 - omega) * (ad @ a)
        + (p.qd.omega_x - omega) * (sd @ sigma)
        + 1j * p.g * (sigma @ ad - sd @ a)
        - drive * (p.qd.mu * (sigma + sd) + np.conj(p.chi) * a + p.chi * ad)
    ).tocsr()
    scale = max(sparse_norm(hamiltonian), 1.0)
    if sparse_norm(hamiltonian - hamiltonian.conj().T) > HERMITIAN_TOL * scale:
        raise SolverError("rotating-frame Hamiltonian is not Hermitian")
    return hamiltonian


# Liouvillian

def build_liouvillian(
    H: sp.spmatrix,
    rates: tuple[float, float],
    cfg: HilbertConfig | None = None,
) -> SuperOperator:
    """Lindblad generator with plasmon decay at rates[0] and QD decay at rates[1]."""
    cfg = cfg or HilbertConfig()
    n = cfg.n
    if H.shape != (n, n):
        raise ValueError(f"Hamiltonian shape {H.shape} does not match dimension {n}")
    if min(rates) < 0.0:
        raise ValueError("decay rates must be non-negative")

    identity = sp.identity(n, format="csr")
    H = sp.csr_matrix(H)
    generator = -1j * (sp.kron(identity, H) - sp.kron(H.T, identity))
    for rate, jump in zip(rates, ladder_operators(cfg)):
        if rate == 0.0:
            continue
        number = (jump.conj().T @ jump).tocsr()
        generator = generator + rate * (
            sp.kron(jump.conj(), jump)
            - 0.5 * sp.kron(identity, number)
            - 0.5 * sp.kron(number.T, identity)
        )
    generator = generator.tocsr()

    trace = np.eye(n).reshape(-1, order="F")
    leak = np.linalg.norm(generator.conj().T @ trace)
    if leak > TRACE_TOL * max(sparse_norm(generator), 1.0):
        raise SolverError(f"generator does not preserve the trace (|L+(I)|={leak:.3e})")
    return SuperOperator(matrix=generator, dim=n)


# Steady state

def steady_state(
    L: SuperOperator,
    method: SolverMethod = "auto",
    tol: float | None = None,
    maxiter: int | None = None,
) -> SteadyState:
    """Normalised fixed point of ``L``; the residual is relative to max|L_ij|."""
    tol = settings.steady_state_tol if tol is None else tol
    maxiter = settings.steady_state_maxiter if maxiter is None else maxiter
    n = L.dim
    scale = abs(L.matrix).max()
    if scale == 0.0:
        raise DegenerateSteadyStateError("the generator is zero; every state is stationary")
    scaled = (L.matrix / scale).tocsc()

    if method == "auto":
        method = "dense" if n * n <= DENSE_LIMIT else "sparse"
    if method == "dense":
        vec, residuals = _dense_null_vector(scaled, n), []
    elif method == "sparse":
        vec, residuals = _inverse_iteration(scaled, tol, maxiter)
    else:
        raise ValueError(f"Unsupported steady-state method: {method}")

    rho = vec.reshape(n, n, order="F")
    rho = rho / np.trace(rho)
    rho = 0.5 * (rho + rho.conj().T)
    flat = rho.reshape(-1, order="F")
    residual = float(np.linalg.norm(scaled @ flat) / np.linalg.norm(flat))
    residuals.append(residual)
    if residual > tol:
        raise SteadyStateError(
            f"{method} steady state did not converge (residual {residual:.3e} > {tol:.1e})",
            residuals,
        )
    if abs(np.trace(rho) - 1.0) > TRACE_TOL:
        raise SteadyStateError("steady state lost its unit trace", residuals)
    lowest = float(np.linalg.eigvalsh(rho)[0])
    if lowest < POSITIVITY_TOL:
        raise SteadyStateError(
            f"steady state is not positive (lowest eigenvalue {lowest:.3e})", residuals
        )
    if lowest < 0.0:
        rho = clamp_negative_eigenvalues(rho)
    return SteadyState(rho=rho, residual=residual, method=method, residuals=tuple(residuals))


def clamp_negative_eigenvalues(rho: np.ndarray) -> np.ndarray:
    """Zero the negative eigenvalues of a Hermitian ``rho`` and restore unit trace."""
    values, vectors = np.linalg.eigh(rho)
    rho = (vectors * np.clip(values, 0.0, None)) @ vectors.conj().T
    return rho / np.trace(rho).real


def _dense_null_vector(scaled: sp.spmatrix, n: int) -> np.ndarray:
    """Swap one population row for the trace condition and solve directly."""
    matrix = scaled.toarray()
    matrix[0, :] = np.eye(n).reshape(-1, order="F")
    rhs = np.zeros(n * n, dtype=complex)
    rhs[0] = 1.0
    with warnings.catch_warnings():
        warnings.simplefilter("error", scipy.linalg.LinAlgWarning)
        try:
            return scipy.linalg.solve(matrix, rhs)
        except (scipy.linalg.LinAlgError, scipy.linalg.LinAlgWarning) as exc:
            raise DegenerateSteadyStateError(
                f"steady state is not unique: {exc}"
            ) from exc


def _inverse_iteration(scaled: sp.spmatrix, tol: float, maxiter: int) -> tuple[np.ndarray, list[float]]:
    size = scaled.shape[0]
    shifted = (scaled - INVERSE_SHIFT * sp.identity(size, format="csc")).tocsc()
    try:
        lu = splu(shifted)
    except RuntimeError as exc:
        raise DegenerateSteadyStateError(f"shifted generator is singular: {exc}") from exc
    vec = np.ones(size, dtype=complex)
    residuals: list[float] = []
    for _ in range(maxiter):
        previous = vec
        vec = lu.solve(vec)
        # Dividing by the largest entry fixes the phase, so iterates compare directly.
        vec = vec / vec[np.argmax(np.abs(vec))]
        residual = float(np.linalg.norm(scaled @ vec) / np.linalg.norm(vec))
        residuals.append(residual)
        # Converged once the iterate stops moving, not just the residual.
        change = float(np.max(np.abs(vec - previous)))
        if residual < tol and change < tol:
            return vec, residuals
    raise SteadyStateError(
        f"inverse iteration stalled after {maxiter} steps (residual {residuals[-1]:.3e})",
        residuals,
    )


# Observables

def expectation(op: sp.spmatrix, state: SteadyState) -> complex:
    return complex(sp.csr_matrix(op).multiply(state.rho.T).sum())


def qd_population(state: SteadyState, cfg: HilbertConfig | None = None) -> float:
    _, sigma = ladder_operators(cfg or HilbertConfig())
    return expectation(sigma.conj().T @ sigma, state).real


def solve_point(
    p: MetamoleculeParams,
    omega: float,
    cfg: HilbertConfig | None = None,
    method: SolverMethod = "auto",
) -> SteadyState:
    cfg = cfg or HilbertConfig()
    H = build_hamiltonian(p, omega, cfg)
    return steady_state(build_liouvillian(H, (p.mnp.gamma_0, p.qd.gamma_x), cfg), method)


def nonlinear_polarizability(
    p: MetamoleculeParams,
    omega: float,
    cfg: HilbertConfig | None = None,
    method: SolverMethod = "auto",
) -> complex:
    """alpha = (chi* <a> + mu <sigma>) / E0 from the steady state at any drive."""
    return _polarizability_point(p, omega, cfg, method)[0]


def _polarizability_point(
    p: MetamoleculeParams,
    omega: float,
    cfg: HilbertConfig | None,
    method: SolverMethod,
) -> tuple[complex, float]:
    if p.e0 <= 0.0:
        raise ValueError("the polarizability needs a non-zero drive")
    cfg = cfg or HilbertConfig()
    state = solve_point(p, omega, cfg, method)
    a, sigma = ladder_operators(cfg)
    alpha = (np.conj(p.chi) * expectation(a, state) + p.qd.mu * expectation(sigma, state)) / p.e0
    return complex(alpha), state.residual


def check_truncation(
    p: MetamoleculeParams,
    omega: float,
    cfg: HilbertConfig | None = None,
    extra: int = 5,
) -> float:
    """Largest relative change of <a> and <sigma> when fock_dim grows by ``extra``."""
    cfg = cfg or HilbertConfig()
    values = []
    for fock_dim in (cfg.fock_dim, cfg.fock_dim + extra):
        larger = HilbertConfig(fock_dim=fock_dim)
        state = solve_point(p, omega, larger)
        a, sigma = ladder_operators(larger)
        values.append(np.array([expectation(a, state), expectation(sigma, state)]))
    base, grown = values
    scale = np.maximum(np.abs(grown), np.finfo(float).tiny)
    return float(np.max(np.abs(grown - base) / scale))


# Sweeps

async def solve_sweep(
    p: MetamoleculeParams,
    grid: np.ndarray,
    cfg: HilbertConfig | None = None,
    workers: int | None = None,
    method: SolverMethod = "auto",
) -> list[tuple[complex, float]]:
    """Polarizability and steady-state residual per grid point, in grid order."""
    gate = asyncio.Semaphore(workers or settings.sweep_workers)

    async def point(omega: float) -> tuple[complex, float]:
        async with gate:
            return await asyncio.to_thread(_polarizability_point, p, omega, cfg, method)

    return await asyncio.gather(*(point(float(omega)) for omega in grid))


def nonlinear_spectrum(
    p: MetamoleculeParams,
    grid: np.ndarray,
    cfg: HilbertConfig | None = None,
    workers: int | None = None,
    method: SolverMethod = "auto",
) -> ComplexSpectrum:
    grid = np.atleast_1d(np.asarray(grid, dtype=float))
    if np.any(np.diff(grid) <= 0.0):
        raise ValueError("frequency grid must be strictly increasing")
    started = time.perf_counter()
    points = asyncio.run(solve_sweep(p, grid, cfg, workers, method))
    residual = max(res for _, res in points)
    logger.debug(
        "nonlinear sweep points=%d elapsed_ms=%d residual=%.3e",
        len(grid), int((time.perf_counter() - started) * 1000), residual,
    )
    return ComplexSpectrum(grid, np.array([alpha for alpha, _ in points]), residual)
