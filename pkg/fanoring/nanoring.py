from __future__ import annotations

import logging
import math
from collections.abc import Sequence

import numpy as np

from fanoring.materials import (
    HBAR,
    coupling_chi,
    coupling_g,
    coupling_I,
    coupling_J,
    dielectric_wavenumber,
    q_general,
)
from fanoring.models import (
    DriveField,
    MaterialParams,
    MNPParams,
    Orientation,
    PermeabilityPoint,
    QDFeature,
    QDParams,
    RingConfig,
    RingDipoles,
    RingGeometry,
    RingLinearSystem,
    SingularSystemError,
)


# Nanoring

logger = logging.getLogger(__name__)

PHYSICAL_SITES = 4


def _circulant(first_row: np.ndarray) -> np.ndarray:
    """Stack of circulant matrices whose row n is ``first_row`` rotated by n."""
    size = first_row.shape[-1]
    index = (np.arange(size)[np.newaxis, :] - np.arange(size)[:, np.newaxis]) % size
    return first_row[..., index]


def _offset_couplings(
    geom: RingGeometry,
    mat: MaterialParams,
    omega: np.ndarray,
    radius: float,
) -> np.ndarray:
    """Interaction scalars Q for every site offset; offset 0 holds zero."""
    k = dielectric_wavenumber(mat, omega)
    q = np.zeros(np.shape(omega) + (geom.sites,), dtype=complex)
    for offset in range(1, geom.sites):
        q[..., offset] = q_general(geom, 0, offset, k, mat, radius=radius)
    return q


def _warn_diagnostic(geom: RingGeometry) -> None:
    if geom.sites != PHYSICAL_SITES:
        logger.warning(
            "ring with sites=%d is diagnostic only; the magnetic response is "
            "characterised for %d sites", geom.sites, PHYSICAL_SITES,
        )


# Bare ring

def bare_ring_dipole(
    geom: RingGeometry,
    mnp: MNPParams,
    mat: MaterialParams,
    omega: float | np.ndarray,
    H0: float,
) -> complex | np.ndarray:
    """Per-MNP dipole of the uniformly driven ring in closed form.

    The circulant symmetry makes every site amplitude equal, so the ring
    reduces to one oscillator shifted by the sum of its couplings:
    ``p = chi* c / (i Delta_0 + gamma_0 / 2 + i sum_m J_m)``.
    """
    _warn_diagnostic(geom)
    omega = np.asarray(omega, dtype=float)
    chi = coupling_chi(mnp, mat)
    couplings = coupling_J(mnp, mat, _offset_couplings(geom, mat, omega, geom.r1))
    l0 = 1j * (mnp.omega_0 - omega) + mnp.gamma_0 / 2.0
    e0 = DriveField(h0=H0).azimuthal_field(omega, geom.r1)
    c = 1j * chi * e0 / HBAR
    p = np.conj(chi) * c / (l0 + 1j * couplings.sum(axis=-1))
    return p if p.ndim else complex(p)


# QD-loaded ring

def build_ring_system(
    geom: RingGeometry,
    mnp: MNPParams,
    qd: QDParams,
    mat: MaterialParams,
    omega: float | np.ndarray,
    H0: float,
    coupling_scale: float = 1.0,
) -> RingLinearSystem:
    _warn_diagnostic(geom)
    omega = np.asarray(omega, dtype=float)
    chi = coupling_chi(mnp, mat)
    drive = DriveField(h0=H0)

    a_row = 1j * coupling_J(mnp, mat, _offset_couplings(geom, mat, omega, geom.r1))
    a_row[..., 0] = 1j * (mnp.omega_0 - omega) + mnp.gamma_0 / 2.0
    d_row = 1j * coupling_I(qd, _offset_couplings(geom, mat, omega, geom.r2))
    d_row[..., 0] = 1j * (qd.omega_x - omega) + qd.gamma_x / 2.0

    # Same-site and opposite-site pairs are transverse; nearest-neighbour
    # MNP-QD terms cancel and stay zero.
    g1 = coupling_scale * coupling_g(qd, mnp, geom.d1, Orientation.PERPENDICULAR, mat)
    g2 = coupling_scale * coupling_g(qd, mnp, geom.d2, Orientation.PERPENDICULAR, mat)
    b_row = np.zeros(geom.sites, dtype=complex)
    b_row[0] = g1
    if geom.sites % 2 == 0:
        b_row[geom.sites // 2] = -g2
    B = np.broadcast_to(_circulant(b_row), np.shape(omega) + (geom.sites, geom.sites))

    ones = np.ones(np.shape(omega) + (geom.sites,))
    c_vec = ones * (1j * chi * drive.azimuthal_field(omega, geom.r1) / HBAR)[..., np.newaxis]
    e_vec = ones * (1j * qd.mu * drive.azimuthal_field(omega, geom.r2) / HBAR)[..., np.newaxis]
    return RingLinearSystem(
        omega=omega,
        A=_circulant(a_row),
        D=_circulant(d_row),
        B=np.array(B),
        c_vec=c_vec,
        e_vec=e_vec,
        chi=chi,
        mu=qd.mu,
    )


def _solve_vec(matrix: np.ndarray, vector: np.ndarray) -> np.ndarray:
    return np.linalg.solve(matrix, vector[..., np.newaxis])[..., 0]


def solve_ring(sys: RingLinearSystem) -> RingDipoles:
    """Eliminate one block at a time: (A + B D^-1 B) a = B D^-1 e + c and
    (D + B A^-1 B) sigma = e - B A^-1 c."""
    condition = float(max(np.max(np.linalg.cond(sys.A)), np.max(np.linalg.cond(sys.D))))
    if not math.isfinite(condition) or condition > 1.0 / np.finfo(float).eps:
        raise SingularSystemError("ring block matrix is singular", condition)
    A, B, D = sys.A, sys.B, sys.D
    a = _solve_vec(
        A + B @ np.linalg.solve(D, B),
        _matvec(B, _solve_vec(D, sys.e_vec)) + sys.c_vec,
    )
    sigma = _solve_vec(
        D + B @ np.linalg.solve(A, B),
        sys.e_vec - _matvec(B, _solve_vec(A, sys.c_vec)),
    )
    return RingDipoles(
        a=a,
        sigma=sigma,
        p_mnp=_scalar(np.conj(sys.chi) * a[..., 0]),
        p_qd=_scalar(sys.mu * sigma[..., 0]),
    )


def _matvec(matrix: np.ndarray, vector: np.ndarray) -> np.ndarray:
    return (matrix @ vector[..., np.newaxis])[..., 0]


# Magnetic response

def magnetic_dipole(
    p_site: complex | np.ndarray,
    N: int,
    R: float,
    omega: float | np.ndarray,
) -> complex | np.ndarray:
    return -1j * np.asarray(omega) * p_site * N * R / 2.0


def maxwell_garnett(
    alpha_m: complex | np.ndarray,
    N_d: float,
    k: float | np.ndarray,
    lattice_correction: bool = False,
) -> complex | np.ndarray:
    if N_d <= 0.0:
        raise ValueError("number density N_d must be positive")
    alpha = np.asarray(alpha_m, dtype=complex)
    k = np.broadcast_to(np.asarray(k, dtype=float), alpha.shape)
    mu_eff = np.ones(alpha.shape, dtype=complex)
    filled = alpha != 0.0
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        inverse = 1.0 / alpha[filled]
        if lattice_correction:
            inverse = inverse + 1j * k[filled] ** 3 / (6.0 * math.pi)
        mu_eff[filled] = 1.0 + 1.0 / (inverse / N_d - 1.0 / 3.0)
    return mu_eff if mu_eff.ndim else complex(mu_eff)


def magnetic_polarizability(config: RingConfig, omega: float | np.ndarray) -> complex | np.ndarray:
    if config.drive.h0 <= 0.0:
        raise ValueError("the magnetic polarizability needs H0 > 0")
    geom = config.geom
    if not config.loaded:
        p = bare_ring_dipole(geom, config.mnp, config.mat, omega, config.drive.h0)
        return magnetic_dipole(p, geom.sites, geom.r1, omega) / config.drive.h0
    if config.qd is None:
        raise ValueError("a loaded ring needs its QD parameters")
    dipoles = solve_ring(
        build_ring_system(
            geom, config.mnp, config.qd, config.mat, omega,
            config.drive.h0, config.coupling_scale,
        )
    )
    m = magnetic_dipole(dipoles.p_mnp, geom.sites, geom.r1, omega)
    if config.qd_dipole:
        m = m + magnetic_dipole(dipoles.p_qd, geom.sites, geom.r2, omega)
    return m / config.drive.h0


def permeability_spectrum(config: RingConfig, grid: np.ndarray) -> list[PermeabilityPoint]:
    grid = np.atleast_1d(np.asarray(grid, dtype=float))
    if np.any(np.diff(grid) <= 0.0):
        raise ValueError("frequency grid must be strictly increasing")
    alpha_m = np.atleast_1d(magnetic_polarizability(config, grid))
    mu_eff = np.atleast_1d(
        maxwell_garnett(
            alpha_m,
            config.number_density,
            dielectric_wavenumber(config.mat, grid),
            config.lattice_correction,
        )
    )
    active = int(np.count_nonzero(mu_eff.imag < 0.0))
    if active:
        logger.warning(
            "active medium: %d of %d points have Im mu_eff < 0 (lattice_correction=%s)",
            active, len(grid), config.lattice_correction,
        )
    return [
        PermeabilityPoint(omega=float(w), alpha_m=complex(a), mu_eff=complex(m))
        for w, a, m in zip(grid, alpha_m, mu_eff)
    ]


# Spectrum analysis

def resonance_frequency(points: Sequence[PermeabilityPoint]) -> float:
    """Grid frequency of the largest Im mu_eff."""
    imag = np.array([point.mu_eff.imag for point in points])
    return points[int(np.argmax(imag))].omega


def qd_feature(
    bare: Sequence[PermeabilityPoint],
    loaded: Sequence[PermeabilityPoint],
) -> QDFeature:
    """Centre and half-power width of the change the QDs make to mu_eff."""
    omega = np.array([point.omega for point in loaded])
    if len(bare) != len(loaded) or not np.array_equal(omega, [point.omega for point in bare]):
        raise ValueError("bare and loaded spectra must share one grid")
    power = np.abs(
        np.array([point.mu_eff for point in loaded]) - np.array([point.mu_eff for point in bare])
    ) ** 2
    peak = int(np.argmax(power))
    half = power[peak] / 2.0

    left = peak
    while left > 0 and power[left - 1] >= half:
        left -= 1
    right = peak
    while right < len(power) - 1 and power[right + 1] >= half:
        right += 1
    if left == 0 or right == len(power) - 1:
        logger.warning("QD feature is not resolved inside the grid; width is a lower bound")

    low = omega[left] if left == 0 else _crossing(omega, power, left - 1, half)
    high = omega[right] if right == len(power) - 1 else _crossing(omega, power, right, half)
    return QDFeature(center=float(omega[peak]), bandwidth=float(high - low))


def _crossing(omega: np.ndarray, power: np.ndarray, index: int, level: float) -> float:
    w0, w1 = omega[index], omega[index + 1]
    p0, p1 = power[index], power[index + 1]
    return float(w0 + (level - p0) / (p1 - p0) * (w1 - w0))


def _scalar(value):
    value = np.asarray(value)
    return value if value.ndim else value.item()
