from __future__ import annotations

import logging

import numpy as np

from fanoring.materials import HBAR, coupling_chi, coupling_g, derive_mnp
from fanoring.models import (
    ComplexSpectrum,
    DriveSpec,
    MaterialParams,
    MetamoleculeParams,
    Orientation,
    QDParams,
    SingularSystemError,
    SteadyAmplitudes,
)


# Metamolecule

logger = logging.getLogger(__name__)

WEAK_DRIVE_RATIO = 0.1
WEAK_POPULATION = 0.1


def assemble_metamolecule(
    mat: MaterialParams,
    radius: float,
    qd: QDParams,
    d: float,
    orient: Orientation,
    drive: DriveSpec | None = None,
    coupling_scale: float = 1.0,
) -> MetamoleculeParams:
    mnp = derive_mnp(mat, radius)
    return MetamoleculeParams(
        mat=mat,
        mnp=mnp,
        qd=qd,
        d=d,
        orient=orient,
        g=coupling_scale * coupling_g(qd, mnp, d, orient, mat),
        chi=coupling_chi(mnp, mat),
        drive=drive or DriveSpec(),
    )


def drive_field(p: MetamoleculeParams) -> float:
    return p.e0


def _linewidths(p: MetamoleculeParams, omega: float | np.ndarray):
    omega = np.asarray(omega, dtype=float)
    delta_0 = p.mnp.omega_0 - omega
    delta_x = p.qd.omega_x - omega
    l0 = 1j * delta_0 + p.mnp.gamma_0 / 2.0
    lx = 1j * delta_x + p.qd.gamma_x / 2.0
    det = l0 * lx + p.g**2
    if np.any(np.abs(det) <= np.finfo(float).eps * np.abs(l0 * lx)) or not np.all(np.isfinite(det)):
        condition = float(np.max(np.abs(l0 * lx) / np.maximum(np.abs(det), np.finfo(float).tiny)))
        raise SingularSystemError(
            f"Maxwell-Bloch system is singular (gamma_0={p.mnp.gamma_0:.3e}, "
            f"gamma_x={p.qd.gamma_x:.3e}, g={p.g:.3e})",
            condition,
        )
    return omega, delta_0, delta_x, l0, lx, det


def _solve(p: MetamoleculeParams, omega: float | np.ndarray) -> SteadyAmplitudes:
    omega, delta_0, delta_x, l0, lx, det = _linewidths(p, omega)
    c = 1j * p.chi * p.e0 / HBAR
    e = 1j * p.qd.mu * p.e0 / HBAR
    return SteadyAmplitudes(
        a=_scalar((c * lx + p.g * e) / det),
        sigma=_scalar((l0 * e - p.g * c) / det),
        omega=_scalar(omega),
        delta_0=_scalar(delta_0),
        delta_x=_scalar(delta_x),
    )


def mb_steady_state(p: MetamoleculeParams, omega: float | np.ndarray) -> SteadyAmplitudes:
    """Weak-field steady state of the coupled MNP plasmon and QD exciton.

    With the time derivatives zeroed and the QD population dropped, the
    equations of motion reduce to

        (i Delta_0 + gamma_0 / 2) a - g sigma = i chi E0 / hbar
        g a + (i Delta_x + gamma_x / 2) sigma = i mu E0 / hbar
    """
    amplitudes = _solve(p, omega)
    weak_drive_check(p, amplitudes)
    return amplitudes


def analytic_polarizability(p: MetamoleculeParams, omega: float | np.ndarray) -> complex | np.ndarray:
    _, _, _, l0, lx, det = _linewidths(p, omega)
    chi, mu, g = p.chi, p.qd.mu, p.g
    numerator = abs(chi) ** 2 * lx + mu**2 * l0 + g * mu * (np.conj(chi) - chi)
    return _scalar(1j / HBAR * numerator / det)


def polarizability_spectrum(p: MetamoleculeParams, grid: np.ndarray) -> ComplexSpectrum:
    grid = np.atleast_1d(np.asarray(grid, dtype=float))
    if np.any(np.diff(grid) <= 0.0):
        raise ValueError("frequency grid must be strictly increasing")
    spectrum = ComplexSpectrum(grid, analytic_polarizability(p, grid))
    weak_drive_check(p, _solve(p, grid))
    return spectrum


def weak_drive_check(p: MetamoleculeParams, amplitudes: SteadyAmplitudes) -> bool:
    """Warn when the weak-field linearisation is doubtful; returns True when it holds."""
    rabi = p.e0 * p.qd.mu / HBAR
    population = float(np.max(np.abs(amplitudes.sigma) ** 2))
    weak = True
    if rabi > WEAK_DRIVE_RATIO * p.qd.gamma_x:
        logger.warning(
            "weak-drive assumption violated: rabi_rad_s=%.3e gamma_x=%.3e",
            rabi, p.qd.gamma_x,
        )
        weak = False
    if population > WEAK_POPULATION:
        logger.warning(
            "linear QD population estimate %.3f exceeds %.1f; use the master equation",
            population, WEAK_POPULATION,
        )
        weak = False
    return weak


# Spectrum analysis

def dip_depth(spectrum: ComplexSpectrum, omega_x: float, half_width: float) -> float:
    """Mean of Im(alpha) at the two window edges minus its minimum inside the window."""
    mask = np.abs(spectrum.omega - omega_x) <= half_width * (1.0 + 1e-9)
    window = spectrum.values[mask].imag
    if window.size < 3:
        raise ValueError("the dip window holds fewer than three grid points")
    shoulders = 0.5 * (window[0] + window[-1])
    return float(shoulders - window.min())


def _scalar(value):
    value = np.asarray(value)
    return value if value.ndim else value.item()
