"""Physical constants and the closed-form quantities every other module consumes.

Conventions: SI units, angular frequencies in rad/s, time dependence
``exp(-i omega t)`` so that absorbing media have ``Im eps > 0`` and retarded
fields carry ``exp(+i k r)``.

The MNP dipole couples to the field through a complex-Lorentzian
polarizability.  Expanding the quasi-static sphere polarizability
``4 pi eps0 eps_b r^3 (eps_m - eps_b) / (eps_m + 2 eps_b)`` around the
Frohlich frequency ``omega_0`` gives ``12 pi eps0 eps_b^2 r^3 eta i /
(i Delta_0 + gamma / 2)``, and matching that to the linear response of a
damped boson ``a`` driven through ``chi`` fixes ``chi`` and, through the near
field of that dipole at the QD, ``g``.  Both polarizabilities are exposed so
the expansion can be checked numerically.
"""

from __future__ import annotations

import math

import numpy as np
from scipy import constants

from fanoring.models import (
    MaterialParams,
    MNPParams,
    Orientation,
    QDParams,
    RingGeometry,
)

EPS_0 = constants.epsilon_0
HBAR = constants.hbar
C_LIGHT = constants.c


# Permittivity

def drude_permittivity(mat: MaterialParams, omega: float | np.ndarray) -> complex | np.ndarray:
    omega = np.asarray(omega, dtype=float)
    if np.any(omega <= 0.0):
        raise ValueError("drude_permittivity needs omega > 0")
    eps = mat.eps_inf - mat.omega_p**2 / (omega**2 + 1j * mat.gamma * omega)
    return eps if eps.ndim else complex(eps)


def dielectric_wavenumber(mat: MaterialParams, omega: float | np.ndarray) -> float | np.ndarray:
    """Wavenumber in the background medium, omega * sqrt(eps_b mu_b) / c."""
    return omega * math.sqrt(mat.eps_b * mat.mu_b) / C_LIGHT


def quasistatic_polarizability(
    mat: MaterialParams, mnp: MNPParams, omega: float | np.ndarray
) -> complex | np.ndarray:
    eps_m = drude_permittivity(mat, omega)
    return (
        4.0 * math.pi * EPS_0 * mat.eps_b * mnp.radius**3
        * (eps_m - mat.eps_b) / (eps_m + 2.0 * mat.eps_b)
    )


def lorentzian_polarizability(
    mat: MaterialParams,
    mnp: MNPParams,
    omega: float | np.ndarray,
    include_radiative: bool = True,
) -> complex | np.ndarray:
    damping = mnp.gamma_0 if include_radiative else mnp.gamma_nr
    delta_0 = mnp.omega_0 - np.asarray(omega, dtype=float)
    prefactor = 12.0 * math.pi * EPS_0 * mat.eps_b**2 * mnp.radius**3 * mnp.eta
    return prefactor * 1j / (1j * delta_0 + damping / 2.0)


# Nanoparticle

def derive_mnp(mat: MaterialParams, r: float, omega_eval: float | None = None) -> MNPParams:
    """Resonance, oscillator strength and damping of a Drude sphere of radius ``r``.

    ``omega_eval`` is where the wavenumber inside the radiative rate is taken;
    it defaults to the Frohlich frequency so that ``gamma_0`` is one constant
    linewidth for the whole sweep.
    """
    if r <= 0.0:
        raise ValueError("MNP radius must be positive")
    eps_sum = mat.eps_inf + 2.0 * mat.eps_b
    omega_0 = mat.omega_p / math.sqrt(eps_sum)
    eta = (mat.gamma**2 * eps_sum + mat.omega_p**2) ** 2 / (
        2.0 * eps_sum**1.5 * mat.omega_p**3
    )
    # "linear" divides the cubic term by omega_p rather than omega_p**2.
    power = 2 if mat.gamma_nr_variant == "squared" else 1
    gamma_nr = mat.gamma + mat.gamma**3 * eps_sum / mat.omega_p**power
    k = dielectric_wavenumber(mat, omega_0 if omega_eval is None else omega_eval)
    gamma_r = 2.0 * k**3 * omega_0 * r**3 / eps_sum
    return MNPParams(
        radius=r,
        omega_0=omega_0,
        eta=eta,
        gamma_nr=gamma_nr,
        gamma_r=gamma_r,
        gamma_0=gamma_nr + gamma_r,
    )


# Couplings

def coupling_g(
    qd: QDParams,
    mnp: MNPParams,
    d: float,
    orient: Orientation | int,
    mat: MaterialParams,
) -> float:
    if d <= 0.0:
        raise ValueError("MNP-QD separation must be positive")
    s = int(orient)
    return s * qd.mu / d**3 * math.sqrt(
        3.0 * mnp.eta * mnp.radius**3 / (4.0 * math.pi * mat.eps_0 * HBAR)
    )


def coupling_chi(mnp: MNPParams, mat: MaterialParams) -> complex:
    return -1j * mat.eps_b * math.sqrt(
        12.0 * mnp.eta * mat.eps_0 * math.pi * HBAR * mnp.radius**3
    )


def coupling_J(mnp: MNPParams, mat: MaterialParams, q: complex | np.ndarray) -> complex | np.ndarray:
    return -12.0 * math.pi * mat.eps_0 * mat.eps_b**2 * mnp.radius**3 * mnp.eta * q


def coupling_I(qd: QDParams, q: complex | np.ndarray) -> complex | np.ndarray:
    return qd.mu**2 / HBAR * q


# Dipolar interaction

def dipole_field(
    p: np.ndarray,
    r_vec: np.ndarray,
    k: float | np.ndarray,
    eps_b: float,
) -> np.ndarray:
    """Retarded electric field at ``r_vec`` of a point dipole ``p`` at the origin.

    ``k`` may be an array; the result then has shape ``k.shape + (3,)``.
    """
    p = np.asarray(p, dtype=complex)
    r_vec = np.asarray(r_vec, dtype=float)
    k = np.asarray(k, dtype=float)[..., np.newaxis]
    r = np.linalg.norm(r_vec, axis=-1, keepdims=True)
    if np.any(r == 0.0):
        raise ValueError("the field point coincides with the dipole")
    far = k**2 * np.cross(np.cross(r_vec, p), r_vec) / r**3
    near = (3.0 * r_vec * np.sum(p * r_vec, axis=-1, keepdims=True) - p * r**2) * (
        1.0 / r**5 - 1j * k / r**4
    )
    return np.exp(1j * k * r) / (4.0 * math.pi * EPS_0 * eps_b) * (far + near)


def q_general(
    geom: RingGeometry,
    j: int,
    l: int,
    k: float | np.ndarray,
    mat: MaterialParams,
    radius: float | None = None,
) -> complex | np.ndarray:
    """Azimuthal field at site ``j`` from a unit azimuthal dipole at site ``l``.

    Both sites sit on the ring of ``radius`` (the MNP ring by default).
    """
    if j % geom.sites == l % geom.sites:
        raise ValueError("self-interaction is excluded: j and l must differ")
    radius = geom.r1 if radius is None else radius
    r_vec = geom.site_position(j, radius) - geom.site_position(l, radius)
    field = dipole_field(geom.azimuthal_unit(l), r_vec, k, mat.eps_b)
    q = field @ geom.azimuthal_unit(j)
    return q if np.ndim(q) else complex(q)


def q_closed_form(
    radius: float,
    theta: float,
    k: float | np.ndarray,
    eps_b: float,
) -> complex | np.ndarray:
    """Scalar form of the azimuthal interaction for sites ``theta`` apart."""
    r = math.sqrt(2.0 * radius**2 * (1.0 - math.cos(theta)))
    k = np.asarray(k, dtype=float)
    kr = k * r
    cos_t, sin_t = math.cos(theta), math.sin(theta)
    far = kr**2 * radius**2 * (2.0 * cos_t - cos_t**2 - 1.0)
    near = (3.0 * radius**2 * sin_t**2 - r**2 * cos_t) * (1.0 - 1j * kr)
    q = np.exp(1j * kr) / (4.0 * math.pi * EPS_0 * eps_b * r**5) * (far + near)
    return q if q.ndim else complex(q)
