from __future__ import annotations

import math
from collections.abc import Iterator
from dataclasses import dataclass, field
from enum import IntEnum
from pathlib import Path
from typing import Annotated, Literal

import numpy as np
from pydantic import (
    BaseModel,
    BeforeValidator,
    ConfigDict,
    Field,
    computed_field,
    model_validator,
)
from scipy import constants
from scipy.sparse import csr_matrix

from fanoring.units import mev_to_joule, parse_frequency, rad_s_to_thz

# Errors

class ConfigError(ValueError):
    """A scenario document failed schema or physical-domain validation."""


class SolverError(RuntimeError):
    """A numerical solve failed."""


class SingularSystemError(SolverError):
    def __init__(self, message: str, condition: float):
        super().__init__(f"{message} (condition number {condition:.3e})")
        self.condition = condition


class SteadyStateError(SolverError):
    def __init__(self, message: str, residuals: list[float] | tuple[float, ...] = ()):
        super().__init__(message)
        self.residuals = list(residuals)


class DegenerateSteadyStateError(SteadyStateError):
    """The generator has more than one stationary state."""


# Domain

Frequency = Annotated[float, BeforeValidator(parse_frequency)]
GammaNrVariant = Literal["squared", "linear"]
OrientationName = Literal["parallel", "perpendicular"]
ScenarioKind = Literal["metamolecule", "bare-ring", "qd-ring", "nonlinear"]
SolverMethod = Literal["auto", "dense", "sparse"]
OutputFormat = Literal["csv", "json"]

SURFACE_GAP = 1e-9
_GEOMETRY_RTOL = 1e-9


class Orientation(IntEnum):
    """Orientation factor S of the QD dipole relative to the separation vector."""

    PARALLEL = 2
    PERPENDICULAR = -1

    @classmethod
    def from_name(cls, name: OrientationName) -> Orientation:
        return cls[name.upper()]


class MaterialParams(BaseModel):
    """Drude metal and background medium."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    omega_p: Frequency = Field(default=1.37e16, gt=0.0)
    gamma: Frequency = Field(default=2.7e13, ge=0.0)
    eps_inf: float = Field(default=5.0, gt=0.0)
    eps_b: float = Field(default=2.2, ge=1.0)
    mu_b: float = Field(default=1.0, gt=0.0)
    gamma_nr_variant: GammaNrVariant = "squared"

    @property
    def eps_0(self) -> float:
        return constants.epsilon_0

    @property
    def mu_0(self) -> float:
        return constants.mu_0


class MNPParams(BaseModel):
    model_config = ConfigDict(frozen=True)

    radius: float = Field(gt=0.0)
    omega_0: float = Field(gt=0.0)
    eta: float = Field(gt=0.0)
    gamma_nr: float = Field(gt=0.0)
    gamma_r: float = Field(ge=0.0)
    gamma_0: float = Field(gt=0.0)


class QDParams(BaseModel):
    model_config = ConfigDict(frozen=True)

    dipole_radius: float = Field(default=0.9e-9, gt=0.0)
    omega_x: float = Field(gt=0.0)
    gamma_x: float = Field(default=80e9, gt=0.0)

    @computed_field
    @property
    def mu(self) -> float:
        return constants.elementary_charge * self.dipole_radius


class DriveSpec(BaseModel):
    """Optical drive, either as the energy E0*mu in meV or as E0 in V/m."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    e0_mu_mev: float | None = Field(default=None, ge=0.0)
    e0_v_per_m: float | None = Field(default=None, ge=0.0)

    @model_validator(mode="after")
    def _one_form(self) -> DriveSpec:
        if self.e0_mu_mev is not None and self.e0_v_per_m is not None:
            raise ValueError("give either e0_mu_mev or e0_v_per_m, not both")
        if self.e0_mu_mev is None and self.e0_v_per_m is None:
            object.__setattr__(self, "e0_mu_mev", 1e-4)
        return self

    def field_amplitude(self, mu: float) -> float:
        if self.e0_v_per_m is not None:
            return self.e0_v_per_m
        return mev_to_joule(self.e0_mu_mev) / mu


@dataclass(frozen=True, slots=True)
class MetamoleculeParams:
    mat: MaterialParams
    mnp: MNPParams
    qd: QDParams
    d: float
    orient: Orientation
    g: float
    chi: complex
    drive: DriveSpec = field(default_factory=DriveSpec)

    def __post_init__(self) -> None:
        r = self.mnp.radius
        if self.d < 2.0 * r * (1.0 - _GEOMETRY_RTOL):
            raise ValueError(
                f"separation {self.d:.4g} m breaks the dipole approximation: "
                f"d >= 2r = {2.0 * r:.4g} m is required"
            )
        if self.d - r < SURFACE_GAP * (1.0 - _GEOMETRY_RTOL):
            raise ValueError(
                f"QD sits {self.d - r:.4g} m from the MNP surface; at least 1 nm is required"
            )

    @property
    def e0(self) -> float:
        return self.drive.field_amplitude(self.qd.mu)


@dataclass(frozen=True, slots=True)
class SteadyAmplitudes:
    a: complex | np.ndarray
    sigma: complex | np.ndarray
    omega: float | np.ndarray
    delta_0: float | np.ndarray
    delta_x: float | np.ndarray


@dataclass(frozen=True, slots=True)
class ComplexSpectrum:
    omega: np.ndarray
    values: np.ndarray
    # largest steady-state residual behind the values, when a solver produced them
    residual: float | None = None

    def __post_init__(self) -> None:
        omega = np.atleast_1d(np.asarray(self.omega, dtype=float))
        values = np.atleast_1d(np.asarray(self.values, dtype=complex))
        if omega.ndim != 1 or omega.shape != values.shape:
            raise ValueError("spectrum grid and values must be 1-D and the same length")
        if np.any(np.diff(omega) <= 0.0):
            raise ValueError("frequency grid must be strictly increasing")
        if not np.all(np.isfinite(values)):
            raise ValueError("spectrum values must be finite")
        object.__setattr__(self, "omega", omega)
        object.__setattr__(self, "values", values)

    def __len__(self) -> int:
        return len(self.omega)

    def nearest_index(self, omega: float) -> int:
        return int(np.argmin(np.abs(self.omega - omega)))


# Rings

class RingGeometry(BaseModel):
    model_config = ConfigDict(frozen=True)

    sites: int = Field(default=4, ge=2)
    r1: float = Field(default=38e-9, gt=0.0)
    r2: float = Field(default=6e-9, gt=0.0)

    @model_validator(mode="after")
    def _nested_rings(self) -> RingGeometry:
        if not self.r1 > self.r2:
            raise ValueError("the MNP ring radius r1 must exceed the QD ring radius r2")
        return self

    @property
    def d1(self) -> float:
        return self.r1 - self.r2

    @property
    def d2(self) -> float:
        return self.r1 + self.r2

    @property
    def angles(self) -> np.ndarray:
        return 2.0 * np.pi * np.arange(self.sites) / self.sites

    def site_position(self, index: int, radius: float) -> np.ndarray:
        phi = 2.0 * np.pi * (index % self.sites) / self.sites
        return radius * np.array([math.cos(phi), math.sin(phi), 0.0])

    def azimuthal_unit(self, index: int) -> np.ndarray:
        phi = 2.0 * np.pi * (index % self.sites) / self.sites
        return np.array([-math.sin(phi), math.cos(phi), 0.0])


class DriveField(BaseModel):
    """Uniform time-harmonic magnetic field threading the ring."""

    model_config = ConfigDict(frozen=True)

    h0: float = Field(default=1.0, ge=0.0)

    def azimuthal_field(self, omega: float | np.ndarray, radius: float) -> complex | np.ndarray:
        return 1j * omega * constants.mu_0 * radius * self.h0 / 2.0


@dataclass(frozen=True, slots=True)
class RingConfig:
    mat: MaterialParams
    mnp: MNPParams
    geom: RingGeometry
    drive: DriveField
    number_density: float
    qd: QDParams | None = None
    lattice_correction: bool = False
    loaded: bool = False
    coupling_scale: float = 1.0
    qd_dipole: bool = True


@dataclass(frozen=True, slots=True)
class RingLinearSystem:
    """Block system A a = B sigma + c, D sigma = -B a + e, batched over frequency."""

    omega: float | np.ndarray
    A: np.ndarray
    D: np.ndarray
    B: np.ndarray
    c_vec: np.ndarray
    e_vec: np.ndarray
    chi: complex
    mu: float


@dataclass(frozen=True, slots=True)
class RingDipoles:
    a: np.ndarray
    sigma: np.ndarray
    p_mnp: complex | np.ndarray
    p_qd: complex | np.ndarray


@dataclass(frozen=True, slots=True)
class PermeabilityPoint:
    omega: float
    alpha_m: complex
    mu_eff: complex


@dataclass(frozen=True, slots=True)
class QDFeature:
    center: float
    bandwidth: float

    @property
    def bandwidth_thz(self) -> float:
        return rad_s_to_thz(self.bandwidth)


# Master equation

class HilbertConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    fock_dim: int = Field(default=15, ge=2)
    qubit_dim: Literal[2] = 2

    @property
    def n(self) -> int:
        return self.fock_dim * self.qubit_dim


@dataclass(frozen=True, slots=True)
class SuperOperator:
    matrix: csr_matrix
    dim: int

    def apply(self, rho: np.ndarray) -> np.ndarray:
        vec = np.asarray(rho, dtype=complex).reshape(-1, order="F")
        return (self.matrix @ vec).reshape(self.dim, self.dim, order="F")


@dataclass(frozen=True, slots=True)
class SteadyState:
    rho: np.ndarray
    residual: float
    method: str
    residuals: tuple[float, ...] = ()


# Scenarios

class FrequencyGrid(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    start: Frequency = Field(gt=0.0)
    stop: Frequency = Field(gt=0.0)
    points: int = Field(ge=1)

    @model_validator(mode="after")
    def _ordered(self) -> FrequencyGrid:
        if self.points > 1 and not self.stop > self.start:
            raise ValueError("grid stop must exceed start")
        if self.points == 1 and self.stop != self.start:
            raise ValueError("a one-point grid needs start == stop")
        return self

    def values(self) -> np.ndarray:
        return np.linspace(self.start, self.stop, self.points)


class MNPSection(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    radius: float = Field(default=16e-9, gt=0.0)


class QDSection(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    dipole_radius: float = Field(default=0.9e-9, gt=0.0)
    gamma_x: Frequency = Field(default=80e9, gt=0.0)


class RingSection(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    sites: int = Field(default=4, ge=2)
    r1: float = Field(default=38e-9, gt=0.0)
    r2: float = Field(default=6e-9, gt=0.0)
    number_density: float = Field(default=96e-9 ** -3, gt=0.0)
    h0: float = Field(default=1.0, ge=0.0)
    lattice_correction: bool = False
    qd_dipole: bool = True


class OutputSection(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    path: Path | None = None
    format: OutputFormat = "csv"


class ScenarioConfig(BaseModel):
    """One runnable scenario; every section has a working default."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    scenario: ScenarioKind = "metamolecule"
    material: MaterialParams = Field(default_factory=MaterialParams)
    mnp: MNPSection = Field(default_factory=MNPSection)
    qd: QDSection = Field(default_factory=QDSection)
    separation: float = Field(default=32e-9, gt=0.0)
    orientation: OrientationName = "perpendicular"
    detuning: Frequency = 0.195e15
    coupling_scale: float = Field(default=1.0, ge=0.0)
    drive: DriveSpec = Field(default_factory=DriveSpec)
    ring: RingSection = Field(default_factory=RingSection)
    grid: FrequencyGrid | None = None
    fock_dim: int = Field(default=15, ge=2)
    solver: SolverMethod = "auto"
    output: OutputSection = Field(default_factory=OutputSection)

    @model_validator(mode="after")
    def _physical_domain(self) -> ScenarioConfig:
        r = self.mnp.radius
        if self.scenario in {"metamolecule", "nonlinear"}:
            if self.separation < 2.0 * r * (1.0 - _GEOMETRY_RTOL):
                raise ValueError(
                    f"dipole validity: separation {self.separation:.4g} m must be "
                    f"at least 2*radius = {2.0 * r:.4g} m"
                )
            if self.separation - r < SURFACE_GAP * (1.0 - _GEOMETRY_RTOL):
                raise ValueError("tunnelling exclusion: the QD must sit 1 nm or more from the MNP surface")
        if self.scenario in {"bare-ring", "qd-ring"}:
            if not self.ring.r1 > self.ring.r2:
                raise ValueError("ring.r1 must exceed ring.r2")
            if self.ring.r1 * math.sin(math.pi / self.ring.sites) < r * (1.0 - _GEOMETRY_RTOL):
                raise ValueError("neighbouring MNPs overlap: ring.r1 is too small for mnp.radius")
        if self.scenario == "qd-ring":
            gap = self.ring.r1 - self.ring.r2
            if gap < 2.0 * r * (1.0 - _GEOMETRY_RTOL):
                raise ValueError(
                    f"dipole validity: ring.r1 - ring.r2 = {gap:.4g} m must be "
                    f"at least 2*radius = {2.0 * r:.4g} m"
                )
        return self


@dataclass(slots=True)
class ResultTable:
    meta: dict[str, str | int]
    omega: np.ndarray
    values: np.ndarray

    def __post_init__(self) -> None:
        self.omega = np.asarray(self.omega, dtype=float).reshape(-1)
        self.values = np.asarray(self.values, dtype=complex).reshape(-1)
        if self.omega.shape != self.values.shape:
            raise ValueError("row count must equal the number of grid points")
        if not (np.all(np.isfinite(self.omega)) and np.all(np.isfinite(self.values))):
            raise ValueError("result tables hold finite values only")

    def __len__(self) -> int:
        return len(self.omega)

    def rows(self) -> Iterator[tuple[float, float, float]]:
        for omega, value in zip(self.omega, self.values):
            yield float(omega), float(value.real), float(value.imag)
