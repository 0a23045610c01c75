from __future__ import annotations

import hashlib
import json
import logging
import time

import numpy as np
from pydantic import ValidationError

from fanoring import __version__
from fanoring.config import Settings, log_solver_event, settings
from fanoring.liouville import nonlinear_spectrum
from fanoring.materials import derive_mnp
from fanoring.metamolecule import assemble_metamolecule, polarizability_spectrum
from fanoring.models import (
    ConfigError,
    DriveField,
    FrequencyGrid,
    HilbertConfig,
    MetamoleculeParams,
    Orientation,
    QDParams,
    ResultTable,
    RingConfig,
    RingGeometry,
    ScenarioConfig,
    SolverError,
)
from fanoring.nanoring import permeability_spectrum


# Scenarios

logger = logging.getLogger(__name__)

POLARIZABILITY_UNITS = "omega=rad/s value=C*m^2/V"
PERMEABILITY_UNITS = "omega=rad/s value=dimensionless"


def parse_config(text: str) -> ScenarioConfig:
    """Validate a JSON scenario document; a blank document means every default."""
    try:
        return ScenarioConfig.model_validate_json(text if text.strip() else "{}")
    except ValidationError as exc:
        raise ConfigError(_describe(exc)) from exc


def serialize_config(cfg: ScenarioConfig) -> str:
    return cfg.model_dump_json(indent=2)


def update_config(cfg: ScenarioConfig, **changes: object) -> ScenarioConfig:
    """Copy ``cfg`` with top-level changes, validating the result again."""
    try:
        return ScenarioConfig.model_validate({**cfg.model_dump(), **changes})
    except ValidationError as exc:
        raise ConfigError(_describe(exc)) from exc


def parameter_hash(cfg: ScenarioConfig) -> str:
    canonical = json.dumps(cfg.model_dump(mode="json", exclude={"output"}), sort_keys=True)
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def _describe(exc: ValidationError) -> str:
    problems = []
    for error in exc.errors():
        key = ".".join(str(part) for part in error["loc"]) or "<document>"
        expected = error.get("ctx", {}).get("expected")
        detail = error["msg"] if expected is None else f"{error['msg']} (expected {expected})"
        problems.append(f"{key}: {detail}")
    return "; ".join(problems)


# Parameters

def omega_x(cfg: ScenarioConfig) -> float:
    return derive_mnp(cfg.material, cfg.mnp.radius).omega_0 - cfg.detuning


def build_qd(cfg: ScenarioConfig) -> QDParams:
    transition = omega_x(cfg)
    if transition <= 0.0:
        raise ConfigError(f"detuning: QD transition frequency {transition:.4g} rad/s is not positive")
    return QDParams(
        dipole_radius=cfg.qd.dipole_radius,
        omega_x=transition,
        gamma_x=cfg.qd.gamma_x,
    )


def build_metamolecule(cfg: ScenarioConfig) -> MetamoleculeParams:
    return assemble_metamolecule(
        cfg.material,
        cfg.mnp.radius,
        build_qd(cfg),
        cfg.separation,
        Orientation.from_name(cfg.orientation),
        cfg.drive,
        cfg.coupling_scale,
    )


def build_ring(cfg: ScenarioConfig) -> RingConfig:
    loaded = cfg.scenario == "qd-ring"
    return RingConfig(
        mat=cfg.material,
        mnp=derive_mnp(cfg.material, cfg.mnp.radius),
        qd=build_qd(cfg) if loaded else None,
        geom=RingGeometry(sites=cfg.ring.sites, r1=cfg.ring.r1, r2=cfg.ring.r2),
        drive=DriveField(h0=cfg.ring.h0),
        number_density=cfg.ring.number_density,
        lattice_correction=cfg.ring.lattice_correction,
        loaded=loaded,
        coupling_scale=cfg.coupling_scale,
        qd_dipole=cfg.ring.qd_dipole,
    )


def default_grid(cfg: ScenarioConfig) -> FrequencyGrid:
    """Sweep window used when a document carries no grid."""
    if cfg.scenario == "metamolecule":
        center = omega_x(cfg)
        return FrequencyGrid(start=center - 5e12, stop=center + 5e12, points=101)
    if cfg.scenario == "nonlinear":
        center = omega_x(cfg)
        return FrequencyGrid(start=center - 6e11, stop=center + 6e11, points=61)
    if cfg.scenario == "qd-ring":
        center = omega_x(cfg)
        return FrequencyGrid(start=center - 2e13, stop=center + 2e13, points=8001)
    omega_0 = derive_mnp(cfg.material, cfg.mnp.radius).omega_0
    return FrequencyGrid(start=0.85 * omega_0, stop=1.02 * omega_0, points=1701)


# Runner

def run_scenario(cfg: ScenarioConfig, app_settings: Settings = settings) -> ResultTable:
    grid = (cfg.grid or default_grid(cfg)).values()
    started = time.perf_counter()
    try:
        if cfg.scenario == "metamolecule":
            spectrum = polarizability_spectrum(build_metamolecule(cfg), grid)
            values, units, method = spectrum.values, POLARIZABILITY_UNITS, "analytic"
            residual = None
        elif cfg.scenario == "nonlinear":
            spectrum = nonlinear_spectrum(
                build_metamolecule(cfg),
                grid,
                HilbertConfig(fock_dim=cfg.fock_dim),
                workers=app_settings.sweep_workers,
                method=cfg.solver,
            )
            values, units, method = spectrum.values, POLARIZABILITY_UNITS, f"lindblad-{cfg.solver}"
            residual = spectrum.residual
        elif cfg.scenario in {"bare-ring", "qd-ring"}:
            points = permeability_spectrum(build_ring(cfg), grid)
            values = np.array([point.mu_eff for point in points])
            units, method = PERMEABILITY_UNITS, "circulant"
            residual = None
        else:
            raise ConfigError(f"scenario: unsupported value {cfg.scenario!r}")
    except (SolverError, ValueError) as exc:
        exc.add_note(f"scenario={cfg.scenario} parameter_hash={parameter_hash(cfg)[:12]}")
        raise

    log_solver_event(
        scenario=cfg.scenario,
        points=len(grid),
        elapsed_ms=int((time.perf_counter() - started) * 1000),
        method=method,
        residual=residual,
    )
    return ResultTable(
        meta={
            "scenario": cfg.scenario,
            "parameter_hash": parameter_hash(cfg),
            "units": units,
            "value": "mu_eff" if units == PERMEABILITY_UNITS else "alpha",
            "version": __version__,
            "points": len(grid),
        },
        omega=grid,
        values=values,
    )
