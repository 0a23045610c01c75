import logging
from pathlib import Path

import pytest
from pydantic import ValidationError

from fanoring.config import Settings, configure_logging, log_solver_event


def test_defaults_are_stable():
    app_settings = Settings(_env_file=None)

    assert app_settings.log_level == "INFO"
    assert app_settings.sweep_workers == 4
    assert app_settings.output_dir == Path("results")
    assert app_settings.steady_state_tol == 1e-9


def test_environment_overrides_use_the_project_prefix(monkeypatch):
    monkeypatch.setenv("FANORING_LOG_LEVEL", "DEBUG")
    monkeypatch.setenv("FANORING_SWEEP_WORKERS", "2")

    app_settings = Settings(_env_file=None)

    assert app_settings.log_level == "DEBUG"
    assert app_settings.sweep_workers == 2


@pytest.mark.parametrize("workers", [0, 65], ids=["none", "too-many"])
def test_sweep_workers_are_bounded(workers):
    with pytest.raises(ValidationError):
        Settings(_env_file=None, sweep_workers=workers)


def test_steady_state_tolerance_cannot_be_loose():
    with pytest.raises(ValidationError):
        Settings(_env_file=None, steady_state_tol=1e-3)


def test_output_dir_expands_the_home_directory(monkeypatch, tmp_path):
    monkeypatch.setenv("HOME", str(tmp_path))

    app_settings = Settings(_env_file=None, output_dir=Path("~/runs"))

    assert app_settings.resolved_output_dir == tmp_path / "runs"


def test_solver_events_are_key_value_telemetry(caplog):
    with caplog.at_level(logging.INFO, logger="fanoring.solver"):
        log_solver_event(scenario="qd-ring", points=8001, elapsed_ms=42, method="circulant")

    assert caplog.messages == [
        "scenario=qd-ring points=8001 elapsed_ms=42 method=circulant residual=None"
    ]


def test_solver_events_format_the_residual(caplog):
    with caplog.at_level(logging.INFO, logger="fanoring.solver"):
        log_solver_event(
            scenario="nonlinear", points=61, elapsed_ms=900, method="lindblad-dense", residual=3.2e-14
        )

    assert caplog.messages[0].endswith("residual=3.200e-14")


def test_configure_logging_accepts_lowercase_levels(monkeypatch):
    root = logging.getLogger()
    monkeypatch.setattr(root, "level", root.level)

    configure_logging("debug")

    assert root.level == logging.DEBUG
