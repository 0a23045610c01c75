from __future__ import annotations

import argparse
import logging
from pathlib import Path

from fanoring.config import Settings, configure_logging, settings
from fanoring.export import resolve_format, write_output
from fanoring.models import ConfigError, FrequencyGrid, ScenarioConfig, SolverError
from fanoring.scenarios import parameter_hash, parse_config, run_scenario, update_config
from fanoring.units import parse_frequency


# Command line

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_SOLVER = 3
EXIT_OUTPUT = 4

SCENARIOS = {
    "metamolecule": "Fano polarizability of one MNP-QD pair",
    "bare-ring": "effective permeability of the MNP nanoring",
    "qd-ring": "effective permeability of the QD-loaded nanoring",
    "nonlinear": "saturable polarizability from the master equation",
}


def parse_grid(text: str) -> FrequencyGrid:
    """Read ``start:stop:points``; start and stop take rad/s or a THz suffix."""
    parts = text.split(":")
    if len(parts) != 3:
        raise ConfigError(f"--grid: expected start:stop:points, got {text!r}")
    try:
        start, stop = (float(parse_frequency(part)) for part in parts[:2])
        points = int(parts[2])
    except ValueError as exc:
        raise ConfigError(f"--grid: {exc}") from exc
    try:
        return FrequencyGrid(start=start, stop=stop, points=points)
    except ValueError as exc:
        raise ConfigError(f"--grid: {exc}") from exc


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fanoring",
        description="Simulate quantum-plasmonic nanoring metamaterials",
    )
    commands = parser.add_subparsers(dest="command", required=True)
    for name, summary in SCENARIOS.items():
        command = commands.add_parser(name, help=summary)
        command.add_argument("--config", type=Path, help="JSON scenario document")
        command.add_argument("--out", type=Path, help="result file (.csv or .json)")
        command.add_argument("--format", choices=("csv", "json"), help="result file format")
        command.add_argument("--grid", help="start:stop:points, e.g. 680THz:700THz:201")
    return parser


def load_config(args: argparse.Namespace) -> ScenarioConfig:
    text = ""
    if args.config is not None:
        try:
            text = args.config.read_text(encoding="utf-8")
        except OSError as exc:
            raise ConfigError(f"--config: cannot read {args.config}: {exc.strerror or exc}") from exc
    cfg = parse_config(text)
    changes: dict[str, object] = {"scenario": args.command}
    if args.grid:
        changes["grid"] = parse_grid(args.grid).model_dump()
    return update_config(cfg, **changes)


def run_command(args: argparse.Namespace, app_settings: Settings = settings) -> Path:
    cfg = load_config(args)
    table = run_scenario(cfg, app_settings)
    target = args.out or cfg.output.path
    fmt = args.format or (cfg.output.format if args.out is None else None)
    if target is None:
        fmt = fmt or "csv"
        target = app_settings.resolved_output_dir / (
            f"{cfg.scenario}-{parameter_hash(cfg)[:12]}.{fmt}"
        )
    return write_output(table, target, resolve_format(Path(target), fmt))


def main(argv: list[str] | None = None) -> int:
    configure_logging(settings.log_level)
    args = build_parser().parse_args(argv)
    try:
        path = run_command(args)
    except ConfigError as exc:
        logger.error("configuration error: %s", exc)
        return EXIT_CONFIG
    except SolverError as exc:
        logger.error("solver error: %s %s", exc, " ".join(getattr(exc, "__notes__", [])))
        return EXIT_SOLVER
    except OSError as exc:
        logger.error("output error: %s", exc)
        return EXIT_OUTPUT
    except ValueError as exc:
        logger.error("configuration error: %s", exc)
        return EXIT_CONFIG
    print(path)
    return EXIT_OK


if __name__ == "__main__":
    raise SystemExit(main())
