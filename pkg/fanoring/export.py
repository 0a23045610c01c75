from __future__ import annotations

import csv
import io
import json
import logging
from pathlib import Path

import numpy as np

from fanoring.models import OutputFormat, ResultTable


# Export

logger = logging.getLogger(__name__)

HEADER = ("omega_rad_s", "re", "im")


def resolve_format(path: Path, fmt: OutputFormat | None = None) -> OutputFormat:
    if fmt is not None:
        return fmt
    return "json" if path.suffix.lower() == ".json" else "csv"


def render(table: ResultTable, fmt: OutputFormat) -> str:
    if fmt == "json":
        return json.dumps(
            {"meta": table.meta, "rows": [list(row) for row in table.rows()]},
            indent=2,
        ) + "\n"
    buffer = io.StringIO()
    for key, value in table.meta.items():
        buffer.write(f"# {key}: {value}\n")
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(HEADER)
    for row in table.rows():
        writer.writerow(f"{value:.17g}" for value in row)
    return buffer.getvalue()


def write_output(
    table: ResultTable,
    path: str | Path,
    fmt: OutputFormat | None = None,
) -> Path:
    """Write ``table`` as CSV (``#`` metadata lines) or JSON ``{meta, rows}``."""
    target = Path(path).expanduser()
    text = render(table, resolve_format(target, fmt))
    try:
        target.parent.mkdir(parents=True, exist_ok=True)
        target.write_text(text, encoding="utf-8")
    except OSError as exc:
        raise OSError(f"could not write results to {target}: {exc.strerror or exc}") from exc
    logger.info("wrote rows=%d path=%s", len(table), target)
    return target


def read_output(path: str | Path) -> ResultTable:
    source = Path(path).expanduser()
    try:
        text = source.read_text(encoding="utf-8")
    except OSError as exc:
        raise OSError(f"could not read results from {source}: {exc.strerror or exc}") from exc

    if resolve_format(source) == "json":
        document = json.loads(text)
        rows = np.array(document["rows"], dtype=float).reshape(-1, 3)
        return ResultTable(
            meta=document["meta"],
            omega=rows[:, 0],
            values=rows[:, 1] + 1j * rows[:, 2],
        )

    meta: dict[str, str | int] = {}
    body = []
    for line in text.splitlines():
        if line.startswith("#"):
            key, _, value = line[1:].partition(":")
            value = value.strip()
            meta[key.strip()] = int(value) if value.isdigit() else value
        elif line.strip():
            body.append(line)
    reader = csv.reader(body)
    if tuple(next(reader, HEADER)) != HEADER:
        raise ValueError(f"{source} does not start with the header {','.join(HEADER)}")
    rows = np.array([[float(cell) for cell in row] for row in reader], dtype=float).reshape(-1, 3)
    return ResultTable(meta=meta, omega=rows[:, 0], values=rows[:, 1] + 1j * rows[:, 2])
