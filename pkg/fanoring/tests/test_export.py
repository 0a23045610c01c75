import json

import numpy as np
import pytest

from fanoring.export import HEADER, read_output, render, resolve_format, write_output
from fanoring.models import ResultTable


def table() -> ResultTable:
    return ResultTable(
        meta={"scenario": "qd-ring", "units": "omega=rad/s value=dimensionless", "points": 3},
        omega=np.array([4.27e15, 4.2711e15, 4.2722222222222223e15]),
        values=np.array([1.0 + 0.1j, -0.123456789012345678 + 2e-9j, 1 / 3 - 1j / 7]),
    )


def test_empty_table_is_a_header_only_csv():
    empty = ResultTable(meta={}, omega=np.array([]), values=np.array([]))

    assert render(empty, "csv") == ",".join(HEADER) + "\n"


def test_csv_keeps_metadata_as_comment_lines():
    text = render(table(), "csv")

    assert text.splitlines()[:4] == [
        "# scenario: qd-ring",
        "# units: omega=rad/s value=dimensionless",
        "# points: 3",
        "omega_rad_s,re,im",
    ]


def test_csv_round_trip_is_exact(tmp_path):
    original = table()

    loaded = read_output(write_output(original, tmp_path / "run.csv"))

    np.testing.assert_array_equal(loaded.omega, original.omega)
    np.testing.assert_array_equal(loaded.values, original.values)
    assert loaded.meta == original.meta


def test_json_and_csv_hold_the_same_rows(tmp_path):
    as_json = read_output(write_output(table(), tmp_path / "run.json"))
    as_csv = read_output(write_output(table(), tmp_path / "run.csv"))

    document = json.loads((tmp_path / "run.json").read_text())
    assert set(document) == {"meta", "rows"}
    np.testing.assert_array_equal(as_json.values, as_csv.values)
    assert as_json.meta == as_csv.meta


def test_explicit_format_beats_the_suffix(tmp_path):
    path = write_output(table(), tmp_path / "run.txt", "json")

    assert json.loads(path.read_text())["meta"]["points"] == 3
    assert resolve_format(path) == "csv"


def test_missing_parent_directories_are_created(tmp_path):
    path = write_output(table(), tmp_path / "results" / "nested" / "run.csv")

    assert path.exists()


def test_unwritable_target_names_the_path(tmp_path):
    blocker = tmp_path / "taken"
    blocker.write_text("")

    with pytest.raises(OSError, match="could not write results to"):
        write_output(table(), blocker / "run.csv")


def test_csv_without_the_header_is_rejected(tmp_path):
    path = tmp_path / "broken.csv"
    path.write_text("# scenario: bare-ring\nfrequency,value\n1,2\n")

    with pytest.raises(ValueError, match="header"):
        read_output(path)


def test_non_finite_rows_are_refused():
    with pytest.raises(ValueError, match="finite"):
        ResultTable(meta={}, omega=np.array([1.0]), values=np.array([np.nan]))
