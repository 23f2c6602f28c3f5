import json

import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from irka import IrkaConfig, ShiftSet, run_irka, synth_random_stable
from irka.errors import DimensionMismatch, ParseError, UnsupportedField
from irka.io import (
    build_report,
    dump_report,
    finite_or_token,
    load_system,
    read_history_csv,
    read_matrix_market,
    read_shift_file,
    write_history_csv,
    write_matrix_market,
    write_system,
)


def _write(path, text):
    path.write_text(text)
    return str(path)


def test_coordinate_general(tmp_path):
    p = _write(tmp_path / "a.mtx", "%%MatrixMarket matrix coordinate real general\n% note\n2 3 2\n1 1 1.5\n2 3 -2\n")
    np.testing.assert_array_equal(read_matrix_market(p), [[1.5, 0, 0], [0, 0, -2]])


def test_coordinate_symmetric_mirrored(tmp_path):
    p = _write(tmp_path / "s.mtx", "%%MatrixMarket matrix coordinate real symmetric\n2 2 2\n1 1 4\n2 1 7\n")
    np.testing.assert_array_equal(read_matrix_market(p), [[4, 7], [7, 0]])


def test_array_column_major(tmp_path):
    p = _write(tmp_path / "a.mtx", "%%MatrixMarket matrix array real general\n2 2\n1\n2\n3\n4\n")
    np.testing.assert_array_equal(read_matrix_market(p), [[1, 3], [2, 4]])


@pytest.mark.parametrize(
    "text, line",
    [
        ("%%MatrixMarket matrix coordinate real general\n2 2 1\n1 x 3\n", 3),
        ("%%MatrixMarket matrix coordinate real general\n2 2 1\n3 1 3\n", 3),
        ("%%MatrixMarket matrix coordinate real general\n2 2 2\n1 1 3\n", 3),
        ("%%MatrixMarket matrix array real general\n2 1\n1\nabc\n", 4),
        ("%%MatrixMarket vector coordinate real general\n", 1),
        ("%%MatrixMarket matrix coordinate real symmetric\n2 2 1\n1 2 5\n", 3),
    ],
)
def test_parse_errors_carry_line(tmp_path, text, line):
    p = _write(tmp_path / "bad.mtx", text)
    with pytest.raises(ParseError) as info:
        read_matrix_market(p)
    assert info.value.line == line
    assert str(info.value).startswith(f"line {line}:")


@pytest.mark.parametrize("field", ["complex", "pattern"])
def test_unsupported_fields(tmp_path, field):
    p = _write(tmp_path / "c.mtx", f"%%MatrixMarket matrix coordinate {field} general\n1 1 1\n1 1 1 0\n")
    with pytest.raises(UnsupportedField):
        read_matrix_market(p)


@given(arrays(np.float64, st.tuples(st.integers(1, 6), st.integers(1, 6)), elements=st.floats(-1e300, 1e300)))
def test_write_read_round_trip(tmp_path_factory, M):
    p = tmp_path_factory.mktemp("mm") / "m.mtx"
    write_matrix_market(p, M)
    np.testing.assert_array_equal(read_matrix_market(p), M)


def test_system_round_trip_and_dims(tmp_path):
    sys = synth_random_stable(7, 1)
    paths = write_system(sys, str(tmp_path / "sys"))
    back = load_system(*paths)
    np.testing.assert_array_equal(back.A, sys.A)
    np.testing.assert_array_equal(back.b, sys.b)
    write_matrix_market(tmp_path / "short.mtx", np.ones(6))
    with pytest.raises(DimensionMismatch):
        load_system(paths[0], str(tmp_path / "short.mtx"), paths[2])


def test_shift_file(tmp_path):
    p = tmp_path / "s.json"
    p.write_text(json.dumps([[1.0, 0.0], [2.0, 3.0], [2.0, -3.0]]))
    s = read_shift_file(str(p), r=3)
    assert s == ShiftSet([1.0], [2 + 3j])
    with pytest.raises(DimensionMismatch):
        read_shift_file(str(p), r=2)
    p.write_text(json.dumps([[2.0, 3.0], [2.0, -2.0]]))
    with pytest.raises(ParseError):
        read_shift_file(str(p))
    p.write_text('{"a": 1}')
    with pytest.raises(ParseError):
        read_shift_file(str(p))


def test_tokens():
    assert finite_or_token(float("inf")) == "inf"
    assert finite_or_token(-np.inf) == "-inf"
    assert finite_or_token(np.nan) == "nan"
    assert finite_or_token({"a": [1.5, np.float64(np.inf)], "b": np.True_}) == {"a": [1.5, "inf"], "b": True}


def test_report_and_csv_agree(tmp_path):
    sys = synth_random_stable(20, 2, "cdlike")
    cfg = IrkaConfig(r=4, max_iter=30)
    res = run_irka(sys, cfg)
    rep = build_report(res, cfg, {"a": "A", "b": "b", "c": "c"}, sys)
    out = tmp_path / "r.json"
    dump_report(rep, out)
    loaded = json.loads(out.read_text())
    assert loaded["iterations"] == len(res.history)
    assert loaded["status"] == str(res.status)

    csv_path = tmp_path / "h.csv"
    write_history_csv(res.history, csv_path)
    rows = read_history_csv(csv_path)
    assert len(rows) == len(loaded["history"])
    for row, rec in zip(rows, loaded["history"]):
        for key, val in row.items():
            stored = rec[key]
            if isinstance(stored, str):
                assert str(val) == stored or np.isnan(val) and stored == "nan"
            else:
                assert val == stored

    # the CSV can also be written from the report's history dictionaries
    again = tmp_path / "h2.csv"
    write_history_csv(loaded["history"], again)
    assert again.read_text() == csv_path.read_text()


def test_csv_header_checked(tmp_path):
    p = tmp_path / "h.csv"
    p.write_text("k,d\n0,1.0\n")
    with pytest.raises(ParseError):
        read_history_csv(p)
