import json
import math

import pytest

from grushin_ricci.gh_lab import PROBE_COLUMNS, SWEEP_COLUMNS, TANGENT_COLUMNS
from grushin_ricci.report import emit_report, format_float, to_csv, to_json


def test_format_float_round_trips():
    for x in (0.1, 1.0 / 3.0, 2.0 ** -1074, 1e300, -0.0, 12.0, math.pi):
        s = format_float(x)
        assert float(s) == x
    assert format_float(1.0) == "1.0"
    assert format_float(math.nan) == "null" and format_float(math.inf) == "null"


def test_json_order_and_stability():
    payload = {"b": 1.0, "a": [1, 2.5, None, True], "c": {"z": "x", "y": math.nan}}
    text = to_json(payload)
    assert text == to_json(payload)
    assert text.index('"b"') < text.index('"a"') < text.index('"c"')
    back = json.loads(text)
    assert back["a"] == [1, 2.5, None, True] and back["c"]["y"] is None
    assert "\r" not in text and text.endswith("\n")


def test_csv_header_and_quoting():
    rows = [{"lambda": 1.0, "epsilon": 0.15, "net_size_A": 3, "net_size_B": 2,
             "distortion": 0.1, "gh_upper": 0.5, "gh_lower": 0.0}]
    text = to_csv(rows, SWEEP_COLUMNS)
    assert text.splitlines()[0] == "lambda,epsilon,net_size_A,net_size_B,distortion,gh_upper,gh_lower"
    assert to_csv([{"x": 'a,"b"'}], ["x"]).splitlines()[1] == '"a,""b"""'
    assert PROBE_COLUMNS == ("epsilon", "covering_number")
    assert TANGENT_COLUMNS == ("scale", "max_rel_err")


def test_emit_to_file_is_bit_stable(tmp_path):
    payload = {"claim": "C2", "min_lo": 0.75, "witness": {"r": 1.5707963267948966}}
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    emit_report(payload, "json", str(a))
    emit_report(payload, "json", str(b))
    assert a.read_bytes() == b.read_bytes()
    assert json.loads(a.read_text()) == payload


def test_emit_stdout(capsys):
    text = emit_report([{"epsilon": 0.1, "covering_number": 7}], "csv", columns=PROBE_COLUMNS)
    assert capsys.readouterr().out == text == "epsilon,covering_number\n0.10000000000000001,7\n"


def test_emit_errors(tmp_path):
    with pytest.raises(OSError, match="nope"):
        emit_report({"a": 1}, "json", str(tmp_path / "nope" / "x.json"))
    with pytest.raises(ValueError):
        emit_report({"a": 1}, "xml")
