import json
import math

from hypothesis import given, settings
from hypothesis import strategies as st

from specgate.report import (PLUS_INF, ReportRow, ScanReport, dumps, read_report, report_from_csv, report_to_csv,
                             write_report)


def sample_report():
    rows = [ReportRow((0, 0, 0), {"vstar": 1.0, "y_v": PLUS_INF, "ok": True}),
            ReportRow((1, 0, 0), {"vstar": 0.1 + 0.2, "y_v": -2.5, "ok": False})]
    return ScanReport(rows, {"command": "scan", "r": 0.25})


def test_empty_report(tmp_path):
    write_report(ScanReport([], {"command": "x"}), tmp_path / "e.json")
    obj = json.loads((tmp_path / "e.json").read_text())
    assert obj == {"meta": {"command": "x"}, "rows": []}


def test_inf_sentinel_is_a_string(tmp_path):
    write_report(sample_report(), tmp_path / "r.json")
    obj = json.loads((tmp_path / "r.json").read_text())
    assert obj["rows"][0]["stats"]["y_v"] == "inf"
    write_report(sample_report(), tmp_path / "r.csv", "csv")
    assert ",inf," in (tmp_path / "r.csv").read_text()


def test_seventeen_significant_digits():
    assert dumps(0.1 + 0.2) == "0.30000000000000004"
    assert dumps(1.0) == "1.0"
    assert dumps(math.inf) == '"inf"'


def test_round_trip_json_and_csv(tmp_path):
    rep = sample_report()
    for fmt in ("json", "csv"):
        path = tmp_path / f"r.{fmt}"
        write_report(rep, path, fmt)
        assert read_report(path) == rep


def test_csv_columns():
    text = report_to_csv(sample_report())
    lines = text.splitlines()
    assert lines[0].startswith("# meta: ")
    assert lines[1] == "step,y,vstar,y_v,ok"
    assert lines[2].startswith("0,0;0;0,1.0,inf,true")


@settings(max_examples=100, deadline=None)
@given(st.lists(st.tuples(st.tuples(st.integers(-9, 9), st.integers(-9, 9)),
                          st.floats(allow_nan=False, allow_infinity=False)), max_size=6))
def test_csv_round_trip_property(entries):
    rep = ScanReport([ReportRow(loc, {"x": v}) for loc, v in entries], {"k": 1})
    assert report_from_csv(report_to_csv(rep)) == rep
    assert ScanReport.from_obj(json.loads(dumps(rep.to_obj()))) == rep
