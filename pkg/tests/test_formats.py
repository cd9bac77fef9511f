import json

import pytest

from freysieve.errors import InvalidInput, InvariantViolation, ParseError, SchemaMismatch
from freysieve.formats import (
    CurveRow, SieveReport, canonical_json, detach, dump_curve_table, dump_newforms, envelope,
    load_curve_table, parse_curve_table, parse_newforms, write_atomic,
)
from conftest import D2_TABLE, D7_NEWFORMS, D19_NEWFORMS

RECORD = {"label": "x/1", "level": 294, "char_order": 2, "field_poly": [1, 0, -2],
          "a": {"11": [0, 2]}, "eps": {"11": [-1, 0]}}


def line(**changes):
    return json.dumps({**RECORD, **changes})


def test_bundled_newform_files():
    d7 = parse_newforms(D7_NEWFORMS.read_text())
    d19 = parse_newforms(D19_NEWFORMS.read_text())
    assert len(d7) == 19
    assert sorted({f.level for f in d7}) == [294, 588, 2646, 5292]
    assert [sum(f.level == N for f in d19) for N in (4332, 38988)] == [10, 18]


def test_newform_file_survives_a_dump():
    forms = parse_newforms(D7_NEWFORMS.read_text())
    assert parse_newforms(dump_newforms(forms)) == forms


def test_comments_and_blank_lines_are_skipped():
    forms = parse_newforms("# header\n\n" + line() + "\n")
    assert [f.label for f in forms] == ["x/1"]
    assert forms[0].a_map[11].coords[1] == 2


def test_parse_errors_point_at_the_line():
    with pytest.raises(ParseError) as info:
        parse_newforms(line() + "\n{not json\n")
    assert info.value.line == 2

    record = dict(RECORD)
    del record["level"]
    with pytest.raises(ParseError) as info:
        parse_newforms(json.dumps(record))
    assert info.value.field == "level"

    with pytest.raises(ParseError):
        parse_newforms(line(field_poly=[2, 0, -2]))


def test_duplicate_labels():
    with pytest.raises(ParseError) as info:
        parse_newforms(line() + "\n" + line() + "\n")
    assert info.value.line == 2 and info.value.field == "label"


def test_invariant_violations():
    with pytest.raises(InvariantViolation):
        parse_newforms(line(eps={"11": [2, 0]}))
    with pytest.raises(InvariantViolation):
        parse_newforms(line(a={"11": [7, 0]}))


def test_curve_row_recomputes_invariants():
    row = CurveRow.from_ainvs("1152.r2", 1152, [0, 0, 0, 6, 20], {"c4": -288})
    assert (row.c4, row.c6, row.disc) == (-288, -17280, -186624)
    with pytest.raises(SchemaMismatch):
        CurveRow.from_ainvs("1152.r2", 1152, [0, 0, 0, 6, 20], {"c4": -289})
    with pytest.raises(SchemaMismatch):
        CurveRow.from_ainvs("sing", 1, [0, 0, 0, 0, 0])


def test_curve_table_parsing():
    table = load_curve_table(str(D2_TABLE))
    assert table.covers(1152) and not table.covers(1153)
    assert "1152.r2" in {r.label for r in table.rows}
    again = parse_curve_table(dump_curve_table(table))
    assert again.fingerprint() == table.fingerprint()


def test_curve_table_errors():
    header = "label,conductor,a1,a2,a3,a4,a6\n"
    with pytest.raises(ParseError) as info:
        parse_curve_table("# source: t\n" + header + "1152.r2,1152,0,0,0,six,20\n")
    assert info.value.line == 3 and info.value.field == "a4"
    with pytest.raises(ParseError):
        parse_curve_table("label,conductor\n")
    with pytest.raises(SchemaMismatch):
        parse_curve_table("label,conductor,a1,a2,a3,a4,a6,c4\n1152.r2,1152,0,0,0,6,20,1\n")
    with pytest.raises(InvalidInput):
        load_curve_table("/nonexistent/table.csv")


def test_curve_table_filter_and_merge():
    table = load_curve_table(str(D2_TABLE), conductors=[1152])
    assert table.conductors == [1152]
    capped = parse_curve_table("# coverage-max: 100\nlabel,conductor,a1,a2,a3,a4,a6\n")
    merged = table.merge(capped)
    assert merged.covers(1152) and merged.covers(99) and not merged.covers(101)


def test_report_needs_a_witness():
    with pytest.raises(InvariantViolation):
        SieveReport("x/1", 294, "eliminated", [], ())
    report = SieveReport("x/1", 294, "eliminated", [2, 3], ({"filter": "mazur", "p_min": 7},), p_bound=7)
    assert SieveReport.from_dict(report.to_dict()) == report
    with pytest.raises(SchemaMismatch):
        SieveReport.from_dict({"label": "x/1"})


def test_envelope_and_atomic_write(tmp_path):
    body = {"b": 1, "a": [1, 2]}
    wrapped = envelope(body, [{"stage": "Pipeline", "message": "done"}])
    assert detach(wrapped) == body
    target = tmp_path / "out" / "report.json"
    write_atomic(str(target), canonical_json(wrapped))
    assert json.loads(target.read_text()) == wrapped
    assert list(target.parent.iterdir()) == [target]
