import json

import pytest

from freysieve.cases import FEASIBLE, available_cases, case_from_dict, load_case
from freysieve.errors import InvalidInput, InvariantViolation, ParseError, UnhandledCase


def test_bundled_cases_load():
    names = available_cases()
    assert {"d5", "d7", "d11", "d13", "d15", "d19"} <= set(names)
    for name in names:
        case = load_case(name)
        assert case.d == int(name[1:])


def test_case_lookup():
    assert load_case("7").d == 7
    with pytest.raises(InvalidInput):
        load_case("d999")


def test_sieve_config_per_level(d7_case):
    cfg = d7_case.sieve_config(294)
    assert (cfg.d, cfg.chi_order, cfg.ell_list, cfg.p_min) == (7, 2, (11, 23), 7)
    assert [c.name for c in d7_case.candidates_for("294/1")] == ["d7I"]
    assert d7_case.candidates_for("294/2") == []


def test_unfeasible_case_refuses_to_sieve():
    case = load_case("d10")
    assert case.status != FEASIBLE
    with pytest.raises(UnhandledCase):
        case.sieve_config(172800)


def test_case_file_by_path(tmp_path, d7_case):
    raw = d7_case.to_dict()
    path = tmp_path / "custom.json"
    path.write_text(json.dumps(raw))
    assert load_case(str(path)).to_dict() == raw


def test_malformed_case_files(tmp_path):
    base = {"d": 7, "levels": [294], "nebentypus": {"order": 2, "conductor": 21}}
    with pytest.raises(ParseError):
        case_from_dict({"d": 7, "levels": [294]})
    with pytest.raises(ParseError):
        case_from_dict({**base, "status": "maybe"})
    with pytest.raises(InvariantViolation):
        case_from_dict({**base, "levels": [296]})
    with pytest.raises(InvariantViolation):
        case_from_dict({**base, "form_candidates": {"294/1": ["nobody"]}})

    broken = tmp_path / "broken.json"
    broken.write_text("{\n  \"d\": 7,\n")
    with pytest.raises(ParseError) as info:
        load_case(str(broken))
    assert info.value.line is not None
