from dataclasses import replace

import pytest

from freysieve.cases import load_case
from freysieve.errors import UnhandledCase
from freysieve.formats import load_newforms
from freysieve.pipeline import CONDITIONAL, INCOMPLETE, RESTRICTED, run_pipeline
from freysieve.sieve import CM_FLAGGED, ELIMINATED
from conftest import D19_NEWFORMS

D7_STATEMENT = "no non-trivial solutions for p ≥ 337, p ≡ 5,7 (mod 12)"


def test_d7_end_to_end(d7_case, d7_forms):
    result = run_pipeline(d7_case, d7_forms)
    conclusion = result.conclusion
    assert conclusion.statement == D7_STATEMENT
    assert conclusion.status == CONDITIONAL
    assert conclusion.threshold == 337
    assert conclusion.bounds["multifrey"] == {"bound": 7, "provenance": "published"}

    verdicts = {r.label: r.verdict for r in result.reports}
    assert [r.label for r in result.reports] == [f.label for f in d7_forms]
    assert {label for label, v in verdicts.items() if v == RESTRICTED} == {"294/1", "2646/1", "2646/2", "2646/3"}
    assert {label for label, v in verdicts.items() if v == CM_FLAGGED} == {"588/1", "5292/1", "5292/2", "5292/3"}
    for r in result.reports:
        assert r.filters
        assert set(r.input_digests) == {"case", "form"}
        if r.verdict == ELIMINATED:
            assert r.p_bound == 7
    assert all(c["expected"] == c["found"] for c in conclusion.level_counts.values())


def test_workers_do_not_change_the_body(d7_case, d7_forms):
    serial = run_pipeline(d7_case, d7_forms, workers=1).to_dict()
    parallel = run_pipeline(d7_case, d7_forms, workers=4).to_dict()
    assert serial == parallel


def test_history_is_collected(d7_case, d7_forms):
    result = run_pipeline(d7_case, d7_forms[:2])
    stages = {h["stage"] for h in result.history}
    assert {"Pipeline", "Mazur", "Verdict"} <= stages
    assert "history" not in result.to_dict()


def test_empty_newform_list(d7_case):
    result = run_pipeline(d7_case, [])
    assert result.reports == [] and result.conclusion is None


def test_unfeasible_case():
    with pytest.raises(UnhandledCase):
        run_pipeline(load_case("d14"), [])


def test_missing_orbit_makes_the_case_incomplete(d7_case, d7_forms):
    result = run_pipeline(d7_case, [f for f in d7_forms if f.label != "588/2"])
    assert result.conclusion.status == INCOMPLETE
    assert result.conclusion.level_counts[588] == {"expected": 4, "found": 3}


def test_undiscarded_orbit_is_residual(d7_case, d7_forms):
    planted = {f.label: f for f in d7_forms}["294/1"]
    forms = [replace(f, a_map=planted.a_map, eps_map=planted.eps_map) if f.label == "294/2" else f
             for f in d7_forms]
    result = run_pipeline(d7_case, forms)
    assert result.conclusion.status == "inconclusive"
    assert result.conclusion.residual == ["294/2"]


def test_d19_counts_and_threshold():
    case = load_case("d19")
    result = run_pipeline(case, load_newforms(str(D19_NEWFORMS)))
    counts = result.conclusion.level_counts
    assert counts[4332] == {"expected": 10, "found": 10}
    assert counts[38988] == {"expected": 18, "found": 18}
    assert result.conclusion.threshold >= 1031
    assert result.conclusion.bounds["multifrey"]["provenance"] == "inertness"
