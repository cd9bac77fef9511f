import json

from click.testing import CliRunner

from freysieve.cli import cli
from freysieve.formats import detach
from conftest import D2_TABLE, D7_NEWFORMS
from test_pipeline import D7_STATEMENT


def invoke(*args):
    return CliRunner().invoke(cli, list(args), obj={})


def invoke_json(*args):
    result = invoke("--output", "json", *args)
    assert result.exit_code == 0, result.output
    return json.loads(result.output)


def test_verify():
    body = invoke_json("verify", "181", "1", "2", "7", "15")
    assert body["primitive"] and body["nontrivial"]
    text = invoke("verify", "181", "1", "2", "7", "15")
    assert text.exit_code == 0 and "✅" in text.output


def test_invalid_input_exit_code():
    result = invoke("verify", "1", "1", "1", "7", "3")
    assert result.exit_code == 2
    assert "Error:" in result.output


def test_frey_discriminant_agrees():
    assert invoke_json("frey", "3", "2", "7")["disc_agrees"] is True


def test_multifrey_invariants():
    body = invoke_json("multifrey", "5", "1", "2")
    assert (body["c4"], body["c6"]) == ("-288", "-17280")


def test_cm_check():
    assert invoke_json("cm-check", "5", "1", "2")["verdict"] == "special-d2-CM"
    rejected = invoke("cm-check", "22", "2", "11")
    assert rejected.exit_code == 2 and "not primitive" in rejected.output


def test_granville():
    body = invoke_json("granville", "2", "1", "7", "5")
    assert body["gcd"] == str(11 ** 4)
    assert body["primitive"] is False


def test_symplectic_conditions():
    body = invoke_json("symplectic", "--condition", "tied:26", "--condition", "tied:78")
    assert body["exclusion"]["modulus"] == 12
    assert body["exclusion"]["excluded_classes"] == [5, 7]
    assert body["statement"] == "p ≡ 5,7 (mod 12)"


def test_symplectic_alternatives_and_case():
    alternatives = invoke_json("symplectic", "--alternative", "tied:-6,tied:-2,tied:1",
                               "--alternative", "tied:-3,tied:-1,tied:1")
    from_case = invoke_json("symplectic", "--case", "d15", "--candidate", "E1", "--candidate", "E6")
    assert alternatives["exclusion"] == from_case["exclusion"]
    assert from_case["exclusion"]["excluded_classes"] == [5, 7, 17, 19, 23]
    assert from_case["exclusion"]["modulus"] == 24


def test_symplectic_without_conditions():
    assert invoke("symplectic").exit_code == 2


def test_torsion3():
    body = invoke_json("torsion3", "--case", "d5", "--curve", "E13")
    assert (body["status"], body["norm"], body["trace"]) == ("witness", 43, 1)
    assert invoke("torsion3", "--case", "d5", "--curve", "nope").exit_code == 2


def test_torsion3_exit_codes():
    short = invoke("torsion3", "--case", "d5", "--curve", "E13", "--scan-limit", "3")
    assert short.exit_code == 3
    assert "Error:" in short.output
    with_point = invoke("torsion3", "--case", "d7", "--curve", "d7II-1")
    assert with_point.exit_code == 0
    assert "3-torsion-point" in with_point.output


def test_mazur():
    body = invoke_json("mazur", "--newforms", str(D7_NEWFORMS), "--case", "d7", "--label", "294/2")
    assert [r["verdict"] for r in body["results"]] == ["eliminated"]


def test_multifrey_search():
    body = invoke_json("multifrey-search", "2", "--table", str(D2_TABLE))
    assert body["bound"] == 3 and body["conclusion"] == "p <= 3"
    assert [h["label"] for h in body["hits"]] == ["1152.r2"]
    assert invoke_json("multifrey-search", "13")["conclusion"] == "impossible"


def test_missing_external_data_exit_code():
    assert invoke("multifrey-search", "7").exit_code == 4
    assert invoke("--offline", "multifrey-search", "7", "--fetch").exit_code == 4
    assert invoke("ellenberg", "7").exit_code == 4


def test_ellenberg_e4():
    body = invoke_json("--precision", "40", "ellenberg", "--e4", "23", "7")
    assert body["precision"] == 40
    assert float(body["E4"]) != 0.0
    assert invoke("--precision", "20", "ellenberg", "--e4", "23", "7").exit_code == 2


def test_pipeline_writes_envelope(tmp_path):
    out = tmp_path / "report.json"
    body = invoke_json("pipeline", "--case", "d7", "--newforms", str(D7_NEWFORMS), "--report-out", str(out))
    assert body["conclusion"]["statement"] == D7_STATEMENT
    saved = json.loads(out.read_text())
    assert {"started_at", "finished_at", "history", "report"} <= set(saved)
    assert detach(saved) == body


def test_pipeline_unfeasible_case():
    result = invoke("pipeline", "--case", "d10", "--newforms", str(D7_NEWFORMS))
    assert result.exit_code == 2


def test_config_file(tmp_path, monkeypatch):
    monkeypatch.setenv("FREYSIEVE_OFFLINE", "0")
    env = tmp_path / "freysieve.env"
    env.write_text("FREYSIEVE_OFFLINE=1\n")
    result = invoke("--config", str(env), "multifrey-search", "7", "--fetch")
    assert result.exit_code == 4
    assert invoke("--config", str(tmp_path / "missing.env"), "verify", "1", "0", "1", "7", "2").exit_code == 2
