import json
import math

import pytest

from conftest import DATA
from occupation_ld.cli import main


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


def test_rate_all_on_reversible_generator(capsys):
    code, out, _ = run(capsys, "rate", DATA / "two_state_continuous.json", DATA / "mu_skewed.json",
                       "--route", "all", "--h", "0.001")
    assert code == 0
    doc = json.loads(out)
    vals = {r["route"]: r["value"] for r in doc["records"]}
    assert vals["variational-continuous"] == pytest.approx(0.4, abs=1e-8)
    assert vals["spectral"] == pytest.approx(0.4, abs=1e-8)
    assert vals["contraction"] == pytest.approx(0.4, abs=1e-5)
    assert all(d < 1e-5 for d in doc["deltas"].values())


def test_rate_discrete_marks_spectral_informational(capsys):
    code, out, _ = run(capsys, "rate", DATA / "two_state_discrete.json", DATA / "mu_point_s0.json")
    doc = json.loads(out)
    spectral = next(r for r in doc["records"] if r["route"] == "spectral")
    assert spectral["informational"] is True
    assert list(doc["deltas"]) == ["variational-discrete vs contraction"]
    assert doc["deltas"]["variational-discrete vs contraction"] < 1e-9
    contraction = next(r for r in doc["records"] if r["route"] == "contraction")
    assert contraction["kernel"][0][0] == pytest.approx(1.0)


def test_rate_not_abs_continuous_is_inf_everywhere(capsys):
    code, out, _ = run(capsys, "rate", DATA / "isolated_point.json", DATA / "mu_theta.json")
    assert code == 0
    assert [r["value"] for r in json.loads(out)["records"]] == ["+inf"] * 3


def test_spectral_on_nonreversible_exits_3(capsys, tmp_path):
    mu = tmp_path / "mu.json"
    mu.write_text('{"mu": [0.5, 0.3, 0.2]}')
    code, _, err = run(capsys, "rate", DATA / "cycle_nonreversible.json", mu, "--route", "spectral")
    assert code == 3 and "(a, b)" in err
    code, out, _ = run(capsys, "rate", DATA / "cycle_nonreversible.json", mu, "--route", "all")
    assert code == 0
    assert "not_applicable" in next(r for r in json.loads(out)["records"] if r["route"] == "spectral")


def test_invalid_inputs_exit_2(capsys, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text('{"kind": "discrete", "matrix": [[0.5, 0.4], [0.5, 0.5]], "m": [1, 1]}')
    code, _, err = run(capsys, "rate", bad, DATA / "mu_skewed.json")
    assert code == 2 and "row 0" in err
    code, _, _ = run(capsys, "rate", DATA / "two_state_discrete.json", tmp_path / "none.json")
    assert code == 2
    with pytest.raises(SystemExit) as exc:
        main(["rate"])
    assert exc.value.code == 2


def test_audit_isolated_point(capsys, tmp_path):
    code, out, _ = run(capsys, "audit", DATA / "exp_isolated_point.json", "--exact", "--out", tmp_path)
    assert code == 0
    doc = json.loads((tmp_path / "audit.json").read_text())
    assert doc == json.loads(out)
    assert doc["thin_set"] == ["theta"]
    failing = [s["start"] for s in doc["starts"] if s["upper_I"] == "fail"]
    assert failing == ["theta"]
    assert doc["verdicts"]["upper_I"] == "pass"
    lines = (tmp_path / "audit.csv").read_text().splitlines()
    assert lines[0] == "start,n,p_n,std_error,method"
    assert len(lines) == 1 + 6 * 4


def test_audit_exact_vs_mc(capsys, tmp_path):
    run(capsys, "audit", DATA / "exp_moderate.json", "--exact", "--out", tmp_path / "e")
    run(capsys, "audit", DATA / "exp_moderate.json", "--mc", "--trials", "20000", "--seed", "3",
        "--out", tmp_path / "m")

    def rows(d):
        lines = (d / "audit.csv").read_text().splitlines()[1:]
        return {(r.split(",")[0], r.split(",")[1]): r.split(",") for r in lines}

    exact, mc = rows(tmp_path / "e"), rows(tmp_path / "m")
    assert exact.keys() == mc.keys()
    for key in exact:
        p, q, se = float(exact[key][2]), float(mc[key][2]), float(mc[key][3])
        assert abs(p - q) <= 4 * se


def test_audit_exact_on_general_neighborhood_exits_4(capsys, tmp_path):
    code, _, err = run(capsys, "audit", DATA / "exp_two_functions.json", "--exact", "--out", tmp_path)
    assert code == 4 and "indicator" in err
    code, _, _ = run(capsys, "audit", DATA / "exp_two_functions.json", "--mc", "--trials", "500",
                     "--out", tmp_path)
    assert code in (0, 1)


def test_audit_threshold(capsys, tmp_path):
    code, out, _ = run(capsys, "audit", DATA / "exp_threshold.json", "--exact", "--out", tmp_path)
    doc = json.loads(out)
    assert code == 0 and doc["verdicts"] == {"upper": "pass", "lower": "pass"}
    assert all(abs(s["slope"] + doc["rate"]) <= 0.1 * doc["rate"] for s in doc["starts"])


def test_check_all_on_reversible(capsys):
    code, out, _ = run(capsys, "check", DATA / "birth_death.json", "--suite", "all")
    doc = json.loads(out)
    assert code == 0 and doc["failed"] == 0
    names = {c["check"] for c in doc["checks"]}
    assert {"fk_identity", "tilted_invariance", "tilted_contraction", "skeleton_rate_limit",
            "skeleton_dirichlet"} <= names
    rows = doc["tables"]["limits"]["rows"]
    assert [r["h"] for r in rows] == [0.2, 0.1, 0.05, 0.025]


def test_check_tilt_on_nonreversible(capsys):
    code, out, _ = run(capsys, "check", DATA / "cycle_nonreversible.json", "--suite", "tilt")
    doc = json.loads(out)
    assert code == 0
    assert all(c["status"] == "not-applicable" for c in doc["checks"])


def test_check_suite_alias_and_discrete(capsys):
    code, out, _ = run(capsys, "check", DATA / "birth_death.json", "--suite", "lemma57",
                       "--measure", DATA / "mu_birth_death.json")
    assert code == 0 and json.loads(out)["suite"] == "dirichlet"
    code, _, err = run(capsys, "check", DATA / "two_state_discrete.json")
    assert code == 3


def test_check_fk_monte_carlo(capsys):
    code, out, _ = run(capsys, "check", DATA / "birth_death.json", "--suite", "fk", "--trials", "20000",
                       "--tilts", "1")
    doc = json.loads(out)
    mc = [c for c in doc["checks"] if c["check"] == "fk_monte_carlo"]
    assert code == 0 and len(mc) == 1 and mc[0]["pass"]
    assert math.isfinite(mc[0]["estimate"])
