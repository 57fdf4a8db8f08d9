import csv
import io
import json
import shutil

import pytest

from qbc.cli import main
from qbc.suites import fixtures_dir

FIX = fixtures_dir()


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_concealing_table(capsys):
    code, out, _ = run(capsys, "concealing", "1", "3", "25", "--format", "json")
    assert code == 0
    rows = json.loads(out)["rows"]
    assert rows[0]["closed_form"] == 1.0 and rows[0]["lower"] is None
    assert rows[1]["closed_form"] == 0.75
    assert rows[2]["inside_bounds"] is True


def test_concealing_pretty_marks_missing_bounds(capsys):
    code, out, _ = run(capsys, "concealing", "1")
    assert code == 0
    assert "N/A" in out


def test_concealing_even_n_is_usage_error(capsys):
    code, _, err = run(capsys, "concealing", "4")
    assert code == 2
    assert "odd" in err


def test_concealing_bad_lambda(capsys):
    assert run(capsys, "concealing", "3", "--lambda-plus", "1.5")[0] == 2


def test_concealing_csv(capsys):
    code, out, _ = run(capsys, "concealing", "3", "--format", "csv")
    rows = list(csv.DictReader(io.StringIO(out)))
    assert list(rows[0].keys()) == ["protocol", "params", "metric", "estimate", "stderr", "prediction", "z"]


def test_cheat_permutation(capsys):
    code, out, _ = run(capsys, "cheat", str(FIX / "permutation.json"), "--format", "json")
    assert code == 0
    report = json.loads(out)
    assert report["p_cheat"] == 1.0
    assert report["fidelity"] == 1.0


def test_cheat_identical(capsys):
    _, out, _ = run(capsys, "cheat", str(FIX / "identical.json"), "--format", "json")
    assert json.loads(out)["p_cheat"] == 1.0


def test_cheat_golden(capsys):
    _, out, _ = run(capsys, "cheat", str(FIX / "random_m3.json"), "--format", "json")
    golden = json.loads((FIX / "random_m3.golden.json").read_text())
    assert json.loads(out) == golden


def test_cheat_pretty_numbers_in_json(capsys):
    _, pretty, _ = run(capsys, "cheat", str(FIX / "random_m3.json"))
    _, js, _ = run(capsys, "cheat", str(FIX / "random_m3.json"), "--format", "json")
    report = json.loads(js)
    for key in ("fidelity", "p_cheat", "p_diag_formula", "helstrom"):
        assert key in pretty
        assert key in report


def test_cheat_invariant_violation(capsys, tmp_path):
    data = json.loads((FIX / "permutation.json").read_text())
    data["ensemble0"]["probs"] = [0.5, 0.4]
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps(data))
    code, _, err = run(capsys, "cheat", str(bad))
    assert code == 3
    assert "ensemble.prob_sum" in err


def test_cheat_parse_error(capsys, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert run(capsys, "cheat", str(bad))[0] == 2


def test_simulate_bundled_spec(capsys, tmp_path):
    spec = json.loads((FIX / "qbcp3m_n3.json").read_text())
    spec["trials"] = 3000
    path = tmp_path / "s.json"
    path.write_text(json.dumps(spec))
    code, out, _ = run(capsys, "simulate", str(path), "--format", "json", "--strict")
    assert code == 0
    report = json.loads(out)
    assert abs(report["agreement"]["babe_guess"]) < 3


def test_simulate_seed_determinism(capsys, tmp_path):
    spec = json.loads((FIX / "qbcp3m_n5.json").read_text())
    spec["trials"] = 200
    path = tmp_path / "s.json"
    path.write_text(json.dumps(spec))
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    assert run(capsys, "simulate", str(path), "--seed", "42", "--format", "json", "--out", str(a))[0] == 0
    assert run(capsys, "simulate", str(path), "--seed", "42", "--format", "json", "--out", str(b), "--threads", "2")[0] == 0
    assert a.read_bytes() == b.read_bytes()
    assert json.loads(a.read_text())["spec"]["master_seed"] == 42


def test_simulate_strict_passes_on_agreement(capsys, tmp_path):
    spec = {"protocol": {"kind": "QBCp3m", "n": 3}, "adam": "entangle_delay", "trials": 2000, "outputs": ["accept"]}
    path = tmp_path / "s.json"
    path.write_text(json.dumps(spec))
    assert run(capsys, "simulate", str(path), "--strict")[0] == 0


def test_simulate_strict_fails_on_disagreement(capsys, tmp_path, monkeypatch):
    import qbc.harness as harness

    monkeypatch.setattr(harness, "predictions_for", lambda spec: {"accept": harness.Prediction(0.9, "wrong on purpose")})
    spec = {"protocol": {"kind": "QBCp3m", "n": 3}, "adam": "entangle_delay", "trials": 2000, "outputs": ["accept"]}
    path = tmp_path / "s.json"
    path.write_text(json.dumps(spec))
    assert run(capsys, "simulate", str(path), "--strict")[0] == 4
    assert run(capsys, "simulate", str(path))[0] == 0


def test_simulate_unknown_strategy(capsys, tmp_path):
    path = tmp_path / "s.json"
    path.write_text(json.dumps({"protocol": {"kind": "QBCp3m", "n": 3}, "adam": "wizard"}))
    assert run(capsys, "simulate", str(path))[0] == 2


def test_simulate_appendix_b(capsys):
    code, out, _ = run(capsys, "simulate", str(FIX / "appendix_b.json"), "--format", "json")
    assert code == 0
    assert all(json.loads(out)["checks"].values())


def test_simulate_csv(capsys, tmp_path):
    spec = json.loads((FIX / "qbc3m2_m3_n5.json").read_text())
    spec["trials"] = 100
    path = tmp_path / "s.json"
    path.write_text(json.dumps(spec))
    code, out, _ = run(capsys, "simulate", str(path), "--format", "csv")
    assert out.splitlines()[0] == "protocol,params,metric,estimate,stderr,prediction,z"


def test_verify_filter(capsys):
    code, out, _ = run(capsys, "verify", "--filter", "cheat")
    assert code == 0
    assert out.startswith("cheat:")
    assert "protocols" not in out


def test_verify_unknown_filter(capsys):
    assert run(capsys, "verify", "--filter", "nothing")[0] == 2


def test_verify_corrupted_fixture(capsys, tmp_path):
    for f in FIX.glob("*.json"):
        shutil.copy(f, tmp_path / f.name)
    data = json.loads((tmp_path / "permutation.json").read_text())
    data["ensemble1"]["probs"] = [0.5, 0.4]
    (tmp_path / "permutation.json").write_text(json.dumps(data))
    code, _, err = run(capsys, "verify", "--fixtures", str(tmp_path), "--filter", "cheat")
    assert code == 3
    assert "ensemble.prob_sum" in err


@pytest.mark.slow
def test_verify_all(capsys):
    code, out, _ = run(capsys, "verify")
    assert code == 0
    assert len(out.strip().splitlines()) == 5


def test_usage_errors_exit_2(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["nonsense"])
    assert exc.value.code == 2
    with pytest.raises(SystemExit) as exc:
        main(["concealing", "3", "--format", "xml"])
    assert exc.value.code == 2
