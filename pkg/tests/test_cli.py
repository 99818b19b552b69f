import json

import pytest

from logcrystal.cli import EXIT_INVARIANT, EXIT_OK, EXIT_PARSE, EXIT_PRECISION, main


def gen(tmp_path, name, *extra):
    out = tmp_path / f"{name}.json"
    assert main(["--command", "gen", "--out", str(out), *extra]) == EXIT_OK
    return out


def run(tmp_path, command, src, *extra):
    out = tmp_path / f"{command}-report.json"
    code = main(["--command", command, "--in", str(src), "--out", str(out), *extra])
    return code, json.loads(out.read_text())


def test_check_weight1(tmp_path):
    src = gen(tmp_path, "w1", "--seed", "3")
    code, rep = run(tmp_path, "check", src)
    assert code == EXIT_OK
    assert rep["result"]["ordinary"] is True


def test_check_broken_filtration(tmp_path):
    src = gen(tmp_path, "broken", "--kind", "broken")
    code, rep = run(tmp_path, "check", src)
    assert code == EXIT_INVARIANT
    assert "Phi e_0" in rep["result"]["axioms"]["p_divisibility"]["witness"]


def test_cancoord_and_periods(tmp_path):
    src = gen(tmp_path, "w1", "--seed", "1", "--vars", "2", "--precision", "5", "--trunc", "3")
    code, rep = run(tmp_path, "cancoord", src)
    assert code == EXIT_OK
    assert all(rep["result"]["dwork_integrality"])
    assert rep["result"]["precision"]["loss"] >= 0
    code, rep = run(tmp_path, "periods", src)
    assert code == EXIT_OK
    assert rep["result"]["neutral_hodge_equals_slope"]


def test_cy3_and_instanton(tmp_path):
    src = gen(tmp_path, "cy", "--kind", "cy3", "--seed", "2")
    code, rep = run(tmp_path, "cy3", src)
    assert code == EXIT_OK
    assert all(v["pass"] for v in rep["result"]["checks"].values())
    code, rep = run(tmp_path, "instanton", src)
    assert code == EXIT_OK
    table = rep["result"]["instantons"][0]
    assert table["ksv"] and table["integrality"]["ok"]
    assert table["expansion"]["eps"]


def test_parse_errors(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert main(["--command", "check", "--in", str(bad), "--out", str(tmp_path / "o.json")]) == EXIT_PARSE
    bad.write_text(json.dumps({"prime": 5}))
    assert main(["--command", "check", "--in", str(bad), "--out", str(tmp_path / "o.json")]) == EXIT_PARSE
    assert main(["--command", "gen", "--prime", "4", "--out", str(tmp_path / "o.json")]) == EXIT_PARSE
    assert main(["--command", "nope"]) == EXIT_PARSE


def test_precision_exhausted(tmp_path):
    src = gen(tmp_path, "low", "--precision", "2", "--trunc", "6", "--seed", "4")
    code, rep = run(tmp_path, "cancoord", src)
    assert code == EXIT_PRECISION
    assert "raise N" in rep["error"]


def test_non_weight1_input_is_invariant_failure(tmp_path):
    src = gen(tmp_path, "cy", "--kind", "cy3", "--seed", "2")
    code, rep = run(tmp_path, "cancoord", src)
    assert code == EXIT_INVARIANT
    assert "error" in rep["result"]


def test_sweep_and_determinism(tmp_path):
    a = gen(tmp_path, "a", "--prime", "3", "5", "7", "--precision", "4", "--trunc", "3", "--seed", "9")
    b = gen(tmp_path, "b", "--prime", "3", "5", "7", "--precision", "4", "--trunc", "3", "--seed", "9")
    assert a.read_text() == b.read_text()
    data = json.loads(a.read_text())
    assert [d["prime"] for d in data["sweep"]] == [3, 5, 7]
    code, rep = run(tmp_path, "check", a)
    assert code == EXIT_OK
    assert rep["result"]["verdicts"] == [0, 0, 0]


def test_stdout_output(capsys, tmp_path):
    src = gen(tmp_path, "w1")
    assert main(["--command", "check", "--in", str(src)]) == EXIT_OK
    assert json.loads(capsys.readouterr().out)["command"] == "check"
