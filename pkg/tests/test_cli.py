import json

import pytest

from qsplit.cli import main, resolve_tol
from qsplit.errors import ParameterOutOfRange, ParseError, ValidationError
from qsplit.scenario import fixture_generate, scenario_from_dict, scenario_parse


def run(*argv):
    return main(list(map(str, argv)))


def gen(tmp_path, kind, *extra):
    out = tmp_path / f"{kind}.json"
    assert run("gen", kind, "--out", out, *extra) == 0
    return out


def load(path):
    return json.loads(path.read_text())


@pytest.mark.parametrize("kind,seed", [("trivial", 0), ("amp2", 0), ("amp2", 3), ("fib", 0),
                                       ("fib", 5), ("amp3", 0)])
def test_gen_then_check(tmp_path, kind, seed):
    path = gen(tmp_path, kind, "--seed", seed)
    assert scenario_parse(path).to_json() == load(path)
    rep = tmp_path / "r.json"
    assert run("check", path, "--report", rep) == 0
    r = load(rep)
    assert r["pass"] and r["l"] == 0 and r["failing_levels"] == []


def test_amp2_report_dimension(tmp_path):
    path, rep = gen(tmp_path, "amp2"), tmp_path / "r.json"
    run("check", path, "--report", rep)
    dq = load(rep)["dq"]
    assert all(abs(row["d"][0] - 4) < 1e-12 and row["classification"] == "non-degenerate"
               for row in dq)


def test_forced_l2_check_and_split(tmp_path):
    path, rep = gen(tmp_path, "forced_l2"), tmp_path / "r.json"
    assert run("check", path, "--report", rep) == 0
    r = load(rep)
    assert r["l"] == 2 and r["failing_levels"] == [0, 1]
    assert run("split", path, "--report", rep) == 0
    c = load(rep)
    assert c["pass"] and c["l"] == 2 and "seconds" not in c


def test_expected_level_mismatch_fails(tmp_path):
    d = load(gen(tmp_path, "forced_l2"))
    d["expect"]["l"] = 1
    path, rep = tmp_path / "bad.json", tmp_path / "r.json"
    path.write_text(json.dumps(d))
    assert run("check", path, "--report", rep) == 1
    assert "expects 1" in load(rep)["message"]


def test_perturbed_everywhere_fails(tmp_path, capsys):
    d = load(gen(tmp_path, "amp2"))
    d["q_source"]["perturb"] = {"levels": [0, 1, 2, 3, 4], "factor": 1.01}
    path, rep = tmp_path / "bad.json", tmp_path / "r.json"
    path.write_text(json.dumps(d))
    assert run("check", path, "--report", rep) == 1
    r = load(rep)
    assert r["failing_levels"] == [0, 1, 2, 3, 4] and r["error"] == "NeverStable"
    assert "failing levels [0, 1, 2, 3, 4]" in capsys.readouterr().err


def test_reports_are_byte_stable(tmp_path):
    path = gen(tmp_path, "fib", "--seed", 2)
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    for cmd in ("check", "split"):
        run(cmd, path, "--report", a)
        run(cmd, path, "--report", b, "--jobs", 2)
        assert a.read_bytes() == b.read_bytes()


def test_explicit_round_trip(tmp_path):
    plain = gen(tmp_path, "fib", "--seed", 4)
    path = tmp_path / "explicit.json"
    assert run("gen", "fib", "--seed", 4, "--explicit", "--out", path) == 0
    assert load(path)["q_source"]["type"] == "explicit"
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    assert run("check", plain, "--report", a) == 0
    assert run("check", path, "--report", b) == 0
    ra, rb = load(a), load(b)
    assert ra["l"] == rb["l"] == 0
    for x, y in zip(ra["dq"], rb["dq"]):
        assert x["d"] == pytest.approx(y["d"], abs=1e-9)
    assert run("split", path, "--report", b) == 0


def test_split_with_smaller_depth(tmp_path):
    path, rep = gen(tmp_path, "amp2"), tmp_path / "r.json"
    assert run("split", path, "--depth", 2, "--report", rep) == 0
    assert load(rep)["depth"] == 2
    assert run("split", path, "--depth", 9) == 2


def test_zero_column_rejected(tmp_path, capsys):
    d = load(gen(tmp_path, "fib"))
    d["gammas"][1] = [[1, 0], [1, 0]]
    with pytest.raises(ValidationError, match="zero column in Γ_2"):
        scenario_from_dict(d)
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(d))
    assert run("check", path) == 2
    assert "zero column in Γ_2" in capsys.readouterr().err


def test_input_errors_exit_2(tmp_path):
    path = tmp_path / "broken.json"
    path.write_text('{"depth": 2,\n  "name": }')
    with pytest.raises(ParseError, match=":2:"):
        scenario_parse(path)
    assert run("check", path) == 2
    assert run("check", tmp_path / "missing.json") == 2
    assert run("gen", "amp7") == 2
    assert run("gen", "fib", "--depth", 6) == 2


@pytest.mark.parametrize("mutate,err", [
    (lambda d: d.pop("gammas"), ParseError),
    (lambda d: d.update(depth=0), ValidationError),
    (lambda d: d["gammas"][0].__setitem__(0, [-1, 1]), ValidationError),
    (lambda d: d["q_source"].update(type="magic"), ValidationError),
    (lambda d: d["categories"].pop(), ValidationError),
])
def test_validation(tmp_path, mutate, err):
    d = load(gen(tmp_path, "fib"))
    mutate(d)
    with pytest.raises(err):
        scenario_from_dict(d)


def test_generator_ranges():
    for bad in ("amp(4)", "amp0", "forced_l3", "nosuch"):
        with pytest.raises(ParameterOutOfRange):
            fixture_generate(bad)
    with pytest.raises(ParameterOutOfRange):
        fixture_generate("forced_l2", depth=2)
    assert fixture_generate("amp(2)").to_json() == fixture_generate("amp2").to_json()


def test_tolerance_precedence(tmp_path, monkeypatch):
    sc = scenario_parse(gen(tmp_path, "amp2"))
    sc.tolerances = {"eps_num": 1e-7}
    assert resolve_tol(None, sc).eps_num == 1e-7
    monkeypatch.setenv("QSPLIT_TOL", "1e-6")
    assert resolve_tol(None, sc).eps_num == 1e-6
    assert resolve_tol(1e-5, sc).eps_num == 1e-5
    monkeypatch.setenv("QSPLIT_TOL", "lots")
    with pytest.raises(ValidationError):
        resolve_tol(None, sc)


def test_loose_env_tolerance_accepts_small_perturbation(tmp_path, monkeypatch):
    d = load(gen(tmp_path, "amp2"))
    d["q_source"]["perturb"] = {"levels": [0, 1, 2, 3, 4], "factor": 1.0000001}
    path = tmp_path / "tiny.json"
    path.write_text(json.dumps(d))
    assert run("check", path) == 1
    monkeypatch.setenv("QSPLIT_TOL", "1e-5")
    assert run("check", path) == 0
