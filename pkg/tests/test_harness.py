import csv
import json

import numpy as np
import pytest

import oracles
from permclass import harness
from permclass.analytic import ClassSpec
from permclass.cli import main
from permclass.perm import Permutation, perm_code
from permclass.textio import parse_forest
from permclass.trees import forest_decode


def test_run_blocks_independent_of_threads(monkeypatch):
    fn = lambda rng, c: rng.random(c).tolist()
    a = harness.run_blocks(fn, 103, 7, block=10, threads=1)
    b = harness.run_blocks(fn, 103, 7, block=10, threads=4)
    assert a == b and len(a) == 103
    monkeypatch.setenv("PERMCLASS_THREADS", "3")
    assert harness.n_threads() == 3
    assert harness.run_blocks(fn, 103, 7, block=10) == a
    monkeypatch.setenv("PERMCLASS_THREADS", "bogus")
    assert harness.n_threads() == 1


def test_pattern_estimates_thread_invariant(monkeypatch):
    spec = ClassSpec.load("simple4")
    monkeypatch.setenv("PERMCLASS_THREADS", "1")
    one = harness.estimate_pattern_density(spec, 60, 30, "21", rng=3)
    monkeypatch.setenv("PERMCLASS_THREADS", "4")
    four = harness.estimate_pattern_density(spec, 60, 30, "21", rng=3)
    assert one == four


def test_subset_pattern_frequencies():
    nu = np.array([3, 1, 4, 5, 2, 6])
    rng = np.random.default_rng(0)
    freq = harness.subset_pattern_frequencies(nu, 3, 200_000, rng)
    for pi in harness.SIZE3:
        exact = oracles.occurrences(pi.values, tuple(nu)) / 20
        assert freq[perm_code(pi.values)] == pytest.approx(exact, abs=0.005)
    with pytest.raises(ValueError):
        harness.subset_pattern_frequencies(nu, 7, 10, rng)


def test_mean_se():
    m, se = harness.mean_se([1.0, 2.0, 3.0])
    assert m == 2.0 and se == pytest.approx(1 / np.sqrt(3))
    assert harness.mean_se([5.0]) == (5.0, 0.0)


def test_report_outputs(tmp_path):
    rep = harness.ExperimentReport("demo", {"n": 1})
    rep.within("x", 1.0, 0.1, 1.2)
    rep.within("y", 1.0, 0.1, 1.5)
    rep.add("z", 3, None, None, True, "estimate")
    assert not rep.passed
    assert "[PASS] demo:x" in rep.summary() and "[FAIL] demo:y" in rep.summary()
    js, cs = tmp_path / "r.json", tmp_path / "r.csv"
    harness.write_reports([rep], js, cs)
    data = json.loads(js.read_text())
    assert data[0]["passed"] is False and len(data[0]["checks"]) == 3
    rows = list(csv.DictReader(cs.open()))
    assert [r["parameter"] for r in rows] == ["x", "y", "z"]
    assert rows[0]["pass"] == "True" and rows[2]["se"] == ""


def test_small_experiments_run():
    sep = ClassSpec.load("separable")
    reps = [
        harness.pattern_experiment(sep, n=80, samples=40, seed=1),
        harness.giant_experiment(sep, n=200, samples=300, seed=1),
        harness.gamma_experiment(sep, size=2, samples=2000, seed=1),
        harness.skeleton_experiment(sep, n=200, k=2, samples=100, seed=1),
        harness.uniformity_experiment(sep, n=4, draws=2000, seed=1),
        harness.sampler_agreement_experiment(sep, n=6, draws=2000, seed=1),
    ]
    for r in reps:
        assert r.checks
        assert isinstance(r.to_dict()["passed"], bool)
    assert reps[2].checks[0].estimate == pytest.approx(1.0)


def test_cli_limits(capsys):
    assert main(["limits", "--class", "separable"]) == 0
    d = json.loads(capsys.readouterr().out)
    assert d["p"] == 0.5 and d["criticality"] == "critical_generic"
    assert d["sigma2"] == pytest.approx(4 * (2 ** 0.5 - 1))


def test_cli_decompose_and_pack(capsys):
    assert main(["decompose", "231", "--tree"]) == 0
    d = json.loads(capsys.readouterr().out)
    assert d["kind"] == "minus" and d["parts"] == ["12", "1"]
    assert d["canonical_tree"] == "(- (+ . .) .)"
    assert main(["pack", "2413"]) == 0
    text = capsys.readouterr().out.strip()
    assert forest_decode(parse_forest(text)) == Permutation.parse("2413")
    assert main(["pack", "2413", "--class", "separable"]) == 2
    assert "ClassMembershipError" in capsys.readouterr().err
    assert main(["decompose", "1 1"]) == 2


def test_cli_sample(capsys):
    assert main(["sample", "--class", "simple4", "-n", "30", "--count", "3", "--seed", "4",
                 "--emit-trees"]) == 0
    lines = capsys.readouterr().out.strip().split("\n")
    assert len(lines) == 3
    for line in lines:
        perm, forest = line.split("\t")
        assert forest_decode(parse_forest(forest)) == Permutation.parse(perm)
    assert main(["sample", "-n", "30", "--count", "3", "--seed", "4", "--class", "simple4"]) == 0
    again = capsys.readouterr().out.strip().split("\n")
    assert again == [l.split("\t")[0] for l in lines]


def test_cli_stats(tmp_path, capsys):
    out, cs = tmp_path / "r.json", tmp_path / "r.csv"
    code = main(["stats", "--experiment", "giant", "--class", "separable", "-n", "200",
                 "--samples", "400", "--out", str(out), "--csv", str(cs)])
    rep = json.loads(out.read_text())[0]
    assert code == (0 if rep["passed"] else 1)
    assert "giant:" in capsys.readouterr().out
    assert cs.read_text().startswith("experiment,parameter")
    with pytest.raises(SystemExit):
        main(["stats", "--experiment", "nope"])
