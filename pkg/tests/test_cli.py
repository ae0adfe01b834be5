import json

import numpy as np
import pytest

from rankenv import CurveSet
from rankenv.cli import main
from rankenv.envelope import read_envelope_csv
from rankenv.fanova import GroupedCurveSet, write_grouped_csv
from rankenv.io import read_curveset_csv, write_curveset_csv


def _load(path):
    return json.loads(path.read_text())


@pytest.fixture
def curves(tmp_path):
    rng = np.random.default_rng(0)
    cs = CurveSet(np.linspace(0, 1, 40), rng.normal(size=(200, 40)), name="T")
    path = tmp_path / "curves.csv"
    write_curveset_csv(path, cs)
    return path, cs


def test_rank_test_outputs(tmp_path, curves):
    path, cs = curves
    assert main(["rank-test", str(path), "--out", str(tmp_path / "o")]) == 0
    res = _load(tmp_path / "o" / "result.json")
    assert {"p_minus", "p_plus", "p_erc", "decision", "alpha", "s"} <= set(res)
    assert res["s"] == 199
    env = read_envelope_csv(tmp_path / "o" / "envelope.csv")
    assert np.array_equal(env["observed"], cs.curves[0])


def test_rejection_is_not_an_error(tmp_path, curves):
    path, cs = curves
    # strongly correlated components keep the p-interval narrow
    v = np.random.default_rng(9).normal(size=(200, 1)) + np.linspace(0, 1, 5)
    v[0] += 10
    write_curveset_csv(tmp_path / "far.csv", CurveSet(np.arange(5.0), v))
    assert main(["rank-test", str(tmp_path / "far.csv"), "--out", str(tmp_path / "o")]) == 0
    assert _load(tmp_path / "o" / "result.json")["decision"] == "reject"


def test_curveset_csv_round_trip(tmp_path, curves):
    path, cs = curves
    back = read_curveset_csv(path)
    assert np.array_equal(back.curves, cs.curves) and np.array_equal(back.args, cs.args)


def test_malformed_csv_line_numbers(tmp_path, capsys):
    bad = tmp_path / "bad.csv"
    bad.write_text("r,observed,sim1\n0,1,2\n0.5,1,oops\n")
    with pytest.raises(ValueError, match=":3:"):
        read_curveset_csv(bad)
    assert main(["rank-test", str(bad), "--out", str(tmp_path / "o")]) == 2
    assert "bad.csv:3" in capsys.readouterr().err
    bad.write_text("r,observed,sim1\n0,1,2\n0,1,2\n")
    with pytest.raises(ValueError, match="strictly increasing"):
        read_curveset_csv(bad)


def test_combine_and_deviation(tmp_path):
    rng = np.random.default_rng(1)
    paths = []
    for name in ("A", "B"):
        p = tmp_path / f"{name}.csv"
        write_curveset_csv(p, CurveSet(np.arange(10.0), rng.normal(size=(100, 10)), name=name))
        paths.append(str(p))
    assert main(["combine", *paths, "--out", str(tmp_path / "c")]) == 0
    man = _load(tmp_path / "c" / "manifest.json")
    assert [p["name"] for p in man["parts"]] == ["A", "B"]
    assert main(["combine", *paths, "--measure", "scaled_max_q", "--out", str(tmp_path / "d")]) == 0
    assert _load(tmp_path / "d" / "result.json")["combination"] == "deviation:scaled_max_q"


def test_gof_single_function_equals_rank_test(tmp_path):
    pat = tmp_path / "p.csv"
    assert main(["simulate", "poisson(100)", "--seed", "5", "--out", str(pat)]) == 0
    out = tmp_path / "g"
    assert main(["gof", str(pat), "--model", "poisson(100)", "--functions", "L", "--nsim", "49",
                 "--K", "50", "--out", str(out), "--save-curves"]) == 0
    assert main(["rank-test", str(out / "curves_L.csv"), "--out", str(tmp_path / "r")]) == 0
    a, b = _load(out / "result.json"), _load(tmp_path / "r" / "result.json")
    for k in ("p_minus", "p_plus", "p_erc", "decision", "s"):
        assert a[k] == b[k]


def test_gof_deterministic_across_threads(tmp_path):
    pat = tmp_path / "p.csv"
    main(["simulate", "matclust(20, 0.05, 5)", "--seed", "2", "--out", str(pat)])
    outs = []
    for t in ("1", "2"):
        o = tmp_path / f"t{t}"
        assert main(["gof", str(pat), "--fit", "csr", "--functions", "L,G", "--nsim", "39",
                     "--K", "40", "--threads", t, "--out", str(o)]) == 0
        outs.append((o / "result.json").read_bytes())
    assert outs[0] == outs[1]


def test_gof_several_patterns(tmp_path):
    paths = []
    for k in range(2):
        p = tmp_path / f"p{k}.csv"
        main(["simulate", "poisson(80)", "--seed", str(k), "--out", str(p)])
        paths.append(str(p))
    assert main(["gof", *paths, "--fit", "csr", "--nsim", "19", "--K", "20",
                 "--out", str(tmp_path / "g")]) == 0
    man = _load(tmp_path / "g" / "manifest.json")
    assert [p["name"] for p in man["parts"]] == ["L:1", "L:2"]


def test_fanova_and_groupdiff(tmp_path):
    rng = np.random.default_rng(3)
    X = rng.normal(size=(5, 30))
    g = GroupedCurveSet(np.linspace(0, 1, 30), np.vstack([X, X]), [1] * 5 + [2] * 5)
    path = tmp_path / "g.csv"
    write_grouped_csv(path, g)
    assert main(["fanova", str(path), "--nsim", "199", "--out", str(tmp_path / "f")]) == 0
    assert _load(tmp_path / "f" / "result.json")["decision"] == "not-reject"
    assert main(["groupdiff", str(path), "--nsim", "199", "--scaling", "ma", "--window-b", "5",
                 "--out", str(tmp_path / "d")]) == 0
    res = _load(tmp_path / "d" / "result.json")
    assert res["decision"] == "not-reject" and res["window_b"] == 5
    env = read_envelope_csv(tmp_path / "d" / "envelope.csv")
    assert np.all(env["observed"] == 0)


def test_shift_test_pairs(tmp_path):
    pat = tmp_path / "m.csv"
    assert main(["simulate", "poisson(40)", "--types", "4", "--seed", "1", "--out", str(pat)]) == 0
    assert main(["shift-test", str(pat), "--nsim", "19", "--K", "20", "--out", str(tmp_path / "s")]) == 0
    man = _load(tmp_path / "s" / "manifest.json")
    assert len(man["parts"]) == 6
    assert man["parts"][0]["name"] == "L1,2"


def test_summary_and_power_study(tmp_path):
    pat = tmp_path / "p.csv"
    main(["simulate", "poisson(100)", "--out", str(pat)])
    assert main(["summary", str(pat), "--functions", "L,J", "--K", "11",
                 "--out", str(tmp_path / "s.csv")]) == 0
    head = (tmp_path / "s.csv").read_text().splitlines()
    assert head[0] == "r,L,J" and len(head) == 12
    assert main(["power-study", "--true-model", "poisson(100)", "--functions", "L;L,G",
                 "--nrep", "4", "--nsim", "19", "--K", "20", "--out", str(tmp_path / "ps")]) == 0
    rep = _load(tmp_path / "ps" / "study.json")
    assert [c["functions"] for c in rep["cells"]] == ["L", "L,G"]
    assert all(c["n"] == 4 and 0 <= c["rate"] <= 1 for c in rep["cells"])


def test_bad_arguments(tmp_path, curves):
    path, _ = curves
    assert main(["rank-test", str(path), "--alpha", "1.5", "--out", str(tmp_path / "o")]) == 2
    assert main(["gof", str(path), "--rmin", "0.2", "--rmax", "0.1"]) == 2
