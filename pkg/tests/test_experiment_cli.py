import json
import math

import pytest

from cmstein.bounds import delta_simple
from cmstein.cli import main
from cmstein.combinatorics import build
from cmstein.errors import ConfigError
from cmstein.experiment import degree_source, mc_discrepancy, multi_moment_mc, parse_config
from cmstein.oracle import lhs_moment_sums

PROFILE = "profile:1:10,2:5,3:4,4:1"


def test_parse_config():
    cfg = parse_config("source = regular:8,3  # comment\nreps = 500\nthreads=2\nconditional = no\nscales = 1, 2\n")
    assert cfg.source == "regular:8,3" and cfg.reps == 500 and cfg.threads == 2
    assert cfg.conditional is False and cfg.scales == (1, 2)


@pytest.mark.parametrize("text", ["reps = 5", "source = x\nbogus = 1", "source = x\nreps = many",
                                  "source = x\nreps = 0", "source = x\njunk", "source = x\nconditional = maybe"])
def test_parse_config_errors(text):
    with pytest.raises(ConfigError):
        parse_config(text)


def test_degree_sources(tmp_path):
    assert degree_source("regular:8,3").degrees == (3,) * 8
    assert degree_source(PROFILE).n == 20
    (tmp_path / "d.txt").write_text("1 1 2\n")
    assert degree_source("file:d.txt", base=tmp_path).degrees == (1, 1, 2)
    ds = degree_source("pmf:1:0.5,3:0.5;n=31", seed=3)
    assert ds.n == 31 and ds.N % 2 == 0
    assert degree_source("pmf:1:0.5,3:0.5;n=31", seed=3) == ds
    for bad in ("regular:3", "pmf:1:0.7;n=4", "pmf:1:1.0", "nope:1", "file:missing.txt"):
        with pytest.raises(ConfigError):
            degree_source(bad, base=tmp_path)


def test_discrepancy_deterministic_across_threads():
    ds = build([1] * 10 + [2] * 5 + [3] * 4 + [4])
    one = mc_discrepancy(ds, 60_000, seed=5, threads=1, conditional_reps=2_000)
    three = mc_discrepancy(ds, 60_000, seed=5, threads=3, conditional_reps=2_000)
    assert one.to_json() == three.to_json()
    assert one.trace_csv() == three.trace_csv()
    other = mc_discrepancy(ds, 60_000, seed=6, conditional=False)
    assert other.to_json() != one.to_json()


def test_constant_member_is_exact():
    ds = build([1] * 10 + [2] * 5 + [3] * 4 + [4])
    rep = mc_discrepancy(ds, 5_000, seed=1, conditional=False)
    const = next(m for m in rep.members if m.h_id == "h11")
    assert const.discrepancy < 1e-14
    assert const.std_error < 1e-12
    assert rep.simplicity["poisson_target"] == pytest.approx(math.exp(-23 / 35 - rep.theory.moments.lambda_m))
    assert rep.conditional is None


def test_requires_positive_means():
    with pytest.raises(ConfigError):
        mc_discrepancy(build([1] * 10), 100)


def test_multi_moment_against_oracle():
    ds = build([1, 1, 1, 1, 2, 2])
    exact = float(lhs_moment_sums(ds).multi)
    est, se = multi_moment_mc(ds, 20_000, seed=2)
    assert abs(est - exact) <= 4 * se


def test_multi_moment_below_delta():
    ds = build([3] * 8)
    est, se = multi_moment_mc(ds, 5_000, seed=0)
    assert est + 4 * se <= delta_simple(ds)


def test_cli_bounds(capsys):
    assert main(["bounds", PROFILE]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["c_star"] == 2.0
    assert main(["bounds", "regular:6,1"]) == 2


def test_cli_sample(tmp_path):
    out = tmp_path / "s.csv"
    assert main(["sample", "regular:8,3", "--reps", "7", "--seed", "1", "--out", str(out)]) == 0
    lines = out.read_text().splitlines()
    assert lines[0].startswith("rep,z_edge,z_twostar,s_loops,m_doubles,simple")
    assert len(lines) == 8
    again = tmp_path / "t.csv"
    main(["sample", "regular:8,3", "--reps", "7", "--seed", "1", "--out", str(again)])
    assert again.read_text() == out.read_text()


def test_cli_enumerate(capsys):
    assert main(["enumerate", "regular:4,1"]) == 0
    assert json.loads(capsys.readouterr().out)["p_simple"] == "1/1"
    assert main(["enumerate", "regular:10,2"]) == 2


def test_cli_verify_formulas(capsys):
    assert main(["verify", "formulas"]) == 0
    assert "formulas: PASS" in capsys.readouterr().out


def test_cli_usage_errors(tmp_path):
    for argv in ([], ["frobnicate"], ["sample", "regular:4,1", "--reps", "0"], ["verify", "nothing"]):
        with pytest.raises(SystemExit) as exc:
            main(argv)
        assert exc.value.code == 3
    assert main(["bounds", "nope:1"]) == 3
    assert main(["experiment", str(tmp_path / "missing.cfg")]) == 3


def test_cli_experiment(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text(f"source = {PROFILE}\nreps = 20000\nconditional_reps = 1000\nscales = 1\nscale_reps = 2000\n")
    out = tmp_path / "res.json"
    code = main(["experiment", str(cfg), "--seed", "3", "--out", str(out)])
    report = json.loads(out.read_text())
    assert report["joint"]["status"] == "PASS" and code == 0
    assert report["conditional"]["bound_c"]["status"] == "SKIPPED"
    assert (tmp_path / "res.trace.csv").exists()
    plot = (tmp_path / "res.plot.csv").read_text().splitlines()
    assert plot[0] == "n,bound_a,empirical_max" and len(plot) == 2
    assert "PASS    joint" in capsys.readouterr().err
    assert main(["experiment", str(cfg), "--format", "csv", "--reps", "2000"]) == 0


def test_conditional_skipped_without_simple_graphs():
    rep = mc_discrepancy(build([3, 3]), 1_000, conditional_reps=10)
    assert rep.conditional["bound_c"].status == "SKIPPED"
    assert "attempts" in rep.conditional["bound_c"].reason
    assert rep.exit_code() == 2
    assert json.loads(rep.to_json())["conditional"]["accepted"] == 0
