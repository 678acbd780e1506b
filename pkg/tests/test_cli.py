import numpy as np
import pytest

from satbandit.cli import ARM_HEADER, CURVE_HEADER, fmt, main
from satbandit.configfile import PRESETS, build, parse_config, parse_text, preset, render
from satbandit.errors import ConfigError, InfeasibleObjectiveError


def write(tmp_path, text, name="c.cfg"):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


def lines(path):
    return path.read_text().splitlines()


def test_fig1_preset():
    exp = preset("fig1")
    assert [n for n, _ in exp.runs] == ["P1", "P2"]
    c = exp.runs[1][1]
    np.testing.assert_array_equal(c.instance.means, [1, 2, 3, 4])
    np.testing.assert_array_equal(c.instance.stds, [1, 1, 1, 1])
    assert c.objective.mean_threshold == 2.5 and c.horizon == 1000 and c.trials == 100


def test_fig4_and_fig5_presets():
    c = preset("fig4").runs[0][1]
    assert c.objective.problem.value == "P5" and c.objective.happiness_threshold == 2
    np.testing.assert_array_equal(c.instance.stds, [1, 1, 1, 3])
    exp = preset("fig5")
    assert [c.objective.problem.value for _, c in exp.runs] == ["P1", "P5", "P7"]
    assert all(c.objective.happiness_threshold == 2 for _, c in exp.runs)
    assert exp.runs[2][1].objective.delta == 0.05


def test_fig2_preset():
    exp = preset("fig2")
    assert [(c.objective.problem.value, c.objective.delta) for _, c in exp.runs] == \
        [("P3", 0.05), ("P4", 0.05)]
    assert exp.runs[1][1].objective.mean_threshold == 2.5


def test_parser_syntax():
    s = parse_text("a = 1  # note\nb = [1, 2.5]\nc = word\nd = 'x # y'\n\n[policy.q]\nproblem = P1\n")
    assert s[""] == {"a": 1, "b": [1, 2.5], "c": "word", "d": "x # y"}
    assert s["policy.q"] == {"problem": "P1"}
    assert parse_text(render(s)) == s


@pytest.mark.parametrize("text,match", [
    ("means = [1,2]\n", "stds"),
    ("means = [1,2]\nstds=[1,1]\n", "policy"),
    ("means = [1,2]\nstds=[1,1]\n[policy.a]\nproblem=P2\n", "mean_threshold"),
    ("means = [1,2]\nstds=[1,1]\n[policy.a]\nproblem=P3\n", "sufficiency"),
    ("means = [1,2]\nstds=[1,1]\n[policy.a]\nproblem=P6\nhappiness_threshold=0\n", "happiness_prob_threshold"),
    ("means = [1,2]\nstds=[1,1]\nfoo=1\n[policy.a]\nproblem=P1\n", "foo"),
    ("means = [1,2]\nstds=[1,1]\n[policy.a]\nproblem=P1\nbar=2\n", "bar"),
    ("means = [1,2]\nstds=[1,1]\nhorizon=1.5\n[policy.a]\nproblem=P1\n", "horizon"),
    ("means = [1,2\n", "cannot parse"),
    ("just words\n", "key = value"),
    ("a=1\na=2\n", "duplicate"),
    ("means = [1,2]\nstds=[1,1]\n[policy.a]\nproblem=P1\nprior=uncorrelated\nprior_mean=[0,0]\n", "prior_var"),
])
def test_config_errors_name_the_problem(text, match):
    with pytest.raises(ConfigError, match=match):
        build(parse_text(text))


def test_infeasible_config():
    with pytest.raises(InfeasibleObjectiveError):
        build(parse_text("means=[1,2]\nstds=[1,1]\n[policy.a]\nproblem=P2\nmean_threshold=3\n"))


def test_priors_from_config():
    text = ("means=[1,2]\nstds=[1,1]\n[policy.a]\nproblem=P1\nprior=informative\n"
            "prior_mean=[0,0]\nprior_cov=[[1,0.5],[0.5,1]]\n")
    exp = build(parse_text(text))
    assert not exp.runs[0][1].policy.prior.is_diagonal


def test_parse_config_missing_file(tmp_path):
    with pytest.raises(ConfigError, match="nope"):
        parse_config(tmp_path / "nope.cfg")


def test_fmt():
    assert fmt(1 / 3) == "0.333333333333"
    assert fmt(2.0) == "2"
    assert fmt(None) == "" and fmt(float("inf")) == ""


def test_run_small(tmp_path, capsys):
    # two arms, so a horizon of 2 still covers the forced first pulls
    cfgp = write(tmp_path, "means=[1,2]\nstds=[1,1]\n[policy.P3]\nproblem=P3\nsufficiency=0.05\n")
    out = tmp_path / "o"
    assert main(["run", cfgp, "--trials", "1", "--horizon", "2", "--out", str(out)]) == 0
    rows = lines(out / "P3_curves.csv")
    assert rows[0] == CURVE_HEADER and len(rows) == 3
    assert lines(out / "P3_arms.csv")[0] == ARM_HEADER
    assert "P3:" in capsys.readouterr().out


def test_p3_bound_column_constant(tmp_path):
    out = tmp_path / "o"
    assert main(["reproduce", "fig2", "--trials", "2", "--horizon", "50", "--out", str(out)]) == 0
    bounds = {r.split(",")[-1] for r in lines(out / "P3_curves.csv")[1:]}
    assert len(bounds) == 1 and bounds != {""}


def test_manifest_replay_is_byte_identical(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(["reproduce", "fig5", "--trials", "3", "--horizon", "80", "--seed", "9",
                 "--out", str(a)]) == 0
    assert main(["run", str(a / "manifest.cfg"), "--out", str(b)]) == 0
    for name in ("P1_curves.csv", "P5_curves.csv", "P7_curves.csv", "P7_arms.csv"):
        assert (a / name).read_bytes() == (b / name).read_bytes()
    assert "seed = 9" in (a / "manifest.cfg").read_text()


def test_seed_from_environment(tmp_path, monkeypatch):
    monkeypatch.setenv("SATBANDIT_SEED", "7")
    out = tmp_path / "o"
    assert main(["reproduce", "fig4", "--trials", "1", "--horizon", "10", "--out", str(out)]) == 0
    assert "seed = 7" in (out / "manifest.cfg").read_text()
    monkeypatch.setenv("SATBANDIT_SEED", "x")
    assert main(["reproduce", "fig4", "--trials", "1", "--horizon", "10", "--out", str(out)]) == 3


def test_bounds_command(tmp_path):
    out = tmp_path / "o"
    cfgp = write(tmp_path, PRESETS["fig1"])
    assert main(["bounds", cfgp, "--horizon", "100", "--out", str(out)]) == 0
    rows = lines(out / "P1_bounds.csv")
    assert rows[0] == "t,upper_bound,lower_bound" and len(rows) == 101
    up = [float(r.split(",")[1]) for r in rows[1:]]
    assert all(b > a for a, b in zip(up, up[1:]))
    assert not (out / "P1_curves.csv").exists()


def test_validate_and_exit_codes(tmp_path, capsys):
    good = write(tmp_path, PRESETS["fig1"], "good.cfg")
    assert main(["validate", good]) == 0
    bad = write(tmp_path, "means=[1,2]\nstds=[1,1]\n[policy.a]\nproblem=P3\n", "bad.cfg")
    assert main(["validate", bad]) == 3
    assert main(["run", bad]) == 3
    infeasible = write(tmp_path, "means=[1,2]\nstds=[1,1]\n[policy.a]\nproblem=P2\nmean_threshold=9\n")
    assert main(["validate", infeasible]) == 3
    assert main(["validate", str(tmp_path / "missing.cfg")]) == 3
    for argv in (["frobnicate"], ["run"], ["reproduce", "fig9"], ["run", good, "--jobs", "0"],
                 ["validate", good, "--bogus"]):
        with pytest.raises(SystemExit) as exc:
            main(argv)
        assert exc.value.code == 2
    capsys.readouterr()


def test_unwritable_output(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    assert main(["reproduce", "fig4", "--trials", "1", "--horizon", "10",
                 "--out", str(blocker / "sub")]) == 1


def test_numpy_backend_emits_identical_tables(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    common = ["reproduce", "fig2", "--trials", "4", "--horizon", "200"]
    assert main(common + ["--backend", "numba", "--out", str(a)]) == 0
    assert main(common + ["--backend", "numpy", "--out", str(b)]) == 0
    for name in ("P3_curves.csv", "P4_curves.csv", "P4_arms.csv"):
        assert (a / name).read_bytes() == (b / name).read_bytes()
