"""Command-line front end: exit codes, embedded manifests, output
formats, and consistency between subcommands."""

import json

import numpy as np
import pytest

from panelgen import write_panel
from prodstat import gb2
from prodstat.cli import main
from prodstat.superstat import ParetoIndices, kappa_from_mus

pytestmark = pytest.mark.usefixtures("fixed_epoch")


@pytest.fixture
def fixed_epoch(monkeypatch):
    monkeypatch.setenv("SOURCE_DATE_EPOCH", "1700000000")


@pytest.fixture(scope="module")
def super_panel(tmp_path_factory):
    path = tmp_path_factory.mktemp("panels") / "super.csv"
    return str(write_panel(path, n_firms=1500, mu=2.2, nu=2.0,
                           weight_exp=-0.5, seed=21,
                           years=(1999, 2000, 2001)))


@pytest.fixture(scope="module")
def negtemp_panel(tmp_path_factory):
    path = tmp_path_factory.mktemp("panels") / "negtemp.csv"
    return str(write_panel(path, n_firms=1500, mu=2.2, nu=2.0,
                           weight_exp=0.5, seed=22, years=(1999, 2000)))


def _scenario(tmp_path, **overrides):
    values = dict(n_firms=1500, n_workers_per_epoch=400, n_epochs=100,
                  seed=9, firm_mu=2.5, firm_nu=2.0, firm_q=1.0, firm_c1=1.0,
                  gamma=0.5, beta_min=1e-4, beta_max=2.0,
                  fit_window_lo=6.0, fit_window_hi=900.0)
    values.update(overrides)
    path = tmp_path / "scenario.txt"
    path.write_text("".join(f"{k} = {v}\n" for k, v in values.items()))
    return str(path)


def test_usage_errors_exit_one(capsys):
    assert main([]) == 1
    assert main(["fit", "--input", "x.csv"]) == 1     # missing required args
    assert main(["nonsense"]) == 1
    capsys.readouterr()


def test_fit_json_structure(super_panel, tmp_path):
    out = tmp_path / "fit.json"
    code = main(["fit", "--input", super_panel, "--year", "2000",
                 "--class", "M", "--target", "firms", "--out", str(out)])
    assert code == 0
    payload = json.loads(out.read_text())
    assert set(payload) == {"manifest", "fit", "n_samples_in_slice",
                            "exclusions"}
    man = payload["manifest"]
    assert man["command"] == "fit"
    assert man["inputs"] == [super_panel]
    assert man["tool_version"]
    assert man["timestamp"].startswith("2023-11-14")   # SOURCE_DATE_EPOCH
    fit = payload["fit"]
    assert fit["converged"] is True
    assert fit["n_obs"] == payload["n_samples_in_slice"]
    assert 1.5 < fit["params"]["mu"] < 3.0
    assert payload["exclusions"]["counts"]["no prior-year workers"] == 1500


def test_fit_insufficient_data_exit_two(tmp_path, super_panel):
    code = main(["fit", "--input", super_panel, "--year", "1890",
                 "--class", "M", "--target", "firms",
                 "--out", str(tmp_path / "x.json")])
    assert code == 2


def test_fit_missing_file_exit_one(tmp_path, capsys):
    code = main(["fit", "--input", str(tmp_path / "nope.csv"), "--year",
                 "2000", "--class", "M", "--target", "firms"])
    assert code == 1
    capsys.readouterr()


def test_index_series_and_kappa_consistency(super_panel, tmp_path):
    out_json = tmp_path / "idx.json"
    out_tsv = tmp_path / "idx.tsv"
    code = main(["index", "--input", super_panel, "--years", "2000..2001",
                 "--class", "M", "--out-json", str(out_json),
                 "--out-tsv", str(out_tsv)])
    assert code == 0
    series = json.loads(out_json.read_text())["series"]
    assert [row["year"] for row in series] == [2000, 2001]
    for row in series:
        assert row["regime"] == "Superstatistical"
        assert 0.0 < row["kappa"] < 1.0

    # the index kappa must equal the algebra applied to cmd_fit outputs
    fits = {}
    for target in ("firms", "workers"):
        fit_out = tmp_path / f"fit_{target}.json"
        assert main(["fit", "--input", super_panel, "--year", "2000",
                     "--class", "M", "--target", target,
                     "--out", str(fit_out)]) == 0
        fits[target] = json.loads(fit_out.read_text())["fit"]
    point = kappa_from_mus(ParetoIndices(
        mu_f=fits["firms"]["params"]["mu"],
        mu_w=fits["workers"]["params"]["mu"],
        mu_f_stderr=fits["firms"]["mu_stderr"],
        mu_w_stderr=fits["workers"]["mu_stderr"]))
    assert abs(series[0]["kappa"] - point.kappa) < 1e-12
    assert abs(series[0]["kappa_stderr"] - point.kappa_stderr) < 1e-12

    # TSV: manifest comment, header, one row per year
    lines = out_tsv.read_text().splitlines()
    assert lines[0].startswith("# manifest: ")
    assert lines[1].split("\t")[0] == "year"
    assert len(lines) == 4


def test_index_negative_temperature(negtemp_panel, tmp_path):
    out_json = tmp_path / "idx.json"
    code = main(["index", "--input", negtemp_panel, "--years", "2000..2000",
                 "--class", "M", "--out-json", str(out_json)])
    assert code == 0
    row = json.loads(out_json.read_text())["series"][0]
    assert row["regime"] == "NegativeTemperature"
    assert row["kappa"] is None
    assert "negative-temperature" in row["warning"]


def test_index_empty_range_exit_one(super_panel, capsys):
    assert main(["index", "--input", super_panel, "--years", "2005..2001",
                 "--class", "M"]) == 1
    assert main(["index", "--input", super_panel, "--years", "2000-2001",
                 "--class", "M"]) == 1
    capsys.readouterr()


def test_index_missing_years_recorded(super_panel, tmp_path):
    out_json = tmp_path / "idx.json"
    code = main(["index", "--input", super_panel, "--years", "2000..2003",
                 "--class", "M", "--out-json", str(out_json)])
    assert code == 0
    series = json.loads(out_json.read_text())["series"]
    assert len(series) == 4
    assert "error" in series[2] and "error" in series[3]


def test_simulate_outputs_and_report(tmp_path):
    scenario = _scenario(tmp_path)
    out_dir = tmp_path / "run"
    code = main(["simulate", "--scenario", scenario,
                 "--out-dir", str(out_dir)])
    report = json.loads((out_dir / "report.json").read_text())
    assert code == (0 if report["passed"] else 4)
    assert report["gamma"] == 0.5
    assert report["mu_w_predicted"] == pytest.approx(3.0)
    diag = json.loads((out_dir / "diagnostics.json").read_text())
    assert diag["total_workers"] == 400 * 100
    lines = (out_dir / "firms.tsv").read_text().splitlines()
    assert lines[0].startswith("# manifest: ")
    assert lines[1] == "firm_id\tc_k\tn_k"
    assert len(lines) == 2 + 1500
    total = sum(int(ln.split("\t")[2]) for ln in lines[2:])
    assert total == 400 * 100


def test_simulate_degenerate_window_exit_four(tmp_path, capsys):
    scenario = _scenario(tmp_path, gamma=0.0, beta_min=0.01, beta_max=0.01,
                         fit_window_lo=6.0, fit_window_hi=900.0)
    out_dir = tmp_path / "run"
    code = main(["simulate", "--scenario", scenario,
                 "--out-dir", str(out_dir)])
    assert code == 4
    report = json.loads((out_dir / "report.json").read_text())
    assert report["passed"] is False
    assert "window" in report["window_error"]
    # the simulation artifacts are still written
    assert (out_dir / "firms.tsv").exists()
    capsys.readouterr()


def test_simulate_seed_from_environment(tmp_path, monkeypatch):
    scenario = _scenario(tmp_path)
    # drop the seed line entirely
    text = "".join(ln + "\n" for ln in
                   open(scenario).read().splitlines()
                   if not ln.startswith("seed"))
    open(scenario, "w").write(text)
    monkeypatch.setenv("PRODSTAT_SEED", "9")
    out_dir = tmp_path / "run_env"
    assert main(["simulate", "--scenario", scenario,
                 "--out-dir", str(out_dir)]) in (0, 4)
    man = json.loads((out_dir / "report.json").read_text())["manifest"]
    assert man["seed"] == 9

    monkeypatch.delenv("PRODSTAT_SEED")
    assert main(["simulate", "--scenario", scenario,
                 "--out-dir", str(tmp_path / "run_noseed")]) == 1


def test_simulate_skip_verify(tmp_path):
    scenario = _scenario(tmp_path, verify="false")
    out_dir = tmp_path / "run2"
    code = main(["simulate", "--scenario", scenario,
                 "--out-dir", str(out_dir)])
    assert code == 0
    assert not (out_dir / "report.json").exists()
    assert (out_dir / "firms.tsv").exists()


def test_thermo_exponential(tmp_path):
    out = tmp_path / "thermo.json"
    code = main(["thermo", "--model", "exponential:mean=1.0",
                 "--beta-grid", "1e-4:1e2:25", "--out", str(out)])
    assert code == 0
    payload = json.loads(out.read_text())
    assert payload["passed"] is True
    assert payload["monotonicity"]["all_passed"] is True
    assert len(payload["monotonicity"]["points"]) == 25
    assert payload["limits"]["low_ok"] and payload["limits"]["high_ok"]
    assert payload["expansion"]["checked"] is True


def test_thermo_gb2_and_tail(tmp_path):
    assert main(["thermo", "--model", "gb2:mu=2.5,nu=0.8,q=1.2,c1=2.0",
                 "--beta-grid", "1e-6:10:12",
                 "--out", str(tmp_path / "a.json")]) == 0
    assert main(["thermo", "--model", "tail:mu=1.5,c0=1.0",
                 "--beta-grid", "1e-6:10:12",
                 "--out", str(tmp_path / "b.json")]) == 0


def test_thermo_bad_model_exit_one(capsys):
    assert main(["thermo", "--model", "cauchy:mean=1"]) == 1
    assert main(["thermo", "--model", "gb2:mu=2.5"]) == 1
    assert main(["thermo", "--model", "exponential:mean=1",
                 "--beta-grid", "banana"]) == 1
    capsys.readouterr()


def test_ranksize_points(super_panel, tmp_path):
    out_tsv = tmp_path / "rs.tsv"
    code = main(["ranksize", "--input", super_panel, "--year", "2000",
                 "--class", "M", "--target", "firms",
                 "--out-tsv", str(out_tsv)])
    assert code == 0
    lines = out_tsv.read_text().splitlines()
    assert lines[1] == "c\trank_fraction"
    body = [ln.split("\t") for ln in lines[2:]]
    cs = [float(r[0]) for r in body]
    fr = [float(r[1]) for r in body]
    assert cs == sorted(cs, reverse=True)
    assert fr[-1] == pytest.approx(1.0)
    assert len(body) == 1500


def test_ranksize_with_fit(super_panel, tmp_path):
    out_tsv = tmp_path / "rs.tsv"
    fit_tsv = tmp_path / "rs_fit.tsv"
    code = main(["ranksize", "--input", super_panel, "--year", "2000",
                 "--class", "M", "--target", "workers", "--fit",
                 "--out-tsv", str(out_tsv), "--fit-out", str(fit_tsv)])
    assert code == 0
    lines = fit_tsv.read_text().splitlines()
    assert lines[1] == "c\tccdf"
    assert len(lines) == 2 + 200
    ccdfs = [float(ln.split("\t")[1]) for ln in lines[2:]]
    assert all(b <= a for a, b in zip(ccdfs, ccdfs[1:]))


def test_ranksize_small_slice_skips_fit(tmp_path, capsys):
    # two firms, one year: points still written, no fit attempted
    path = tmp_path / "tiny.csv"
    path.write_text(
        "firm_id,year,sector_code,sector_class,value_added,workers_eoy\n"
        "A,1999,1,M,10.0,2\nA,2000,1,M,12.0,2\n"
        "B,1999,1,M,20.0,2\nB,2000,1,M,24.0,2\n")
    out_tsv = tmp_path / "rs.tsv"
    code = main(["ranksize", "--input", str(path), "--year", "2000",
                 "--class", "M", "--target", "firms", "--fit",
                 "--out-tsv", str(out_tsv),
                 "--fit-out", str(tmp_path / "rf.tsv")])
    assert code == 0
    assert len(out_tsv.read_text().splitlines()) == 4
    assert not (tmp_path / "rf.tsv").exists()
    assert "skipping" in capsys.readouterr().err


def test_byte_identical_reruns(super_panel, tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    for out in (a, b):
        assert main(["fit", "--input", super_panel, "--year", "2000",
                     "--class", "M", "--target", "firms",
                     "--out", str(out)]) == 0
    assert a.read_bytes() == b.read_bytes()

    s = _scenario(tmp_path, n_epochs=20)
    d1, d2 = tmp_path / "r1", tmp_path / "r2"
    for d in (d1, d2):
        main(["simulate", "--scenario", s, "--out-dir", str(d)])
    for name in ("firms.tsv", "diagnostics.json", "report.json"):
        assert (d1 / name).read_bytes() == (d2 / name).read_bytes()
