import json

from dershare.cli import main
from dershare.presets import six_node_stationary


def write_config(tmp_path, **kw):
    p = tmp_path / "config.json"
    p.write_text(json.dumps(six_node_stationary(**kw)))
    return p


def test_validate_ok(tmp_path, capsys):
    p = write_config(tmp_path, algorithm="drs", horizon=10)
    assert main(["validate", "--config", str(p)]) == 0
    assert "OK" in capsys.readouterr().out


def test_validate_bad_config(tmp_path, capsys):
    p = tmp_path / "config.json"
    cfg = six_node_stationary("drs", horizon=10)
    cfg["algorithm"]["name"] = "nope"
    p.write_text(json.dumps(cfg))
    assert main(["validate", "--config", str(p)]) == 1
    assert "algorithm.name" in capsys.readouterr().err


def test_run_writes_outputs_and_summary(tmp_path, capsys):
    p = write_config(tmp_path, algorithm="drs", horizon=8, seed=1)
    out = tmp_path / "out"
    code = main(["run", "--config", str(p), "--algo", "drs-adj", "--horizon", "12", "--seed", "5", "--out", str(out)])
    assert code == 0
    assert (out / "records.csv").exists()
    summary = json.loads((out / "summary.json").read_text())
    assert summary["algorithm"] == "drs-adj"
    assert summary["horizon"] == 12
    assert summary["seed"] == 5
    assert summary["violation_total"] == [0.0] * 6
    stdout = capsys.readouterr().out
    assert "mean_cumulative_loss" in stdout


def test_run_with_oracle_flag(tmp_path):
    p = write_config(tmp_path, algorithm="drs", horizon=6, seed=1)
    out = tmp_path / "out"
    assert main(["run", "--config", str(p), "--with-oracle", "--out", str(out)]) == 0
    summary = json.loads((out / "summary.json").read_text())
    assert "dynamic_regret" in summary and "path_length" in summary
    assert (out / "comparators_dynamic.csv").exists()


def test_report_from_records(tmp_path, capsys):
    p = write_config(tmp_path, algorithm="drs-adj", horizon=10, seed=2)
    out = tmp_path / "out"
    main(["run", "--config", str(p), "--out", str(out)])
    capsys.readouterr()
    assert main(["report", "--records", str(out / "records.csv"), "--window", "5"]) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["horizon"] == 10
    assert len(report["satisfaction_ratio"]) == 6
    assert report["violation_total"] == [0.0] * 6


def test_report_rejects_garbage(tmp_path, capsys):
    p = tmp_path / "bad.csv"
    p.write_text("not,a,records\nfile\n")
    assert main(["report", "--records", str(p)]) == 1
