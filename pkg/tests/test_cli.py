import csv
import json

import pytest

from realm_tta import checks, cli
from realm_tta import robust_loss as rl


def run(*args):
    return cli.main([str(a) for a in args])


@pytest.fixture
def pretrained(tmp_path):
    out = tmp_path / "pre"
    assert run("pretrain", "--out_dir", out, "--n_target", 400, "--n_heldout", 200) == 0
    return out / "model.json"


def test_pretrain_outputs(pretrained):
    out = pretrained.parent
    report = json.loads((out / "pretrain_report.json").read_text())
    assert report["source_accuracy"] >= 0.95 and report["seed"] == 7
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["version"] and manifest["config"]["seed"] == 7
    assert (out / "dataset.json").exists()


def test_pretrain_twice_identical(tmp_path):
    for name in ("a", "b"):
        assert run("pretrain", "--seed", 7, "--out_dir", tmp_path / name) == 0
    assert (tmp_path / "a/model.json").read_bytes() == (tmp_path / "b/model.json").read_bytes()


def test_config_file_and_override(tmp_path):
    conf = tmp_path / "c.txt"
    conf.write_text("seed = 11\npretrain_epochs = 5\n")
    assert run("pretrain", "--config", conf, "--seed", 13, "--out_dir", tmp_path / "o") == 0
    assert json.loads((tmp_path / "o/pretrain_report.json").read_text())["seed"] == 13


def test_config_errors_exit_2(tmp_path, capsys):
    assert run("pretrain", "--bogus", 1) == 2
    assert run("pretrain", "--severity", 9, "--out_dir", tmp_path / "x") == 2
    blocker = tmp_path / "file"
    blocker.write_text("")
    assert run("pretrain", "--out_dir", blocker / "sub") == 2
    assert "error:" in capsys.readouterr().err


def test_adapt_outputs_and_determinism(pretrained, tmp_path):
    for name in ("a", "b"):
        assert run("adapt", "--model", pretrained, "--n_target", 400, "--out_dir", tmp_path / name) == 0
    a, b = tmp_path / "a", tmp_path / "b"
    assert (a / "steps.csv").read_bytes() == (b / "steps.csv").read_bytes()
    summary = json.loads((a / "summary.json").read_text())
    for key in ("strategy", "final_accuracy", "updates", "collapsed", "final_alpha", "final_lambda"):
        assert key in summary
    with open(a / "steps.csv") as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 400 and "s_div" in rows[0]
    assert (a / "adapted_model.json").exists() and (a / "online_accuracy.csv").exists()


def test_adapt_noadapt_zero_updates(pretrained, tmp_path):
    assert run("adapt", "--model", pretrained, "--strategy", "NoAdapt", "--n_target", 200,
               "--out_dir", tmp_path / "n") == 0
    assert json.loads((tmp_path / "n/summary.json").read_text())["updates"] == 0


def test_adapt_eata_low_lambda_keeps_model(pretrained, tmp_path):
    # a near-chance target stream keeps every entropy well above LAMBDA_MIN
    stream = ["--n_target", 200, "--blob_separation", 0.5, "--severity", 1]
    assert run("adapt", "--model", pretrained, "--strategy", "NoAdapt", *stream,
               "--out_dir", tmp_path / "probe") == 0
    with open(tmp_path / "probe/steps.csv") as fh:
        min_entropy = min(float(r["raw_entropy"]) for r in csv.DictReader(fh))
    lam = min_entropy / 2
    assert lam >= rl.LAMBDA_MIN
    out = tmp_path / "e"
    assert run("adapt", "--model", pretrained, "--strategy", "EATA", "--lambda0", repr(lam),
               *stream, "--out_dir", out) == 0
    assert json.loads((out / "summary.json").read_text())["updates"] == 0
    assert json.loads((out / "adapted_model.json").read_text()) == json.loads(pretrained.read_text())


def test_adapt_rejects_conflicts_before_running(pretrained, tmp_path):
    out = tmp_path / "c"
    assert run("adapt", "--model", pretrained, "--strategy", "Tent", "--use_squared", "true",
               "--out_dir", out) == 2
    assert not out.exists()
    assert run("adapt", "--model", tmp_path / "missing.json", "--out_dir", out) == 2


def test_sweep_strategy_rows(pretrained, tmp_path):
    out = tmp_path / "s"
    assert run("sweep", "--model", pretrained, "--axis", "strategy",
               "--values", "REALM,NoAdapt,Tent,EATA", "--n_target", 300, "--out_dir", out) == 0
    with open(out / "sweep.csv") as fh:
        rows = list(csv.DictReader(fh))
    assert [r["value"] for r in rows] == ["EATA", "NoAdapt", "REALM", "Tent"]
    assert len({r["steps"] for r in rows}) == 1
    assert (out / "strategy=REALM/steps.csv").exists()


def test_sweep_parallel_matches_serial(pretrained, tmp_path):
    args = ["--model", pretrained, "--axis", "d", "--values", "0.6,0.2,0.4", "--n_target", 200]
    assert run("sweep", *args, "--out_dir", tmp_path / "p", "--jobs", 3) == 0
    assert run("sweep", *args, "--out_dir", tmp_path / "q") == 0
    assert (tmp_path / "p/sweep.csv").read_bytes() == (tmp_path / "q/sweep.csv").read_bytes()


def test_sweep_severity_monotone(pretrained, tmp_path):
    out = tmp_path / "sev"
    assert run("sweep", "--model", pretrained, "--axis", "severity", "--values", "1,2,3,4,5",
               "--strategy", "NoAdapt", "--out_dir", out) == 0
    with open(out / "sweep.csv") as fh:
        accs = [float(r["final_accuracy"]) for r in csv.DictReader(fh)]
    assert all(b <= a + 0.01 for a, b in zip(accs, accs[1:])), accs


def test_sweep_n_target_heldout(pretrained, tmp_path):
    out = tmp_path / "nt"
    assert run("sweep", "--model", pretrained, "--axis", "n_target", "--values", "256,512,1024",
               "--out_dir", out) == 0
    with open(out / "sweep.csv") as fh:
        held = [float(r["heldout_accuracy"]) for r in csv.DictReader(fh)]
    assert all(b >= a - 0.01 for a, b in zip(held, held[1:])), held


def test_sweep_bad_axis(tmp_path):
    assert run("sweep", "--axis", "seed", "--values", "1", "--out_dir", tmp_path / "x") == 2
    assert run("sweep", "--axis", "severity", "--values", "1,7", "--out_dir", tmp_path / "x") == 2


def test_check_passes(capsys):
    assert run("check") == 0
    out = capsys.readouterr().out
    assert "8/8 properties hold" in out and "FAIL" not in out


def test_check_reports_small_fd_deviation():
    res = checks.check_rho_grad()
    assert res.passed and res.max_dev < 1e-5


def test_check_catches_sign_error(monkeypatch, capsys):
    original = rl.rho_second
    monkeypatch.setattr(rl, "rho_second", lambda t, a: -original(t, a))
    assert run("check") == 1
    assert "FAIL  rho shape" in capsys.readouterr().out


def test_realm_not_below_noadapt_on_default_seeds():
    # the seeded 5-seed mean; single seeds can sit a fraction of a point either side
    from realm_tta.config import RunConfig
    from realm_tta.experiment import run
    seeds = (7, 11, 13, 17, 19)
    mean = {s: sum(run(RunConfig(seed=k, strategy=s))[1].final_accuracy for k in seeds) / 5
            for s in ("NoAdapt", "REALM")}
    assert mean["REALM"] >= mean["NoAdapt"]
