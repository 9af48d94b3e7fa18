import hashlib
import json
import subprocess
import sys

import pytest

from pstrack.cli import main

PROFILE = {"horizon": 20000, "transitions": [1, 10001, 20000], "means": [0.8, 0.4]}
PARAMS = {"gamma0": 0.85, "gamma": 0.5, "beta": 0.1, "delta": 0.4, "b": 0.05, "mu0": 0.3}


def write_config(tmp_path, name="cfg.json", **overrides):
    doc = {"profile": PROFILE, "params": dict(PARAMS), "family": {"kind": "bernoulli"},
           "estimator": "recursive", "trials": 10, "seed": 4}
    for k, v in overrides.items():
        if k == "params":
            doc["params"].update(v)
        else:
            doc[k] = v
    path = tmp_path / name
    path.write_text(json.dumps(doc))
    return str(path)


def digests_ok(out):
    manifest = json.loads((out / "manifest.json").read_text())
    for name, digest in manifest["outputs"].items():
        assert hashlib.sha256((out / name).read_bytes()).hexdigest() == digest
    return manifest


def test_simulate(tmp_path):
    cfg = write_config(tmp_path)
    out = tmp_path / "run"
    assert main(["simulate", "--config", cfg, "--out", str(out), "--debug-path"]) == 0
    for name in ("trace.csv", "good_event.json", "path.csv", "manifest.json"):
        assert (out / name).exists()
    manifest = digests_ok(out)
    assert manifest["config"]["params"]["delta"] == 0.4
    assert set(json.loads((out / "good_event.json").read_text())) >= {"good", "max_rel_dev", "w"}
    assert (out / "path.csv").read_text().count("\n") == 20001


def test_simulate_rerun_identical(tmp_path):
    cfg = write_config(tmp_path)
    outs = [tmp_path / "a", tmp_path / "b"]
    for out in outs:
        assert main(["simulate", "--config", cfg, "--out", str(out)]) == 0
    assert (outs[0] / "trace.csv").read_bytes() == (outs[1] / "trace.csv").read_bytes()


def test_invalid_delta_exit_code(tmp_path, capsys):
    cfg = write_config(tmp_path, params={"delta": 0.9})
    assert main(["simulate", "--config", cfg, "--out", str(tmp_path / "x")]) == 2
    assert "δ < (γ−β)/(1−β)" in capsys.readouterr().err


def test_unknown_key_rejected(tmp_path, capsys):
    cfg = write_config(tmp_path, bogus=1)
    assert main(["mc", "--config", cfg, "--out", str(tmp_path / "x")]) == 2
    assert "bogus" in capsys.readouterr().err
    cfg = write_config(tmp_path, params={"B": 0.1})
    assert main(["mc", "--config", cfg, "--out", str(tmp_path / "x")]) == 2


def test_io_error_exit_code(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("")
    cfg = write_config(tmp_path)
    assert main(["simulate", "--config", cfg, "--out", str(blocker / "sub")]) == 3
    assert main(["simulate", "--config", str(tmp_path / "missing.json"), "--out", str(tmp_path / "o")]) == 3


def test_mc_constant(tmp_path):
    cfg = write_config(tmp_path, family={"kind": "constant"}, trials=100)
    out = tmp_path / "mc"
    assert main(["mc", "--config", cfg, "--out", str(out), "--per-trial"]) == 0
    header, row = (out / "summary.csv").read_text().splitlines()
    cols = dict(zip(header.split(","), row.split(",")))
    assert cols["p_hat"] == "1"
    assert cols["trials"] == "100"
    assert (out / "trials.csv").read_text().count("\n") == 101
    digests_ok(out)


def test_mc_sweep_rows(tmp_path):
    cfg = write_config(tmp_path, family={"kind": "constant"})
    out = tmp_path / "sweep"
    assert main(["mc", "--config", cfg, "--out", str(out), "--axis", "t", "--values", "1e4,1e5",
                 "--trials", "3"]) == 0
    lines = (out / "summary.csv").read_text().splitlines()
    assert len(lines) == 3
    assert [l.split(",")[2] for l in lines[1:]] == ["10000", "100000"]


def test_bounds_command(tmp_path, capsys):
    out = tmp_path / "bounds"
    assert main(["bounds", "--chernoff", "0.5:16", "--chernoff", "0.6:16", "--azuma", "1:3:3",
                 "--success", "1e6:0.2:0.6:0.05", "--out", str(out)]) == 0
    text = (out / "bounds.csv").read_text()
    lines = text.splitlines()
    assert "0.73575888234288467" in lines[1]
    assert "domain" in lines[2]
    assert lines[4].startswith("known_transitions_success")
    assert capsys.readouterr().out == text
    digests_ok(out)


def test_bounds_empty(capsys):
    assert main(["bounds"]) == 0
    assert capsys.readouterr().out.count("\n") == 1


def test_bandit_command(tmp_path):
    doc = {"seed": 1, "bandit": {"horizon": 4000, "beta": 0.1, "delta": 0.4, "gamma": 0.5,
                                 "family": {"kind": "constant"},
                                 "arms": [{"transitions": [1, 2001, 4000], "means": [0.9, 0.1]},
                                          {"transitions": [1, 2001, 4000], "means": [0.1, 0.9]}]}}
    cfg = tmp_path / "bandit.json"
    cfg.write_text(json.dumps(doc))
    out = tmp_path / "bandit"
    assert main(["bandit", "--config", str(cfg), "--out", str(out)]) == 0
    report = json.loads((out / "latch.json").read_text())
    assert report["transitions"][0]["new_best"] == 1
    assert (out / "bandit.csv").read_text().count("\n") == 4001
    digests_ok(out)


def test_module_entry_point(tmp_path):
    res = subprocess.run([sys.executable, "-m", "pstrack", "bounds", "--chernoff", "0.5:16"],
                         capture_output=True, text=True, check=True)
    assert res.stdout.startswith("kind,eps")
