import json
import subprocess
import sys

import pytest

from mirrorlab import cli, oracle
from mirrorlab.oracle import CheckReport


@pytest.fixture
def ws(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    monkeypatch.delenv(cli.LOG_ENV, raising=False)
    (tmp_path / "empty.cfg").write_text("model=lorentz geometry=plane p=0.5 seed=handcrafted\n")
    return tmp_path


def records(path):
    return [json.loads(line) for line in path.read_text().splitlines()]


def run(capsys, *argv):
    code = cli.main(list(argv))
    out = capsys.readouterr().out.strip().splitlines()
    return code, json.loads(out[-1]) if out else None


def test_trace_writes_svg_and_log(ws, capsys):
    code, payload = run(capsys, "trace", "--config", "empty.cfg", "--start", "0 0 E",
                        "--bound", "q:5", "--svg", "out.svg")
    assert code == 0 and payload["status"] == "exited" and payload["length"] == 6
    svg = (ws / "out.svg").read_text()
    assert svg.count("<polyline") == 1 and "mirror ne" not in svg
    (rec,) = records(ws / "experiments.jsonl")
    assert rec["subcommand"] == "trace" and rec["payload"] == payload
    assert rec["inputs"]["empty.cfg"].startswith("sha256:") and "out.svg" in rec["outputs"]
    assert rec["params"]["bound"] == "q:5" and rec["engine"].startswith("mirrorlab-")


def test_log_location_from_env_and_flag(ws, capsys, monkeypatch):
    monkeypatch.setenv(cli.LOG_ENV, str(ws / "env.jsonl"))
    run(capsys, "trace", "--config", "empty.cfg", "--start", "0 0 N", "--bound", "q:2")
    run(capsys, "trace", "--config", "empty.cfg", "--start", "0 0 N", "--bound", "q:2", "--log", "flag.jsonl")
    run(capsys, "trace", "--config", "empty.cfg", "--start", "0 0 N", "--bound", "q:2", "--no-log")
    assert len(records(ws / "env.jsonl")) == 1 and len(records(ws / "flag.jsonl")) == 1


def test_verify_oracle_pass_and_fail(ws, capsys, monkeypatch):
    code, payload = run(capsys, "verify-oracle", "--suite", "parity", "--max-cells", "8")
    assert code == 0 and payload["passed"] and len(payload["checks"]) == 4
    monkeypatch.setattr(oracle, "battery", lambda suite, cells: [CheckReport("x", 1, ["bad"])])
    code, payload = run(capsys, "verify-oracle")
    assert code == 1 and not payload["passed"]


def test_usage_errors_exit_2(ws, capsys):
    assert cli.main(["verify-oracle", "--max-cells", "99"]) == 2
    assert "enumeration limit of 32" in capsys.readouterr().err
    (ws / "bad.cfg").write_text("model=lorentz geometry=plane\n")
    assert cli.main(["trace", "--config", "bad.cfg", "--start", "0 0 E"]) == 2
    assert cli.main(["trace", "--config", "missing.cfg", "--start", "0 0 E"]) == 2
    assert cli.main(["trace", "--config", "empty.cfg", "--start", "0 0 Q"]) == 2
    assert cli.main(["event", "--config", "empty.cfg", "--kind", "A"]) == 2
    assert "needs --m" in capsys.readouterr().err
    with pytest.raises(SystemExit) as exc:
        cli.main(["trace", "--frobnicate"])
    assert exc.value.code == 2
    with pytest.raises(SystemExit) as exc:
        cli.main(["estimate", "--kind", "A", "--m", "2", "--p", "1.5", "--seed", "1"])
    assert exc.value.code == 2
    assert not (ws / "experiments.jsonl").exists()


def test_localize_replays_bit_exactly(ws, capsys):
    argv = ["localize", "--n", "2", "--p", "0.5", "--M", "4,8,16", "--reps", "1000", "--seed", "7"]
    run(capsys, *argv)
    run(capsys, *argv, "--workers", "2", "--csv", "prof.csv")
    a, b = records(ws / "experiments.jsonl")
    assert a["payload"] == b["payload"] and a["root_seed"] == 7
    header = (ws / "prof.csv").read_text().splitlines()[0]
    assert header == "n,p,M,replicates,escapes,p_hat,ci_lo,ci_hi,seed"


def test_record_params_reproduce_payload(ws, capsys):
    run(capsys, "estimate", "--kind", "crossing", "--I", "1:2", "--J", "1:1", "--p", "0.5",
        "--reps", "500", "--seed", "3")
    (rec,) = records(ws / "experiments.jsonl")
    P = rec["params"]
    argv = [P["command"], "--kind", P["kind"], "--I", ":".join(map(str, P["I"])),
            "--J", ":".join(map(str, P["J"])), "--p", str(P["p"]), "--reps", str(P["reps"]),
            "--seed", str(P["seed"]), "--no-log"]
    _, again = run(capsys, *argv)
    assert again == rec["payload"]


def test_sample_event_classify_wind(ws, capsys):
    code, _ = run(capsys, "sample", "--model", "lorentz", "--geometry", "cylinder:2",
                  "--region", "band:0:20", "--seed", "3", "--out", "c.cfg", "--svg", "c.svg")
    assert code == 0 and (ws / "c.cfg").exists() and (ws / "c.svg").exists()
    code, payload = run(capsys, "classify", "--config", "c.cfg", "--N", "20")
    assert code == 0 and sum(payload["counts"].values()) == 4
    code, payload = run(capsys, "wind", "--config", "c.cfg", "--N", "20", "--band", "8:12")
    assert code == 0 and payload["event"] == "wind"
    code, payload = run(capsys, "event", "--config", "c.cfg", "--kind", "strip_lr", "--N", "20")
    assert code == 0 and payload["holds"] == (payload["witness"] > 0)
    code, payload = run(capsys, "event", "--config", "empty.cfg", "--kind", "crossing",
                        "--I", "0:0", "--J", "0:0")
    assert code == 0 and payload["holds"]


def test_render_from_trajectory_file(ws, capsys):
    run(capsys, "trace", "--config", "empty.cfg", "--start", "0 0 E", "--bound", "q:3", "--out", "t.txt")
    assert (ws / "t.txt").read_text().splitlines()[0] == "0 0 E"
    code, payload = run(capsys, "render", "--config", "empty.cfg", "--trajectory", "t.txt",
                        "--start", "0 0 N", "--bound", "q:3", "--out", "r.svg")
    assert code == 0 and payload == {"ne": 0, "nw": 0, "polylines": 2}


@pytest.mark.parametrize("model", ["lorentz", "manhattan"])
def test_surgery_demo(ws, capsys, model):
    code, payload = run(capsys, "surgery-demo", "--model", model, "--out-dir", "demo")
    assert code == 0 and payload["passed"] and all(payload["checks"].values())
    names = sorted(p.name for p in (ws / "demo").iterdir())
    assert names == ["after.cfg", "after.svg", "before.cfg", "before.svg"]


def test_module_entry_point(ws):
    proc = subprocess.run(
        [sys.executable, "-m", "mirrorlab", "trace", "--config", "empty.cfg", "--start", "0 0 E",
         "--bound", "q:5", "--no-log"], capture_output=True, text=True, cwd=ws,
    )
    assert proc.returncode == 0 and json.loads(proc.stdout)["terminal_edge"] == "5 0 E"
