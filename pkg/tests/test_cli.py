import json
import subprocess
import sys


def _run(*args):
    return subprocess.run(
        [sys.executable, "-m", "feec.cli", *args],
        capture_output=True,
        text=True,
    )


def test_cli_pass_run(tmp_path):
    out = tmp_path / "run"
    res = _run("fig2-1d-mixed-stability", "--out", str(out))
    assert res.returncode == 0, res.stderr
    assert "PASS" in res.stdout
    verdict = json.loads((out / "fig2-1d-mixed-stability.verdict.json").read_text())
    assert verdict["pass"] is True
    names = {c["name"] for c in verdict["checks"]}
    assert "p1_p1_singular" in names
    for c in verdict["checks"]:
        assert {"name", "value", "threshold", "comparison", "pass"} <= set(c)


def test_cli_writes_figures_and_tables(tmp_path):
    out = tmp_path / "run"
    res = _run("fig2-1d-mixed-stability", "--out", str(out))
    assert res.returncode == 0
    assert list(out.glob("fig2-1d-mixed-stability.*.png"))
    assert list(out.glob("fig2-1d-mixed-stability.*.csv"))
    assert list(out.glob("fig2-1d-mixed-stability.*.dat"))


def test_cli_per_check_lines(tmp_path):
    res = _run("fig1-1d-primal", "--out", str(tmp_path / "o"))
    assert res.returncode == 0
    lines = [l for l in res.stdout.splitlines() if l.startswith("[")]
    assert lines and all(l.startswith("[PASS]") or l.startswith("[FAIL]") for l in lines)
    assert any(l.startswith("fig1-1d-primal:") for l in res.stdout.splitlines())


def test_cli_rejects_unknown_experiment():
    res = _run("no-such-demo")
    assert res.returncode == 2


def test_cli_config_file(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"levels": 3}))
    res = _run("fig1-1d-primal", "--config", str(cfg), "--out", str(tmp_path / "o"))
    assert res.returncode == 0


def test_cli_flag_overrides_config(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"levels": 2}))
    res = _run("fig1-1d-primal", "--config", str(cfg), "--levels", "3")
    assert res.returncode == 0
