import csv
import subprocess
import sys

import numpy as np
import pytest

from eas1d.cli import SWEEP_COLUMNS, main, parse_axis, worker_count
from eas1d.dynamics import read_snapshot
from eas1d.errors import ConfigError


def write_cfg(path, outdir, **kv):
    base = {"grid__N": 32, "run__T": 0.05, "run__snapshot_dt": 0.025}
    base.update(kv)
    lines = [f"output.dir = {outdir}"] + [f"{k.replace('__', '.')} = {v}" for k, v in base.items()]
    path.write_text("\n".join(lines) + "\n")
    return str(path)


def kv(text):
    return dict(line.split(" = ", 1) for line in text.splitlines() if " = " in line)


def test_simulate(tmp_path, capsys):
    out = tmp_path / "run"
    cfg = write_cfg(tmp_path / "c.cfg", out)
    assert main(["simulate", cfg]) == 0
    res = kv(capsys.readouterr().out)
    assert res["reason"] == "completed" and float(res["final_t"]) == 0.05
    snaps = sorted(out.glob("snap_*.bin"))
    assert len(snaps) == 3
    with open(snaps[-1], "rb") as fh:
        t, arrays = read_snapshot(fh)
    assert t == 0.05 and len(arrays) == 2 and len(arrays[0]) == 32
    with open(out / "diagnostics.csv") as fh:
        rows = list(csv.DictReader(fh))
    assert float(rows[-1]["t"]) == 0.05


def test_config_errors(tmp_path, capsys):
    cfg = write_cfg(tmp_path / "c.cfg", tmp_path, kernel__alpha=2.5)
    assert main(["simulate", cfg]) == 2
    err = capsys.readouterr().err
    assert "kernel.alpha" in err and "line 5" in err  # after output.dir and three base keys
    assert main(["simulate", str(tmp_path / "missing.cfg")]) == 2


def test_abort_exit_code(tmp_path, capsys):
    cfg = write_cfg(tmp_path / "c.cfg", tmp_path / "o", init__b=1, step__gradient_cap=1.0)
    assert main(["simulate", cfg]) == 3
    assert kv(capsys.readouterr().out)["reason"] == "gradient_cap"


def test_burgers_mode(tmp_path, capsys):
    cfg = write_cfg(tmp_path / "c.cfg", tmp_path / "b", run__mode="burgers", kernel__mu=0,
                    init__preset="constant", init__b=1)
    assert main(["burgers", cfg]) == 0
    assert kv(capsys.readouterr().out)["reason"] == "completed"
    with open(tmp_path / "b" / "diagnostics.csv") as fh:
        assert next(csv.reader(fh))[:3] == ["t", "mean_u", "energy"]


def test_sweep(tmp_path, capsys):
    cfg = write_cfg(tmp_path / "c.cfg", tmp_path / "s")
    assert main(["sweep", cfg, "--axis", "kernel.mu=0,-1,2", "--workers", "2"]) == 0
    with open(tmp_path / "s" / "sweep_summary.csv") as fh:
        rows = list(csv.DictReader(fh))
    assert list(rows[0]) == list(SWEEP_COLUMNS)
    assert [r["value"] for r in rows] == ["0", "-1", "2"]
    assert rows[0]["reason"] == "completed" and rows[1]["reason"].startswith("error")
    assert main(["sweep", cfg, "--axis", "kernel.mu="]) == 0


def test_parse_axis():
    assert parse_axis("kernel.mu=0,1,4") == ("kernel.mu", ["0", "1", "4"])
    assert parse_axis("kernel.mu=") == ("kernel.mu", [])
    with pytest.raises(ConfigError):
        parse_axis("kernel.mu")
    assert worker_count(3, 8) == 3 and worker_count(5, 2) == 2


def test_symbol(tmp_path, capsys):
    cfg = write_cfg(tmp_path / "c.cfg", tmp_path / "y")
    assert main(["symbol", cfg]) == 0
    with open(tmp_path / "y" / "symbol.csv") as fh:
        rows = list(csv.DictReader(fh))
    z, A = float(rows[1]["zeta"]), float(rows[1]["A"])
    assert z == pytest.approx(2 * np.pi)
    assert A == pytest.approx(z ** 1.2 - z ** 0.4, rel=1e-10)


def test_moc_round_trip(tmp_path, capsys):
    out = tmp_path / "m"
    cfg = write_cfg(tmp_path / "c.cfg", out)
    spec = tmp_path / "spec.txt"
    assert main(["moc-params", cfg, "--T", "1", "--write-spec", str(spec)]) == 0
    res = kv(capsys.readouterr().out)
    assert float(res["delta"]) > 0 and float(res["log_lambda"]) < 0
    assert main(["simulate", cfg]) == 0
    capsys.readouterr()
    assert main(["moc-check", str(out / "snap_00000.bin"), str(spec), "--refine"]) == 0
    assert kv(capsys.readouterr().out)["obeys"] == "true"
    assert main(["moc-check", str(out / "nope.bin"), str(spec)]) == 2


def test_console_script(tmp_path):
    cfg = write_cfg(tmp_path / "c.cfg", tmp_path / "o")
    proc = subprocess.run([sys.executable, "-m", "eas1d.cli", "simulate", cfg],
                          capture_output=True, text=True)
    assert proc.returncode == 0 and "reason = completed" in proc.stdout


def test_sweep_min_rho_monotone_in_mu(tmp_path):
    from eas1d.config import load_config
    from eas1d.cli import sweep
    cfg = load_config(write_cfg(tmp_path / "c.cfg", tmp_path / "s", run__T=1.0))
    rows = sweep(cfg, "kernel.mu", ["0", "0.5", "1", "2"], workers=1)
    assert len(rows) == 4 and all(r["reason"] == "completed" for r in rows)
    mins = [r["min_rho"] for r in rows]
    assert all(b <= a + 1e-12 for a, b in zip(mins, mins[1:]))


def test_single_value_sweep_matches_simulate(tmp_path, capsys):
    from eas1d.config import load_config
    from eas1d.cli import sweep
    from eas1d.diagnostics import read_csv
    out = tmp_path / "solo"
    path = write_cfg(tmp_path / "c.cfg", out, init__b=0.3)
    assert main(["simulate", path]) == 0
    with open(out / "diagnostics.csv") as fh:
        rows = read_csv(fh)
    (row,) = sweep(load_config(path), "init.b", ["0.3"], workers=1)
    assert row["final_t"] == rows[-1]["t"]
    assert row["min_rho"] == min(r["min_rho"] for r in rows)
