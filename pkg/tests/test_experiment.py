import csv
import json
import math

import numpy as np
import pytest

from tengpp.cli import main
from tengpp.experiment import (CSV_HEADER, ConfigError, RunConfig, config_to_text, export_grid,
                               parse_config, read_grid, run_experiment)
from tengpp.sampling import make_grid
from tengpp.special import DiskHarmonic, experiment1_expansion, single_mode_expansion

SMALL = {"n_samples": "256", "n_boundary": "32", "hidden_widths": "6,6", "n_steps": "4",
         "dt": "0.01", "grid_resolution": "9", "n_it": "2"}


def small_cfg(tmp_path, name="run", **extra):
    o = dict(SMALL, output_dir=str(tmp_path / name))
    o.update({k: str(v) for k, v in extra.items()})
    return parse_config(overrides=o)


def test_defaults():
    cfg = parse_config().resolved()
    assert cfg.dt == 0.005 and cfg.n_steps == 800 and cfg.n_it == 5
    assert cfg.nu == 0.1 and cfg.n_samples == 65536 and cfg.n_boundary == 8192
    assert cfg.sampler_seed == 4321 and cfg.model_seed == 1234
    assert cfg.hidden_widths == (32, 32)
    assert math.isclose(cfg.t_final, 4.0)
    assert parse_config(overrides={"scheme": "euler"}).resolved().dt == 0.001


def test_scheme_override_drops_file_dt():
    cfg = parse_config(text="scheme = heun\ndt = 0.005\n", overrides={"scheme": "euler"})
    assert cfg.resolved().dt == 0.001


def test_config_errors():
    with pytest.raises(ConfigError) as info:
        parse_config(overrides={"dt": "-1"})
    assert info.value.key == "dt"
    for text in ("bogus = 1", "nu = 0.1\nnu = 0.2", "n_steps = many", "scheme = rk4",
                 "alpha = 0", "just a line"):
        with pytest.raises(ConfigError):
            parse_config(text=text)


def test_config_echo_round_trip(tmp_path):
    cfg = RunConfig(nu=0.05, hidden_widths=(4, 5), grid_times=(0.1, 0.25), resample=True,
                    init_scale=0.7, snapshot_path="x.snap").resolved()
    p = tmp_path / "c.txt"
    p.write_text(config_to_text(cfg))
    assert parse_config(p) == cfg


def test_export_grid_enumeration(tmp_path):
    g = make_grid(3)
    export_grid(np.zeros(len(g.points)), g, tmp_path / "g.txt")
    text = (tmp_path / "g.txt").read_text()
    assert text == "resolution 3\nnan 0.0 nan\n0.0 0.0 0.0\nnan 0.0 nan\n"
    with pytest.raises(ValueError):
        export_grid(np.zeros(3), g, tmp_path / "bad.txt")


def test_export_read_round_trip(tmp_path):
    g = make_grid(17)
    vals = experiment1_expansion().eval(g.points)
    export_grid(vals, g, tmp_path / "g.txt")
    back = read_grid(tmp_path / "g.txt")
    assert np.array_equal(np.isnan(back), ~g.mask)
    assert np.array_equal(back[g.mask], vals)


def test_u0_grid_small_near_boundary():
    g = make_grid(64)
    u0 = single_mode_expansion()
    vals = u0.eval(g.points)
    h = DiskHarmonic.of(0, 1)
    lip = h.lam * 0.5819  # max |J_0'| = max |J_1|
    r = np.hypot(g.points[:, 0], g.points[:, 1])
    near = r > 1 - g.spacing
    assert near.any()
    assert np.all(np.abs(vals[near]) <= lip * (1 - r[near]) + 1e-12)
    assert np.all(np.abs(vals[near]) <= lip * g.spacing)


def _rows(path):
    with open(path) as fh:
        return list(csv.reader(fh))


def test_run_outputs_and_reproducibility(tmp_path):
    m = run_experiment(small_cfg(tmp_path, "a", pretrain_max_rounds=3, pretrain_tol=0.5))
    rows = _rows(m.error_csv)
    assert ",".join(rows[0]) == CSV_HEADER
    assert len(rows) == 1 + 4 + 1
    times = [float(r[1]) for r in rows[1:]]
    assert all(a < b for a, b in zip(times, times[1:]))
    assert (tmp_path / "a" / "final.snapshot").exists()
    assert set(m.grid_files) == {repr(0.0), repr(0.04)}
    assert json.loads((tmp_path / "a" / "manifest.json").read_text())["partial"] is False
    echo = parse_config(tmp_path / "a" / "config.txt")
    m2 = run_experiment(echo.__class__(**{**echo.__dict__, "output_dir": str(tmp_path / "b")}))
    assert open(m.error_csv, "rb").read() == open(m2.error_csv, "rb").read()


def test_snapshot_reuse(tmp_path):
    snap = tmp_path / "pre.snapshot"
    a = run_experiment(small_cfg(tmp_path, "a", pretrain_max_rounds=2, snapshot_path=snap))
    assert snap.exists() and "rounds" in a.pretrain
    b = run_experiment(small_cfg(tmp_path, "b", pretrain_max_rounds=2, snapshot_path=snap))
    assert b.pretrain == {"source": str(snap)}
    assert open(a.error_csv, "rb").read() == open(b.error_csv, "rb").read()


def test_frozen_difference_run_starts_exact(tmp_path):
    m = run_experiment(small_cfg(tmp_path, init_mode="frozen_difference"))
    rows = _rows(m.error_csv)
    assert float(rows[1][4]) <= 1e-10
    assert m.pretrain is None


def test_oracle_selftest_mode(tmp_path):
    m = run_experiment(small_cfg(tmp_path, oracle_selftest="true", grid_times="0,0.02"))
    rows = _rows(m.error_csv)
    assert all(float(r[4]) == 0.0 for r in rows[1:])
    assert all(float(r[2]) == 0.0 for r in rows[1:])
    grids = m.grid_files[repr(0.02)]
    assert np.nanmax(np.abs(read_grid(grids["error"]))) == 0.0


def _cli_args(tmp_path, name, **extra):
    o = dict(SMALL, output_dir=str(tmp_path / name), pretrain_max_rounds="2")
    o.update(extra)
    args = []
    for k, v in o.items():
        args += ["--" + k.replace("_", "-"), str(v)]
    return args


def test_cli_run(tmp_path, capsys):
    assert main(["run"] + _cli_args(tmp_path, "cli")) == 0
    assert "final rel L2 error" in capsys.readouterr().out
    assert len(_rows(tmp_path / "cli" / "errors.csv")) == 6


def test_cli_config_file_and_usage_errors(tmp_path, capsys):
    cfg = tmp_path / "c.txt"
    cfg.write_text("n_steps = 2\n")
    assert main(["run", "--config", str(cfg)] + _cli_args(tmp_path, "f", n_steps="2")) == 0
    assert main(["run", "--dt", "-1"]) == 2
    assert "dt" in capsys.readouterr().err
    cfg.write_text("nonsense = 3\n")
    assert main(["run", "--config", str(cfg)]) == 2
    assert main(["oracle", "--times", "a,b"]) == 2
    assert main(["oracle", "--initial-condition", "nope"]) == 2


def test_cli_numeric_failure_exit_code(tmp_path, monkeypatch):
    from tengpp import experiment
    from tengpp.engine import StepperError

    def boom(*a, **k):
        raise StepperError("diverged", 0, 1)

    monkeypatch.setattr(experiment, "integrate", boom)
    assert main(["run", "--init-mode", "frozen_difference"] + _cli_args(tmp_path, "x")) == 3


def test_cli_oracle(tmp_path, capsys):
    out = tmp_path / "orc"
    assert main(["oracle", "--times", "0,0.5", "--grid-resolution", "5",
                 "--output-dir", str(out)]) == 0
    files = sorted(out.iterdir())
    assert len(files) == 2
    g = read_grid(files[0])
    assert g.shape == (5, 5)


def test_cli_selftest(capsys):
    assert main(["selftest"]) == 0
    out = capsys.readouterr().out
    assert out.count("PASS") == 6 and "FAIL" not in out


def test_cli_compare(tmp_path, capsys):
    assert main(["compare", "--sequential"] + _cli_args(tmp_path, "cmp")) == 0
    for s in ("euler", "heun"):
        assert len(_rows(tmp_path / "cmp" / s / "errors.csv")) == 6
    assert "heun" in capsys.readouterr().out


def test_compare_parallel_matches_sequential(tmp_path):
    from tengpp.experiment import compare
    base = small_cfg(tmp_path, "par", init_mode="frozen_difference")
    par = compare(base, parallel=True)
    seq = compare(base.__class__(**{**base.__dict__, "output_dir": str(tmp_path / "seq")}),
                  parallel=False)
    for s in ("euler", "heun"):
        assert open(par[s].error_csv, "rb").read() == open(seq[s].error_csv, "rb").read()
