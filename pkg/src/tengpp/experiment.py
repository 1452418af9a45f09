"""Run configuration, experiment orchestration and plain-text outputs.

Config files are ``key = value`` lines (``#`` starts a comment). Keys are the
``RunConfig`` field names; lists are comma separated. Defaults are the
full-scale setup: heat equation, nu = 0.1, 800 steps, 5 iterations per step,
dt 0.005 for Heun and 0.001 for Euler, 65536 samples, sampler seed 4321 and
model seed 1234.

Grid files (``export_grid``) are byte-exact plain text::

    resolution R
    v v v ... v        <- R rows of R values, rows along x2 ascending,
    ...                   columns along x1 ascending

Each value is Python's shortest round-trip ``repr`` of the float; lattice
nodes outside the closed unit disk hold ``nan``. Single spaces separate
values and every line ends with ``\\n``.
"""
from __future__ import annotations

import dataclasses
import json
import logging
import math
import time
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Optional

import numpy as np

from .ansatz import (FrozenDifferenceAnsatz, MLPAnsatz, ModelSpec, init_params,
                     load_snapshot, save_snapshot)
from .engine import IntegratorConfig, StepperConfig, TrajectoryRecord, integrate, pretrain
from .pde import DirichletBC, HeatOperator, LossReport, loss, relative_l2
from .sampling import EvalGrid, make_grid, make_samples
from .special import ExactSolution, ModalExpansion, experiment1_expansion, single_mode_expansion

log = logging.getLogger(__name__)

SCHEME_DT = {"heun": 0.005, "euler": 0.001}
INITIAL_CONDITIONS = ("experiment1", "z01")


class ConfigError(ValueError):
    def __init__(self, key: str, msg: str):
        super().__init__(f"{key}: {msg}")
        self.key = key


@dataclass(frozen=True)
class RunConfig:
    equation: str = "heat"
    nu: float = 0.1
    scheme: str = "heun"
    dt: Optional[float] = None  # None -> per-scheme default
    n_steps: int = 800
    n_it: int = 5
    alpha: float = 1.0
    ridge: float = 1e-8
    lambda_d: float = 1.0
    n_samples: int = 65536
    n_boundary: Optional[int] = None  # None -> n_samples // 8
    sampler_seed: int = 4321
    model_seed: int = 1234
    hidden_widths: tuple[int, ...] = (32, 32)
    init_scale: float = 1.0
    init_mode: str = "pretrained"
    initial_condition: str = "experiment1"
    pretrain_tol: float = 1e-3
    pretrain_max_rounds: int = 2000
    grid_resolution: int = 64
    grid_times: tuple[float, ...] = ()  # empty -> first and last step
    output_dir: str = "out"
    snapshot_path: Optional[str] = None
    resample: bool = False
    oracle_selftest: bool = False

    def __post_init__(self):
        _validate(self)

    def resolved(self) -> "RunConfig":
        dt = SCHEME_DT[self.scheme] if self.dt is None else self.dt
        nb = max(1, self.n_samples // 8) if self.n_boundary is None else self.n_boundary
        return dataclasses.replace(self, dt=dt, n_boundary=nb)

    @property
    def t_final(self) -> float:
        return self.resolved().dt * self.n_steps


def _pos(key, v):
    if not (math.isfinite(v) and v > 0):
        raise ConfigError(key, f"must be positive, got {v}")


def _nonneg(key, v):
    if not (math.isfinite(v) and v >= 0):
        raise ConfigError(key, f"must be nonnegative, got {v}")


def _choice(key, v, options):
    if v not in options:
        raise ConfigError(key, f"must be one of {', '.join(options)}, got {v!r}")


def _validate(c: RunConfig) -> None:
    _choice("equation", c.equation, ("heat",))
    _choice("scheme", c.scheme, tuple(SCHEME_DT))
    _choice("init_mode", c.init_mode, ("pretrained", "frozen_difference"))
    _choice("initial_condition", c.initial_condition, INITIAL_CONDITIONS)
    _pos("nu", c.nu)
    if c.dt is not None:
        _pos("dt", c.dt)
    for key in ("n_steps", "n_it", "n_samples", "pretrain_max_rounds"):
        if getattr(c, key) < 1:
            raise ConfigError(key, "must be at least 1")
    if c.n_boundary is not None and c.n_boundary < 1:
        raise ConfigError("n_boundary", "must be at least 1")
    if not (0 < c.alpha <= 1):
        raise ConfigError("alpha", f"must lie in (0, 1], got {c.alpha}")
    _nonneg("ridge", c.ridge)
    _nonneg("lambda_d", c.lambda_d)
    _pos("init_scale", c.init_scale)
    _pos("pretrain_tol", c.pretrain_tol)
    if not c.hidden_widths or min(c.hidden_widths) < 1:
        raise ConfigError("hidden_widths", "need at least one positive width")
    if c.grid_resolution < 2:
        raise ConfigError("grid_resolution", "must be at least 2")
    for t in c.grid_times:
        _nonneg("grid_times", t)


def _parse_bool(s: str) -> bool:
    low = s.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {s!r}")


def _parse_optional(conv):
    def parse(s: str):
        return None if s.strip().lower() in ("", "none") else conv(s)
    return parse


def _parse_list(conv):
    def parse(s: str):
        return tuple(conv(p) for p in s.split(",") if p.strip())
    return parse


_PARSERS = {
    "equation": str.strip, "scheme": str.strip, "init_mode": str.strip,
    "initial_condition": str.strip, "output_dir": str.strip,
    "snapshot_path": _parse_optional(str.strip),
    "nu": float, "alpha": float, "ridge": float, "lambda_d": float,
    "init_scale": float, "pretrain_tol": float,
    "dt": _parse_optional(float), "n_boundary": _parse_optional(int),
    "n_steps": int, "n_it": int, "n_samples": int, "sampler_seed": int,
    "model_seed": int, "pretrain_max_rounds": int, "grid_resolution": int,
    "hidden_widths": _parse_list(int), "grid_times": _parse_list(float),
    "resample": _parse_bool, "oracle_selftest": _parse_bool,
}
assert set(_PARSERS) == {f.name for f in fields(RunConfig)}


def parse_text(text: str) -> dict[str, str]:
    """key = value lines to a raw dict; rejects unknown and duplicate keys."""
    raw: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}", f"expected key = value, got {line!r}")
        key, value = (p.strip() for p in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in _PARSERS:
            raise ConfigError(key, "unknown key")
        if key in raw:
            raise ConfigError(key, "given twice")
        raw[key] = value
    return raw


def parse_config(path=None, overrides: dict[str, str] | None = None,
                 text: str | None = None) -> RunConfig:
    """Build a RunConfig from a file (or text) plus string overrides.

    Overrides win over file values. A file-level ``dt`` is dropped when an
    override switches the scheme without giving its own ``dt``.
    """
    raw: dict[str, str] = {}
    if path is not None:
        raw.update(parse_text(Path(path).read_text()))
    if text is not None:
        raw.update(parse_text(text))
    overrides = {k.replace("-", "_"): v for k, v in (overrides or {}).items()}
    for key in overrides:
        if key not in _PARSERS:
            raise ConfigError(key, "unknown key")
    if "scheme" in overrides and "dt" not in overrides and "scheme" in raw \
            and raw["scheme"].strip() != overrides["scheme"].strip():
        raw.pop("dt", None)
    raw.update(overrides)
    values = {}
    for key, s in raw.items():
        try:
            values[key] = _PARSERS[key](s)
        except ValueError as exc:
            raise ConfigError(key, f"malformed value {s!r} ({exc})") from None
    return RunConfig(**values)


def _format_value(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, tuple):
        return ",".join(_format_value(x) for x in v)
    if isinstance(v, float):
        return repr(v)
    return str(v)


def config_to_text(cfg: RunConfig) -> str:
    lines = []
    for f in fields(cfg):
        v = getattr(cfg, f.name)
        if v is None:
            continue
        lines.append(f"{f.name} = {_format_value(v)}")
    return "\n".join(lines) + "\n"


def export_grid(values, grid: EvalGrid, path) -> None:
    vals = np.asarray(values, dtype=float).reshape(-1)
    if vals.shape[0] != grid.points.shape[0]:
        raise ValueError(f"expected {grid.points.shape[0]} inside values, got {vals.shape[0]}")
    full = np.full(grid.mask.shape, np.nan)
    full[grid.mask] = vals
    lines = [f"resolution {grid.resolution}"]
    lines.extend(" ".join(repr(float(v)) for v in row) for row in full)
    Path(path).write_text("\n".join(lines) + "\n")


def read_grid(path) -> np.ndarray:
    lines = Path(path).read_text().splitlines()
    tag, res = lines[0].split()
    if tag != "resolution":
        raise ValueError(f"{path}: missing resolution header")
    R = int(res)
    arr = np.array([[float(v) for v in line.split()] for line in lines[1:]])
    if arr.shape != (R, R):
        raise ValueError(f"{path}: expected {R}x{R} values, got {arr.shape}")
    return arr


def initial_condition(name: str) -> ModalExpansion:
    if name == "experiment1":
        return experiment1_expansion()
    if name == "z01":
        return single_mode_expansion(0, 1)
    raise ConfigError("initial_condition", f"unknown initial condition {name!r}")


@dataclass
class OutputManifest:
    output_dir: str
    error_csv: str
    config_echo: str
    grid_files: dict[str, dict[str, str]] = field(default_factory=dict)
    snapshot: Optional[str] = None
    wall_time: float = 0.0
    partial: bool = False
    error: Optional[str] = None
    pretrain: Optional[dict] = None
    final_rel_l2: float = float("nan")

    def write(self) -> Path:
        path = Path(self.output_dir) / "manifest.json"
        path.write_text(json.dumps(dataclasses.asdict(self), indent=2, sort_keys=True) + "\n")
        return path


CSV_HEADER = "step,time,interior_loss,boundary_loss,rel_l2_error"


def write_error_csv(records: list[TrajectoryRecord], path) -> None:
    nan = float("nan")
    lines = [CSV_HEADER]
    for r in records:
        rep = r.loss_report
        il = rep.interior_term if rep else nan
        bl = rep.boundary_term if rep else nan
        lines.append(f"{r.step_index},{r.time!r},{il!r},{bl!r},{r.rel_l2_error!r}")
    Path(path).write_text("\n".join(lines) + "\n")


def _grid_steps(cfg: RunConfig) -> list[int]:
    if not cfg.grid_times:
        return sorted({0, cfg.n_steps})
    return sorted({min(cfg.n_steps, int(round(t / cfg.dt))) for t in cfg.grid_times})


def run_experiment(cfg: RunConfig) -> OutputManifest:
    """Build samples, oracle and ansatz from ``cfg``, integrate, write outputs.

    Outputs in ``cfg.output_dir``: ``config.txt`` (parseable echo),
    ``errors.csv``, ``grids/*.txt``, ``final.snapshot`` and ``manifest.json``.
    """
    start = time.perf_counter()
    cfg = cfg.resolved()
    out = Path(cfg.output_dir)
    (out / "grids").mkdir(parents=True, exist_ok=True)
    echo = out / "config.txt"
    echo.write_text(config_to_text(cfg))
    manifest = OutputManifest(str(out), str(out / "errors.csv"), str(echo))

    u0 = initial_condition(cfg.initial_condition)
    exact = ExactSolution(u0, cfg.nu)
    samples = make_samples(cfg.n_samples, cfg.n_boundary, cfg.sampler_seed)
    grid = make_grid(cfg.grid_resolution)
    op = HeatOperator(cfg.nu)
    bc = DirichletBC(lambda_d=cfg.lambda_d)
    scfg = StepperConfig(cfg.n_it, cfg.alpha, cfg.ridge, cfg.lambda_d)
    icfg = IntegratorConfig(cfg.dt, cfg.dt * cfg.n_steps, cfg.scheme, cfg.resample)
    grid_steps = set(_grid_steps(cfg))

    def dump_grids(step, t, predicted):
        exact_vals = exact.eval(t, grid.points)
        files = {}
        for kind, vals in (("exact", exact_vals), ("predicted", predicted),
                           ("error", predicted - exact_vals)):
            p = out / "grids" / f"{kind}_step{step:06d}.txt"
            export_grid(vals, grid, p)
            files[kind] = str(p)
        manifest.grid_files[repr(t)] = files

    if cfg.oracle_selftest:
        records = _oracle_selftest_records(cfg, exact, samples, bc, grid, icfg)
        for r in records:
            if r.step_index in grid_steps:
                dump_grids(r.step_index, r.time, exact.eval(r.time, grid.points))
        write_error_csv(records, manifest.error_csv)
        manifest.final_rel_l2 = records[-1].rel_l2_error
        manifest.wall_time = time.perf_counter() - start
        manifest.write()
        return manifest

    spec = ModelSpec(cfg.hidden_widths, cfg.model_seed, cfg.init_scale)
    net = MLPAnsatz(spec)
    theta = init_params(spec)
    if cfg.init_mode == "frozen_difference":
        ansatz = FrozenDifferenceAnsatz(net, theta, u0)
    else:
        ansatz = net
        snap = Path(cfg.snapshot_path) if cfg.snapshot_path else None
        if snap is not None and snap.exists():
            loaded_spec, theta = load_snapshot(snap)
            if loaded_spec.hidden_widths != spec.hidden_widths:
                raise ConfigError("snapshot_path", "snapshot architecture differs from hidden_widths")
            manifest.pretrain = {"source": str(snap)}
        else:
            pre = pretrain(theta, u0, samples, scfg, net, cfg.pretrain_max_rounds,
                           cfg.pretrain_tol, bc)
            theta = pre.theta
            manifest.pretrain = {"rel_l2": pre.rel_l2, "loss": pre.loss,
                                 "rounds": pre.rounds, "converged": pre.converged}
            if snap is not None:
                save_snapshot(snap, spec, theta)

    records: list[TrajectoryRecord] = []

    def on_step(rec, th):
        records.append(rec)
        if rec.step_index in grid_steps:
            dump_grids(rec.step_index, rec.time, ansatz.eval(th, grid.points))

    try:
        theta, _ = integrate(theta, ansatz, op, bc, samples, scfg, icfg,
                             oracle=exact.eval, eval_points=grid.points, on_step=on_step)
    except Exception as exc:
        manifest.partial = True
        manifest.error = f"{type(exc).__name__}: {exc}"
        raise
    else:
        manifest.snapshot = str(out / "final.snapshot")
        save_snapshot(manifest.snapshot, spec, theta)
    finally:
        write_error_csv(records, manifest.error_csv)
        if records:
            manifest.final_rel_l2 = records[-1].rel_l2_error
        manifest.wall_time = time.perf_counter() - start
        manifest.write()
    return manifest


def _oracle_selftest_records(cfg, exact, samples, bc, grid, icfg) -> list[TrajectoryRecord]:
    # predicted := exact; checks the metric and output plumbing end to end
    X, B = samples.interior, samples.boundary
    recs = []
    for k in range(icfg.n_steps + 1):
        t = k * cfg.dt
        ue = exact.eval(t, X)
        rep: LossReport = loss(ue, ue, exact.eval(t, B), bc, B)
        g = exact.eval(t, grid.points)
        recs.append(TrajectoryRecord(k, t, rep, relative_l2(g, g), 0))
    return recs


def _run_for_compare(cfg: RunConfig) -> OutputManifest:
    return run_experiment(cfg)


def compare(cfg: RunConfig, parallel: bool = True) -> dict[str, OutputManifest]:
    """Euler and Heun runs into ``<output_dir>/euler`` and ``<output_dir>/heun``.

    An explicit ``dt`` is shared by both; otherwise each scheme uses its default.
    """
    runs = {s: dataclasses.replace(cfg, scheme=s, output_dir=str(Path(cfg.output_dir) / s))
            for s in ("euler", "heun")}
    if not parallel:
        return {s: run_experiment(c) for s, c in runs.items()}
    from concurrent.futures import ProcessPoolExecutor
    with ProcessPoolExecutor(max_workers=2) as pool:
        futures = {s: pool.submit(_run_for_compare, c) for s, c in runs.items()}
        return {s: f.result() for s, f in futures.items()}


def dump_oracle(ic: str, nu: float, times, resolution: int, output_dir) -> list[str]:
    exact = ExactSolution(initial_condition(ic), nu)
    grid = make_grid(resolution)
    out = Path(output_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = []
    for t in times:
        p = out / f"exact_t{t:.6f}.txt"
        export_grid(exact.eval(t, grid.points), grid, p)
        paths.append(str(p))
    return paths
