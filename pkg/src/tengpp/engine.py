"""Natural-gradient parameter updates and sequential-in-time integrators.

One time step freezes a numeric target at the collocation points (an explicit
Euler or Heun update of the current field) and then refits the ansatz to it
with a few Gauss-Newton style projections.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .linalg import LeastSquaresError, solve_ridge_lsq
from .pde import (DirichletBC, HeatOperator, LossReport, apply_operator,
                  functional_gradient, loss, relative_l2)
from .sampling import SampleSet, make_samples
from .special import ModalExpansion

log = logging.getLogger(__name__)

_MAX_HALVINGS = 20


class StepperError(RuntimeError):
    def __init__(self, msg: str, iteration: int, step: int | None = None):
        super().__init__(msg)
        self.iteration = iteration
        self.step = step


@dataclass(frozen=True)
class StepperConfig:
    n_it: int = 5
    alpha: float = 1.0
    ridge: float = 1e-8
    lambda_d: float = 1.0

    def __post_init__(self):
        if self.n_it < 1:
            raise ValueError("n_it must be at least 1")
        if not 0 < self.alpha <= 1:
            raise ValueError("alpha must lie in (0, 1]")
        if self.ridge < 0 or self.lambda_d < 0:
            raise ValueError("ridge and lambda_d must be nonnegative")


@dataclass(frozen=True)
class IntegratorConfig:
    dt: float = 0.005
    t_final: float = 4.0
    scheme: str = "heun"
    resample: bool = False

    def __post_init__(self):
        if self.scheme not in ("euler", "heun"):
            raise ValueError(f"unknown scheme {self.scheme!r}")
        if not 0 < self.dt <= self.t_final:
            raise ValueError("need 0 < dt <= t_final")

    @property
    def n_steps(self) -> int:
        return int(round(self.t_final / self.dt))


@dataclass
class StepperResult:
    theta: np.ndarray
    losses: list[float]  # total loss at the start, then after each iteration
    report: LossReport
    alpha_halvings: list[int] = field(default_factory=list)


@dataclass(frozen=True)
class TrajectoryRecord:
    step_index: int
    time: float
    loss_report: Optional[LossReport]
    rel_l2_error: float
    stepper_iterations_used: int


def _row_weights(samples: SampleSet, lambda_d: float) -> np.ndarray:
    return np.concatenate([
        np.full(samples.n_interior, 1.0 / samples.n_interior),
        np.full(samples.n_boundary, lambda_d / samples.n_boundary),
    ])


def teng_stepper(theta_init, target, samples: SampleSet, cfg: StepperConfig, ansatz,
                 bc: DirichletBC | None = None) -> StepperResult:
    """Refit ``ansatz`` to ``target`` with ``cfg.n_it`` natural-gradient updates.

    ``target`` is either the frozen interior values or a callable on points.
    Boundary rows always aim at ``bc.boundary_value``. An update that raises
    the total loss is rolled back and retried at half the step; the halved
    alpha stays in force for the remaining iterations.
    """
    if bc is None:
        bc = DirichletBC(lambda_d=cfg.lambda_d)
    X, B = samples.interior, samples.boundary
    u_target = np.asarray(target(X) if callable(target) else target, dtype=float)
    if u_target.shape != (samples.n_interior,):
        raise ValueError("target must provide one value per interior sample")
    weights = _row_weights(samples, cfg.lambda_d)

    n_in = samples.n_interior
    XB = np.vstack([X, B])

    theta = np.array(theta_init, dtype=float)
    alpha = cfg.alpha
    halvings: list[int] = []
    u, J = ansatz.eval_and_jacobian(theta, XB)
    report = loss(u[:n_in], u_target, u[n_in:], bc, B)
    losses = [report.total]
    for it in range(cfg.n_it):
        res = functional_gradient(u[:n_in], u_target, u[n_in:], bc, alpha, B)
        try:
            sol = solve_ridge_lsq(
                J, weights, np.concatenate([res.interior_delta_u, res.boundary_delta_u]),
                cfg.ridge)
        except (LeastSquaresError, ValueError) as exc:
            raise StepperError(f"least squares failed at iteration {it}: {exc}", it) from exc

        # the update is linear in alpha, so halving alpha halves the step
        step = sol.delta_theta
        for _ in range(_MAX_HALVINGS + 1):
            trial = theta + step
            u_trial = ansatz.eval(trial, XB)
            trial_report = loss(u_trial[:n_in], u_target, u_trial[n_in:], bc, B)
            if trial_report.total <= report.total:
                theta, report = trial, trial_report
                break
            alpha *= 0.5
            step = 0.5 * step
            halvings.append(it)
        else:
            log.info("stepper: no decrease at iteration %d, keeping parameters", it)
        losses.append(report.total)
        if it + 1 < cfg.n_it:
            u, J = ansatz.eval_and_jacobian(theta, XB)
    if halvings:
        log.debug("stepper: alpha halved %d times, final alpha %g", len(halvings), alpha)
    return StepperResult(theta, losses, report, halvings)


Oracle = Callable[[float, np.ndarray], np.ndarray]


def _record(step, t, report, iters, ansatz, theta, oracle, eval_points):
    err = float("nan")
    if oracle is not None and eval_points is not None:
        err = relative_l2(ansatz.eval(theta, eval_points), oracle(t, eval_points))
    return TrajectoryRecord(step, t, report, err, iters)


def integrate(theta0, ansatz, op: HeatOperator, bc: DirichletBC, samples: SampleSet,
              scfg: StepperConfig, icfg: IntegratorConfig, oracle: Oracle | None = None,
              eval_points=None, on_step: Callable | None = None):
    """Advance ``theta0`` from t = 0 to ``icfg.t_final``; returns (theta, trajectory).

    The trajectory starts with a t = 0 record. ``on_step(record, theta)`` is
    called after every record, including the initial one.
    """
    theta = np.array(theta0, dtype=float)
    X, B = samples.interior, samples.boundary

    init_report = None
    if oracle is not None:
        init_report = loss(ansatz.eval(theta, X), oracle(0.0, X), ansatz.eval(theta, B), bc, B)
    rec = _record(0, 0.0, init_report, 0, ansatz, theta, oracle, eval_points)
    trajectory = [rec]
    if on_step is not None:
        on_step(rec, theta)

    dt = icfg.dt
    for k in range(icfg.n_steps):
        if icfg.resample and k > 0:
            samples = make_samples(samples.n_interior, samples.n_boundary,
                                   samples.interior_seed + k, samples.boundary_seed + k)
            X, B = samples.interior, samples.boundary
        try:
            u_now = ansatz.eval(theta, X)
            rate_now = apply_operator(op, ansatz, theta, X)
            if icfg.scheme == "euler":
                out = teng_stepper(theta, u_now + dt * rate_now, samples, scfg, ansatz, bc)
                iters = scfg.n_it
            else:
                pred = teng_stepper(theta, u_now + dt * rate_now, samples, scfg, ansatz, bc)
                rate_pred = apply_operator(op, ansatz, pred.theta, X)
                # corrector restarts from the predictor's parameters
                out = teng_stepper(pred.theta, u_now + 0.5 * dt * (rate_now + rate_pred),
                                   samples, scfg, ansatz, bc)
                iters = 2 * scfg.n_it
        except StepperError as exc:
            exc.step = k + 1
            raise
        theta = out.theta
        rec = _record(k + 1, (k + 1) * dt, out.report, iters, ansatz, theta, oracle, eval_points)
        trajectory.append(rec)
        if on_step is not None:
            on_step(rec, theta)
    return theta, trajectory


def teng_euler(theta0, ansatz, op, bc, samples, scfg, icfg, oracle=None, eval_points=None,
               on_step=None):
    if icfg.scheme != "euler":
        raise ValueError("teng_euler needs scheme='euler'")
    return integrate(theta0, ansatz, op, bc, samples, scfg, icfg, oracle, eval_points, on_step)


def teng_heun(theta0, ansatz, op, bc, samples, scfg, icfg, oracle=None, eval_points=None,
              on_step=None):
    if icfg.scheme != "heun":
        raise ValueError("teng_heun needs scheme='heun'")
    return integrate(theta0, ansatz, op, bc, samples, scfg, icfg, oracle, eval_points, on_step)


@dataclass
class PretrainResult:
    theta: np.ndarray
    rel_l2: float
    loss: float
    rounds: int
    converged: bool


def pretrain(theta_init, u0: ModalExpansion, samples: SampleSet, scfg: StepperConfig, ansatz,
             max_rounds: int = 2000, tol: float = 1e-3, bc: DirichletBC | None = None
             ) -> PretrainResult:
    """Fit the ansatz to u0 until the sample-weighted relative L2 error is <= tol.

    Keeps the best parameters seen; falling short of tol is reported through
    ``converged`` rather than raised.
    """
    if not tol > 0:
        raise ValueError("tol must be positive")
    if bc is None:
        bc = DirichletBC(lambda_d=scfg.lambda_d)
    X, B = samples.interior, samples.boundary
    target = u0.eval(X)

    def measure(theta):
        u_in = ansatz.eval(theta, X)
        rep = loss(u_in, target, ansatz.eval(theta, B), bc, B)
        return relative_l2(u_in, target), rep.total

    theta = np.array(theta_init, dtype=float)
    err, tot = measure(theta)
    best = PretrainResult(theta, err, tot, 0, err <= tol)
    for rnd in range(1, max_rounds + 1):
        if best.converged:
            break
        theta = teng_stepper(theta, target, samples, scfg, ansatz, bc).theta
        err, tot = measure(theta)
        if err < best.rel_l2:
            best = PretrainResult(theta, err, tot, rnd, err <= tol)
        log.debug("pretrain round %d: rel_l2 %.3e loss %.3e", rnd, err, tot)
    if not best.converged:
        log.warning("pretraining stopped at rel_l2 %.3e (tolerance %.1e not met)",
                    best.rel_l2, tol)
    return best
