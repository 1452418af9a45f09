"""Fast invariant checks behind ``tengpp selftest`` (a few seconds total)."""
from __future__ import annotations

import numpy as np
from scipy.special import jv

from .ansatz import FrozenDifferenceAnsatz, LinearAdapter, MLPAnsatz, ModelSpec, init_params
from .engine import IntegratorConfig, StepperConfig, integrate
from .pde import DirichletBC, HeatOperator, relative_l2
from .sampling import make_samples
from .special import (EXPERIMENT1_TERMS, DiskHarmonic, ExactSolution, bessel_j, bessel_zero,
                      experiment1_expansion)


def _zeros_ok():
    worst = max(abs(jv(m, bessel_zero(m, n))) for m, n, _ in EXPERIMENT1_TERMS)
    return worst <= 1e-12, f"max |J_m(lambda_mn)| = {worst:.1e}"


def _bessel_ok():
    x = np.linspace(0.0, 50.0, 2001)
    worst = max(np.abs(bessel_j(m, x) - jv(m, x)).max() for m in range(11))
    return worst <= 1e-12, f"max |J_m - scipy| = {worst:.1e}"


def _heat_residual_ok():
    sol = ExactSolution(experiment1_expansion(), 0.1)
    rng = np.random.default_rng(0)
    r = 0.95 * np.sqrt(rng.uniform(size=200))
    a = rng.uniform(0, 2 * np.pi, 200)
    X = np.stack([r * np.cos(a), r * np.sin(a)], axis=1)
    h = 1e-4
    worst = 0.0
    for t in (0.1, 1.0):
        ut = (sol.eval(t + h, X) - sol.eval(t - h, X)) / (2 * h)
        worst = max(worst, np.abs(ut - 0.1 * sol.laplacian(t, X)).max())
    return worst <= 1e-4, f"max |u_t - nu lap u| = {worst:.1e}"


def _jacobian_ok():
    spec = ModelSpec((8, 8), init_seed=7)
    net = MLPAnsatz(spec)
    th = init_params(spec) + 0.1
    X = np.array([[0.3, -0.2], [-0.5, 0.4]])
    J = net.param_jacobian(th, X)
    v = np.random.default_rng(1).standard_normal(spec.n_params)
    eps = 1e-5
    fd = (net.eval(th + eps * v, X) - net.eval(th - eps * v, X)) / (2 * eps)
    err = np.abs(fd - J @ v).max() / np.abs(J @ v).max()
    return err <= 1e-6, f"directional derivative rel. error {err:.1e}"


def _linear_steps_ok():
    h = DiskHarmonic.of(0, 1)
    ad = LinearAdapter([h])
    samples = make_samples(512, 64, seed=1)
    k = 0.1 * h.lam**2 * 0.01
    worst = 0.0
    for scheme, factor in (("euler", 1 - k), ("heun", 1 - k + k * k / 2)):
        th, _ = integrate([1.0], ad, HeatOperator(0.1), DirichletBC(), samples,
                          StepperConfig(n_it=1, ridge=0.0), IntegratorConfig(0.01, 0.01, scheme))
        worst = max(worst, abs(th[0] - factor))
    return worst <= 1e-9, f"one-step amplification error {worst:.1e}"


def _frozen_ok():
    u0 = experiment1_expansion()
    spec = ModelSpec((16, 16))
    th = init_params(spec)
    fd = FrozenDifferenceAnsatz(MLPAnsatz(spec), th, u0)
    X = make_samples(1000, 8, seed=3).interior
    err = relative_l2(fd.eval(th, X), u0.eval(X))
    return err <= 1e-10, f"rel. L2 at t=0 {err:.1e}"


CHECKS = [
    ("bessel values", _bessel_ok),
    ("bessel zeros", _zeros_ok),
    ("heat residual of exact solution", _heat_residual_ok),
    ("parameter jacobian", _jacobian_ok),
    ("euler/heun modal factors", _linear_steps_ok),
    ("frozen-difference initial state", _frozen_ok),
]


def run_selftest(verbose: bool = True) -> bool:
    all_ok = True
    for name, check in CHECKS:
        ok, detail = check()
        all_ok &= ok
        if verbose:
            print(f"{'PASS' if ok else 'FAIL'}  {name}: {detail}")
    return all_ok
