"""Convergence order of the two time integrators on a linear model.

With u = c Z_01 the least-squares projection is exact, so one TENG step
reduces to the classical update of the modal ODE c' = -nu lam^2 c. Halving
dt should halve the Euler error and quarter the Heun error.
"""
import math

from tengpp import (DirichletBC, DiskHarmonic, HeatOperator, IntegratorConfig, LinearAdapter,
                    StepperConfig, integrate, make_samples)

nu, T = 0.1, 0.5
z = DiskHarmonic.of(0, 1)
model = LinearAdapter([z])
samples = make_samples(2048, 256)
exact = math.exp(-nu * z.lam**2 * T)

for scheme in ("euler", "heun"):
    prev = None
    print(scheme)
    for dt in (0.05, 0.025, 0.0125, 0.00625):
        theta, _ = integrate([1.0], model, HeatOperator(nu), DirichletBC(), samples,
                             StepperConfig(), IntegratorConfig(dt, T, scheme))
        err = abs(theta[0] - exact)
        order = "" if prev is None else f"  observed order {math.log2(prev / err):.3f}"
        print(f"  dt = {dt:<8} error = {err:.3e}{order}")
        prev = err
