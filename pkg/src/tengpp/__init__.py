"""Natural-gradient sequential-in-time neural solver for the heat equation
on the unit disk, with Dirichlet boundary penalties and an exact Bessel
harmonic reference solution."""

from .ansatz import (FrozenDifferenceAnsatz, LinearAdapter, MLPAnsatz, ModelSpec, init_params,
                     load_snapshot, pack, save_snapshot, unpack)
from .engine import (IntegratorConfig, StepperConfig, StepperError, TrajectoryRecord, integrate,
                     pretrain, teng_euler, teng_heun, teng_stepper)
from .experiment import RunConfig, compare, parse_config, run_experiment
from .linalg import LsqSolution, gram, solve_ridge_lsq, solve_spd
from .pde import DirichletBC, HeatOperator, LossReport, loss, relative_l2
from .sampling import SampleSet, make_grid, make_samples, sample_circle, sample_disk
from .special import (DiskHarmonic, ExactSolution, ModalExpansion, bessel_j, bessel_zero,
                      experiment1_expansion, single_mode_expansion)

__version__ = "0.1.0"
