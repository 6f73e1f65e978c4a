"""Direct FFT-diagonalization solvers for 27-point compact stencils.

The package solves the block-structured linear systems arising from compact
second/fourth/sixth-order approximations of the 3D wave (Helmholtz) equation
with a z-dependent coefficient, and a fourth-order compact approximation of
the convection-diffusion equation, on rectangular boxes with Dirichlet data.

The solve is direct: a 2D sine transform decouples the horizontal planes,
batched Thomas sweeps handle the resulting tridiagonal systems along z, and
an inverse transform finishes. Sequential, multi-threaded, and partitioned
(message-passing style) execution modes produce identical answers.
"""

from .errors import (ExchangeError, InvalidPartitionError, SingularSystemError,
                     UnsupportedSchemeError)
from .grid import (CoefficientProfile, Domain, Grid3D, constant_profile,
                   make_grid, sample_profile)
from .stencil import (SchemeKind, StencilCoefficients, coefficient_table,
                      coefficients_convdiff, coefficients_for,
                      coefficients_fourth, coefficients_second,
                      coefficients_sixth, eigenvalue)
from .assembly import (BoundaryData, Field3D, SourceSpec, apply_stencil,
                       build_rhs, fold_dirichlet, residual_l2)
from .spectral import (TransformPlan, dst2d, dst2d_reference, make_plan,
                       transform_stack)
from .tridiag import SpectralSystem, assemble_system, solve_all, solve_system
from .solver import (PER_LINE_BATCH, PER_PLANE, ExchangePlan, Partitioned,
                     PartitionPlan, PhaseTimings, Sequential, SharedWorkers,
                     SolverConfig, exchange_forward, exchange_inverse,
                     make_exchange_plan, make_partition_plan, plan_partition,
                     solve_direct, solve_discrete, solve_with_timings)
from .problems import (ProblemSpec, convdiff_problem, error_metrics,
                       helmholtz_problem)
from .harness import (MetricsRow, emit_table, run_convergence, run_scaling)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
