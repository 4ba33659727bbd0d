"""serilin: series-linearization solvers for nonlinear advection-diffusion.

Nonlinear problems (Burgers advection, p-Laplacian diffusion) are deformed
into families that are linear at parameter zero; expanding in the parameter
yields hierarchies of linear forced PDEs whose partial sums approximate the
nonlinear solution.  The package provides the hierarchy machinery, spectral,
finite-difference and finite-element solvers, closed-form reference
solutions, convergence diagnostics, and a reproducible experiment runner.
"""

__version__ = "0.1.0"

from .errors import (
    ConfigError,
    DomainError,
    GridMismatchError,
    SerilinError,
    SingularEvaluationError,
    SingularForcingError,
    SolverError,
)
from .hierarchy import (
    HierarchyState,
    HomotopySpec,
    PartialSum,
    advance_with_refeeding,
    burgers_forcing,
    partial_sum,
    refeed,
    step_hierarchy,
)

__all__ = [
    "ConfigError",
    "DomainError",
    "GridMismatchError",
    "SerilinError",
    "SingularEvaluationError",
    "SingularForcingError",
    "SolverError",
    "HierarchyState",
    "HomotopySpec",
    "PartialSum",
    "advance_with_refeeding",
    "burgers_forcing",
    "partial_sum",
    "refeed",
    "step_hierarchy",
    "__version__",
]
