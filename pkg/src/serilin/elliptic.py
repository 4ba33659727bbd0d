"""Finite-difference Poisson solves for the p-Laplacian Dirichlet hierarchy.

The deformation of the Dirichlet problem produces one Poisson solve per
order: the zeroth order carries the full boundary data, every higher order
solves Lap u_n = -div F_n with zero boundary values.  The grid is
vertex-centered on [-1, 1] (or the square), second-order central stencils
throughout, and one factorization of the Laplacian is shared by all orders.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
import scipy.sparse as sp
from scipy.linalg import cho_solve_banded, cholesky_banded
from scipy.sparse.linalg import splu

from .errors import SolverError
from .hierarchy import HierarchyState, HomotopySpec
from .plap import GradientTable, plap_forcing


@dataclass
class DirichletProblem:
    """Dirichlet problem data on [-1, 1]^d with n_intervals cells per axis.

    ``source`` and ``boundary`` may be callables of the node coordinates,
    scalars, or arrays on the full vertex grid.  ``n_intervals`` even keeps
    the origin on the grid, where the deformation forcings have their
    removable singularity.
    """

    dimension: int
    n_intervals: int
    p: float
    kind: str = "ordinary"
    source: Callable | np.ndarray | float = -1.0
    boundary: Callable | np.ndarray | float = 0.0
    _factor: object = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if self.dimension not in (1, 2):
            raise ValueError("dimension must be 1 or 2")
        if self.n_intervals < 8:
            raise ValueError("need at least 8 grid intervals")
        if self.p <= 1:
            raise ValueError("p must exceed 1")
        if self.kind not in ("ordinary", "dual"):
            raise ValueError("kind must be 'ordinary' or 'dual'")

    @property
    def h(self) -> float:
        return 2.0 / self.n_intervals

    @property
    def axis(self) -> np.ndarray:
        return np.linspace(-1.0, 1.0, self.n_intervals + 1)

    @property
    def shape(self) -> tuple:
        return (self.n_intervals + 1,) * self.dimension

    def nodes(self):
        if self.dimension == 1:
            return (self.axis,)
        return np.meshgrid(self.axis, self.axis, indexing="ij")

    def field_from(self, value) -> np.ndarray:
        if callable(value):
            out = np.asarray(value(*self.nodes()), dtype=float)
        else:
            out = np.broadcast_to(np.asarray(value, dtype=float), self.shape)
        return np.array(out, dtype=float)

    def homotopy(self, max_order: int = 16) -> HomotopySpec:
        if self.kind == "ordinary":
            return HomotopySpec.plap_ordinary(self.p, max_order)
        return HomotopySpec.plap_dual(self.p, max_order)


def _boundary_mask(shape):
    mask = np.zeros(shape, dtype=bool)
    for ax in range(len(shape)):
        idx = [slice(None)] * len(shape)
        idx[ax] = 0
        mask[tuple(idx)] = True
        idx[ax] = -1
        mask[tuple(idx)] = True
    return mask


def _factorize(problem: DirichletProblem):
    n = problem.n_intervals - 1      # interior nodes per axis
    h2 = problem.h ** 2
    if problem.dimension == 1:
        # banded Cholesky of the negated (positive definite) operator
        ab = np.zeros((2, n))
        ab[0, 1:] = -1.0 / h2
        ab[1, :] = 2.0 / h2
        factor = cholesky_banded(ab)
        return ("banded", factor)
    main = sp.diags([-1.0, 2.0, -1.0], [-1, 0, 1], shape=(n, n)) / h2
    eye = sp.identity(n)
    lap = sp.kron(eye, main) + sp.kron(main, eye)
    return ("sparse", splu(lap.tocsc()))


def _interior_solve(problem: DirichletProblem, b_flat: np.ndarray) -> np.ndarray:
    if problem._factor is None:
        problem._factor = _factorize(problem)
    kind, factor = problem._factor
    if kind == "banded":
        return cho_solve_banded((factor, False), b_flat)
    return factor.solve(b_flat)


def _divergence(flux: np.ndarray, h: float) -> np.ndarray:
    """Centered divergence of a vector field on the full grid, at interior nodes."""
    d = flux.shape[0]
    if d == 1:
        return (flux[0, 2:] - flux[0, :-2]) / (2.0 * h)
    out = (flux[0, 2:, 1:-1] - flux[0, :-2, 1:-1]) / (2.0 * h)
    out += (flux[1, 1:-1, 2:] - flux[1, 1:-1, :-2]) / (2.0 * h)
    return out


def _interior(field: np.ndarray) -> np.ndarray:
    return field[tuple(slice(1, -1) for _ in field.shape)]


def solve_poisson_dirichlet(problem: DirichletProblem, rhs=None, flux=None,
                            boundary=None) -> np.ndarray:
    """Solve Lap u = rhs (or = div flux) with Dirichlet data on the full grid.

    Exactly one of ``rhs`` (scalar field) and ``flux`` (vector field whose
    centered divergence is the right-hand side) must be given.  Returns the
    field on the full vertex grid with boundary values filled in.  The
    discrete residual is checked after the direct solve.
    """
    if (rhs is None) == (flux is None):
        raise ValueError("give exactly one of rhs and flux")
    g = problem.field_from(problem.boundary if boundary is None else boundary)
    if rhs is not None:
        r = problem.field_from(rhs)
        r_int = _interior(r) if r.shape == problem.shape else r
    else:
        flux = np.asarray(flux, dtype=float)
        if flux.shape != (problem.dimension,) + problem.shape:
            raise ValueError("flux must be a vector field on the full grid")
        r_int = _divergence(flux, problem.h)
    if not np.isfinite(r_int).all():
        raise ValueError("right-hand side contains non-finite values")

    h2 = problem.h ** 2
    b = -np.array(r_int, dtype=float)    # solve the negated SPD system
    if problem.dimension == 1:
        b[0] += g[0] / h2
        b[-1] += g[-1] / h2
    else:
        b[0, :] += g[0, 1:-1] / h2
        b[-1, :] += g[-1, 1:-1] / h2
        b[:, 0] += g[1:-1, 0] / h2
        b[:, -1] += g[1:-1, -1] / h2

    sol = _interior_solve(problem, b.ravel()).reshape(r_int.shape)
    u = g.copy()
    u[tuple(slice(1, -1) for _ in problem.shape)] = sol

    lap = _laplacian_interior(u, problem.h)
    scale = max(float(np.abs(r_int).max()), float(np.abs(u).max()) / h2, 1.0)
    if float(np.abs(lap - r_int).max()) > 1e-10 * scale:
        raise SolverError("direct Poisson solve left a large residual")
    return u


def _laplacian_interior(u: np.ndarray, h: float) -> np.ndarray:
    if u.ndim == 1:
        return (u[2:] - 2.0 * u[1:-1] + u[:-2]) / h ** 2
    out = (u[2:, 1:-1] - 2.0 * u[1:-1, 1:-1] + u[:-2, 1:-1]) / h ** 2
    out += (u[1:-1, 2:] - 2.0 * u[1:-1, 1:-1] + u[1:-1, :-2]) / h ** 2
    return out


def grid_gradient(u: np.ndarray, h: float) -> np.ndarray:
    """Second-order gradient on the full grid: centered inside, one-sided at edges."""

    def plane(ax, i):
        s = [slice(None)] * u.ndim
        s[ax] = i
        return tuple(s)

    grads = []
    for ax in range(u.ndim):
        g = (np.roll(u, -1, axis=ax) - np.roll(u, 1, axis=ax)) / (2.0 * h)
        g[plane(ax, 0)] = (-3.0 * u[plane(ax, 0)] + 4.0 * u[plane(ax, 1)]
                           - u[plane(ax, 2)]) / (2.0 * h)
        g[plane(ax, -1)] = (3.0 * u[plane(ax, -1)] - 4.0 * u[plane(ax, -2)]
                            + u[plane(ax, -3)]) / (2.0 * h)
        grads.append(g)
    return np.stack(grads)


def solve_dirichlet_hierarchy(problem: DirichletProblem, order: int) -> HierarchyState:
    """Solve the Poisson hierarchy of the deformed Dirichlet problem.

    The zeroth order carries the problem's boundary data; orders n >= 1 solve
    Lap u_n = -div F_n with zero boundary values, F_n assembled from the
    gradients of the lower orders.  Returns all coefficient fields as a
    static hierarchy state.
    """
    if problem.kind == "ordinary" and not (1.0 < problem.p < 3.0):
        warnings.warn("ordinary expansion outside p in (1, 3); the series "
                      "need not converge", stacklevel=2)
    spec = problem.homotopy(max_order=max(order, 1))
    u0 = solve_poisson_dirichlet(problem, rhs=problem.source)
    coeffs = [u0]
    grads = [grid_gradient(u0, problem.h)]
    axes = (problem.axis,) * problem.dimension
    for n in range(1, order + 1):
        table = GradientTable(grads, axes=axes)
        try:
            forcing = plap_forcing(n, table, spec)
        except Exception as exc:
            raise SolverError(f"forcing assembly failed at order {n}: {exc}",
                              order=n) from exc
        un = solve_poisson_dirichlet(problem, flux=-forcing, boundary=0.0)
        coeffs.append(un)
        grads.append(grid_gradient(un, problem.h))
    return HierarchyState(tuple(coeffs), time=0.0,
                          grid=("dirichlet", problem.dimension,
                                problem.n_intervals))
