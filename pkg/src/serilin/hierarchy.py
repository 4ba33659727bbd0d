"""Deformation families, hierarchy state, and the shared stepping driver.

A nonlinear advection-diffusion equation is deformed by a parameter delta so
that delta=0 is linear.  Expanding the solution as ``u = sum_n delta^n u_n``
turns the nonlinear problem into a hierarchy of linear forced equations; the
types here hold the coefficient fields u_0..u_N and the operations assemble
forcings, partial sums, and the refeeding restart used by every
time-dependent solver in the package.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import GridMismatchError, SolverError

BURGERS_LINEAR = "BurgersLinear"
PLAP_ORDINARY = "PLapOrdinary"
PLAP_DUAL = "PLapDual"

_KINDS = (BURGERS_LINEAR, PLAP_ORDINARY, PLAP_DUAL)


@dataclass(frozen=True)
class HomotopySpec:
    """Which deformation family is in play, and its derivative data at 0.

    ``kind`` selects the family.  For the Burgers linear deformation,
    ``advection_speed`` and ``reynolds`` parameterize the linear member and
    ``target_delta`` is 1 when solving Burgers proper.  For the p-Laplacian
    families, ``homotopy_derivs[j-1]`` holds the j-th derivative of the
    exponent deformation at 0 and ``target_delta`` is the evaluation point
    reproducing the requested p.
    """

    kind: str
    advection_speed: float = 0.0
    reynolds: float = 1.0
    target_delta: float = 1.0
    homotopy_derivs: tuple[float, ...] = ()

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValueError(f"unknown homotopy kind {self.kind!r}")
        if self.kind == BURGERS_LINEAR:
            if self.reynolds <= 0:
                raise ValueError("reynolds must be positive")
        else:
            d = self.homotopy_derivs
            if not d:
                raise ValueError("p-Laplacian homotopies need derivative data")
            if self.kind == PLAP_ORDINARY:
                if d[0] != 1.0 or any(v != 0.0 for v in d[1:]):
                    raise ValueError("ordinary homotopy has h'(0)=1 and 0 beyond")
            else:
                for j, v in enumerate(d, start=1):
                    if v != float((-1) ** j * math.factorial(j)):
                        raise ValueError("dual homotopy requires h^(j)(0) = (-1)^j j!")

    @classmethod
    def burgers_linear(cls, advection_speed, reynolds, target_delta=1.0):
        return cls(BURGERS_LINEAR, advection_speed=advection_speed,
                   reynolds=reynolds, target_delta=target_delta)

    @classmethod
    def plap_ordinary(cls, p, max_order=16):
        derivs = (1.0,) + (0.0,) * (max_order - 1)
        return cls(PLAP_ORDINARY, target_delta=p - 2.0, homotopy_derivs=derivs)

    @classmethod
    def plap_dual(cls, p, max_order=16):
        derivs = tuple(float((-1) ** j * math.factorial(j))
                       for j in range(1, max_order + 1))
        return cls(PLAP_DUAL, target_delta=(2.0 - p) / (p - 1.0),
                   homotopy_derivs=derivs)


@dataclass(frozen=True)
class HierarchyState:
    """Ordered coefficient fields u_0..u_N at a common time.

    All coefficient fields share one grid; ``grid`` is opaque metadata used
    only for equality checks between states and fields.
    """

    coeffs: tuple[np.ndarray, ...]
    time: float = 0.0
    grid: object = None

    def __post_init__(self):
        if not self.coeffs:
            raise ValueError("need at least the zeroth-order field")
        if self.time < 0:
            raise ValueError("time must be non-negative")
        object.__setattr__(self, "coeffs", tuple(np.asarray(c) for c in self.coeffs))
        shape = self.coeffs[0].shape
        for c in self.coeffs[1:]:
            if c.shape != shape:
                raise GridMismatchError("coefficient fields live on different grids")

    @property
    def order(self) -> int:
        return len(self.coeffs) - 1

    @classmethod
    def from_initial(cls, u0, order, grid=None):
        """State at t=0 with u_0 = ``u0`` and u_n = 0 for n >= 1."""
        u0 = np.asarray(u0, dtype=float)
        zeros = tuple(np.zeros_like(u0) for _ in range(order))
        return cls((u0,) + zeros, time=0.0, grid=grid)


@dataclass(frozen=True)
class PartialSum:
    """Evaluation of sum_n delta^n u_n at a fixed delta."""

    delta: float
    values: np.ndarray


def burgers_forcing(k: int, coeffs: Sequence[np.ndarray], v: float) -> np.ndarray:
    """Order-k forcing of the Burgers linear-deformation hierarchy.

    F_1 = -v u_0 + u_0^2/2 and, for k >= 2,
    F_k = (u_0 - v) u_{k-1} + sum over lower-order pair products u_m u_{k-1-m},
    with the square term u_{(k-1)/2}^2/2 appearing when k is odd.
    """
    if k < 1:
        raise ValueError("forcing order k must be >= 1")
    if len(coeffs) < k:
        raise ValueError(f"need coefficients through order {k - 1}, got {len(coeffs)}")
    shape = np.shape(coeffs[0])
    for c in coeffs[1:k]:
        if np.shape(c) != shape:
            raise GridMismatchError("coefficient fields live on different grids")
    u = coeffs
    if k == 1:
        return -v * u[0] + 0.5 * u[0] ** 2
    f = (u[0] - v) * u[k - 1]
    for m in range(1, (k - 2) // 2 + 1):
        f = f + u[m] * u[k - 1 - m]
    if (k - 1) % 2 == 0 and k >= 3:
        f = f + 0.5 * u[(k - 1) // 2] ** 2
    return f


def partial_sum(state: HierarchyState, delta: float) -> PartialSum:
    """Pointwise sum_n delta^n u_n, evaluated by Horner's rule."""
    acc = np.array(state.coeffs[-1], dtype=float, copy=True)
    for c in state.coeffs[-2::-1]:
        acc *= delta
        acc += c
    return PartialSum(delta=delta, values=acc)


def refeed(state: HierarchyState, delta: float) -> HierarchyState:
    """Restart the hierarchy at the current time from its own partial sum.

    The returned state has u_0 equal to ``partial_sum(state, delta)`` and all
    higher orders zeroed; order and time are preserved.
    """
    s = partial_sum(state, delta).values
    zeros = tuple(np.zeros_like(s) for _ in range(state.order))
    return HierarchyState((s,) + zeros, time=state.time, grid=state.grid)


# A stepper advances one linear forced PDE over dt:
#   stepper(order, coeff, forcing_field_or_None, dt) -> new coeff.
# A forcing builder sees the working coefficient list, in which orders below
# the current one are already advanced; whether it reads those or a snapshot
# taken at step start is the integrator's contract.
Stepper = Callable[[int, np.ndarray, "np.ndarray | None", float], np.ndarray]
ForcingBuilder = Callable[[int, list], "np.ndarray | None"]


def step_hierarchy(state: HierarchyState, dt: float, stepper: Stepper,
                   forcing: ForcingBuilder | None = None) -> HierarchyState:
    """Advance all orders over one time step, lowest order first.

    Orders are advanced sequentially (order n forcing may only involve
    orders below n).  Stepper failures are re-raised with the offending
    order attached.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    working = list(state.coeffs)
    for n in range(len(working)):
        f = forcing(n, working) if forcing is not None else None
        try:
            working[n] = stepper(n, working[n], f, dt)
        except SolverError:
            raise
        except Exception as exc:
            raise SolverError(f"stepper failed at order {n}: {exc}", order=n) from exc
    return HierarchyState(tuple(working), time=state.time + dt, grid=state.grid)


def advance_with_refeeding(state: HierarchyState, dt: float, n_steps: int,
                           stepper: Stepper, forcing: ForcingBuilder | None = None,
                           refeed_every: int = 1, delta: float = 1.0,
                           callback=None) -> HierarchyState:
    """Run ``n_steps`` hierarchy steps, refeeding every ``refeed_every`` steps.

    ``refeed_every <= 0`` disables refeeding.  ``callback(state, step_index)``
    fires after each step (post refeed) for sampling or divergence checks.
    """
    for i in range(1, n_steps + 1):
        state = step_hierarchy(state, dt, stepper, forcing)
        if refeed_every > 0 and i % refeed_every == 0:
            state = refeed(state, delta)
        if callback is not None:
            callback(state, i)
    return state
