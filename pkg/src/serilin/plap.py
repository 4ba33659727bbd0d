"""Forcing assembly for the p-Laplacian deformation hierarchies.

Expanding |grad u|^h(delta) in delta produces, at order n, a vector forcing
F_n = sum_k grad u_{n-k} G_k where the scalar fields G_k combine powers of
log|grad u_0| and gradient pair products with coefficients indexed by integer
partitions.  The combinatorics are assembled exactly (rational arithmetic)
and the fields evaluated with numpy; nodes where grad u_0 vanishes use the
limit convention that any term still carrying a gradient factor is zero.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .errors import DomainError, SingularForcingError
from .hierarchy import PLAP_DUAL, PLAP_ORDINARY, HomotopySpec

MAX_PARTITION_ORDER = 24

# |grad u_0| below this absolute floor is treated as an exact zero: logs stay
# finite and the squared norms stay above the subnormal range.
DEGENERATE_EPS = 1e-140



@dataclass(frozen=True)
class Partition:
    """Multiplicity vector (p_1, ..., p_n) with sum_j j p_j = n."""

    mults: tuple[int, ...]

    @property
    def norm(self) -> int:
        return sum(self.mults)

    @property
    def weight(self) -> int:
        return sum(j * p for j, p in enumerate(self.mults, start=1))


def _partition_lists(n, max_part):
    if n == 0:
        yield []
        return
    for part in range(min(n, max_part), 0, -1):
        for rest in _partition_lists(n - part, part):
            yield [part] + rest


@lru_cache(maxsize=None)
def enumerate_partitions(n: int) -> tuple[Partition, ...]:
    """All integer partitions of n as multiplicity vectors of length n."""
    if n < 1 or n > MAX_PARTITION_ORDER:
        raise ValueError(f"partition order must lie in 1..{MAX_PARTITION_ORDER}")
    out = []
    for parts in _partition_lists(n, n):
        mults = [0] * n
        for part in parts:
            mults[part - 1] += 1
        out.append(Partition(tuple(mults)))
    return tuple(out)


def _alpha(m: int, part: Partition) -> Fraction:
    # falling factorial m (m-1) ... over the multiplicity factorials
    num = 1
    for q in range(part.norm):
        num *= m - q
    den = 1
    for p in part.mults:
        den *= math.factorial(p)
    return Fraction(num, den)


def _beta(part: Partition) -> Fraction:
    num = (-1) ** (part.norm - 1) * math.factorial(part.norm - 1)
    den = 1
    for p in part.mults:
        den *= math.factorial(p)
    return Fraction(num, den)


@lru_cache(maxsize=None)
def _exponent_power_coefficients(derivs: tuple, ell: int) -> tuple:
    """Coefficients c_{ell,m}: the delta^ell coefficient of h(delta)^m / m!.

    Sparse list of (m, value) for m = 1..ell, built from the derivative data
    h^(j)(0) = derivs[j-1] by partition enumeration.
    """
    by_m = {}
    for part in enumerate_partitions(ell):
        m = part.norm
        coeff = 1.0
        frac = Fraction(1)
        for j, p in enumerate(part.mults, start=1):
            if p:
                coeff *= (derivs[j - 1] / math.factorial(j)) ** p
                frac /= math.factorial(p)
        by_m[m] = by_m.get(m, 0.0) + float(frac) * coeff
    return tuple(sorted(by_m.items()))


@dataclass
class GradientTable:
    """Gradients grad u_0..grad u_{n-1} on a shared grid, with cached products.

    Each gradient is an array of shape (d, *grid).  ``axes`` optionally holds
    the node coordinates per axis for error reporting.
    """

    grads: list
    axes: tuple = ()
    _pairs: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        self.grads = [np.asarray(g, dtype=float) for g in self.grads]
        shape = self.grads[0].shape
        for g in self.grads[1:]:
            if g.shape != shape:
                raise ValueError("gradient fields live on different grids")

    @property
    def dim(self) -> int:
        return self.grads[0].shape[0]

    def pair(self, a: int, b: int) -> np.ndarray:
        """Cached pointwise inner product of grad u_a and grad u_b."""
        key = (a, b) if a <= b else (b, a)
        if key not in self._pairs:
            self._pairs[key] = np.einsum("c...,c...->...",
                                         self.grads[key[0]], self.grads[key[1]])
        return self._pairs[key]

    def degenerate_mask(self) -> np.ndarray:
        return self.pair(0, 0) <= DEGENERATE_EPS ** 2

    def node_coordinates(self, flat_mask):
        idx = np.argwhere(flat_mask)
        if not self.axes:
            return [tuple(i) for i in idx[:8]]
        return [tuple(self.axes[a][i] for a, i in enumerate(ix)) for ix in idx[:8]]


def _check_degenerate(n, table: GradientTable):
    """Where grad u_0 vanishes outright, every lower gradient must vanish too.

    Nodes below the relative resolution floor are zeroed without complaint;
    only hard zeros of grad u_0 against a non-vanishing higher gradient are a
    genuine singularity of the forcing.
    """
    mask = table.degenerate_mask()
    if not mask.any():
        return mask
    hard = table.pair(0, 0) <= DEGENERATE_EPS ** 2
    if hard.any():
        for j in range(1, n):
            mag2 = table.pair(j, j)
            tol = max(DEGENERATE_EPS, 1e-8 * math.sqrt(float(mag2.max()))) ** 2
            bad = hard & (mag2 > tol)
            if bad.any():
                raise SingularForcingError(
                    f"order-{n} forcing is singular where grad u_0 vanishes "
                    f"but grad u_{j} does not",
                    nodes=table.node_coordinates(bad))
    return mask


def plap_forcing(n: int, table: GradientTable, spec: HomotopySpec) -> np.ndarray:
    """Order-n vector forcing F_n of the p-Laplacian deformation hierarchy.

    Returns the field with (d/dt - Lap) u_n = div F_n (evolution) or
    Lap u_n = -div F_n (Dirichlet).  Needs gradients through order n-1 and
    homotopy derivatives through order n.
    """
    if n < 1:
        raise ValueError("forcing order must be >= 1")
    if spec.kind not in (PLAP_ORDINARY, PLAP_DUAL):
        raise ValueError("forcing is defined for the p-Laplacian homotopies")
    if len(table.grads) < n:
        raise ValueError(f"need gradients through order {n - 1}")
    if len(spec.homotopy_derivs) < n:
        raise ValueError(f"need homotopy derivatives through order {n}")

    mask = _check_degenerate(n, table)
    q = table.pair(0, 0)
    safe_q = np.where(mask, 1.0, q)
    log0 = np.where(mask, 0.0, 0.5 * np.log(safe_q))

    # rho_i = (delta^i coefficient of |grad u(delta)|^2) / |grad u_0|^2
    rho = {}
    for i in range(1, n):
        p_i = sum(table.pair(i - a, a) for a in range(i + 1))
        rho[i] = np.where(mask, 0.0, p_i / safe_q)

    # ell_j = delta^j coefficient of log|grad u(delta)|
    ell = {}
    for j in range(1, n):
        acc = np.zeros_like(q)
        for part in enumerate_partitions(j):
            term = float(_beta(part)) * np.ones_like(q)
            for i, r in enumerate(part.mults, start=1):
                if r:
                    term = term * rho[i] ** r
            acc += term
        ell[j] = 0.5 * acc

    def log_power_coeff(nn, m):
        # delta^nn coefficient of log^m |grad u(delta)|
        if nn == 0:
            return log0 ** m
        acc = np.zeros_like(q)
        for part in enumerate_partitions(nn):
            if part.norm > m:
                continue
            term = float(_alpha(m, part)) * log0 ** (m - part.norm)
            for j, p in enumerate(part.mults, start=1):
                if p:
                    term = term * ell[j] ** p
            acc += term
        return acc

    # G_k = delta^k coefficient of |grad u(delta)|^h(delta); the 1/m! of the
    # exponential series is carried by _exponent_power_coefficients.
    g_fields = {}
    for k in range(1, n + 1):
        acc = np.zeros_like(q)
        for lelle in range(1, k + 1):
            for m, coeff in _exponent_power_coefficients(spec.homotopy_derivs, lelle):
                acc += coeff * log_power_coeff(k - lelle, m)
        g_fields[k] = acc

    f = np.zeros_like(table.grads[0])
    for k in range(1, n + 1):
        f += table.grads[n - k] * g_fields[k][None, ...]
    f[:, mask] = 0.0
    return f


# ----------------------------------------------------------------------------
# Free-space reference solution by quadrature in time
# ----------------------------------------------------------------------------

def heat_semigroup_1d(values, y, tau, x_eval):
    """Convolve grid samples with the 1D heat kernel at time tau (trapezoid)."""
    y = np.asarray(y)
    x_eval = np.asarray(x_eval)
    z = x_eval[:, None] - y[None, :]
    kern = np.exp(-z * z / (4.0 * tau)) / np.sqrt(4.0 * np.pi * tau)
    return np.trapezoid(kern * np.asarray(values)[None, :], y, axis=1)


def duhamel_reference(n: int, forcing_history, t: float, x,
                      window: float = 12.0, time_nodes: int = 64,
                      space_points: int = 4001):
    """Quadrature-in-time reference for one hierarchy order on the free line.

    Evaluates int_0^t d/dx[heat kernel](t-s) * F_n(s, .) ds by Gauss-Legendre
    in s (with an endpoint-clustering substitution) and trapezoid convolution
    in space.  ``forcing_history(s)`` must return a callable y -> F_n(s, y)
    that decays inside the window.
    """
    if n < 1:
        raise ValueError("hierarchy orders >= 1 carry forcing")
    if t <= 0:
        raise DomainError("needs t > 0")
    x = np.asarray(x, dtype=float)
    y = np.linspace(-window, window, space_points)
    base, wts = np.polynomial.legendre.leggauss(time_nodes)
    sigma = 0.5 * (base + 1.0)
    wsig = 0.5 * wts
    out = np.zeros_like(x)
    for sg, ww in zip(sigma, wsig):
        s = t * sg * sg
        jac = 2.0 * t * sg
        fvals = np.asarray(forcing_history(s)(y))
        edge = max(abs(fvals[0]), abs(fvals[-1]))
        if edge > 1e-8 * max(np.abs(fvals).max(), 1e-300):
            raise DomainError("forcing does not decay inside the window")
        tau = t - s
        if tau <= 0:
            continue
        z = x[:, None] - y[None, :]
        dkern = (-z / (2.0 * tau)) * np.exp(-z * z / (4.0 * tau)) \
            / np.sqrt(4.0 * np.pi * tau)
        out += ww * jac * np.trapezoid(dkern * fvals[None, :], y, axis=1)
    return out
