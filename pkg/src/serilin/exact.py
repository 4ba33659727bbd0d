"""Closed-form reference solutions and quadrature oracles.

Everything here is a deterministic pure function used to validate the
numerical solvers: the Burgers deformation solved exactly for a point-mass
initial condition on the line and for a cosine-squared initial condition on
the circle, a quadrature oracle for arbitrary integrable line data, the
p-Laplacian Dirichlet ball solution with its expansion coefficients, and the
self-similar point-source solution of the p-Laplacian evolution equation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.special import betaln, erf, erfc, gammaln, iv

from .errors import DomainError, SingularEvaluationError

TWO_PI = 2.0 * np.pi


def heat_kernel(t, x, d: int = 1):
    """Gaussian heat kernel exp(-|x|^2/4t) / (4 pi t)^(d/2); x is a radius."""
    if t <= 0:
        raise DomainError("heat kernel needs t > 0")
    x = np.asarray(x, dtype=float)
    return np.exp(-(x * x) / (4.0 * t)) / (4.0 * np.pi * t) ** (d / 2.0)


# ----------------------------------------------------------------------------
# Burgers deformation, point-mass initial condition on the line
# ----------------------------------------------------------------------------

def burgers_delta_exact(t, x, delta, v, reynolds):
    """Exact solution of the deformed Burgers equation from a point mass.

    Evaluates the closed erfc form, whose initial datum is a point mass of
    weight two (its delta -> 0 limit is the advected Gaussian
    sqrt(R/(pi t)) exp(-R (x - v t)^2 / 4t), twice the heat-advection
    kernel).  ``delta`` may be complex.  The overflow-prone exponential
    factor is rescaled so that moderate |delta| * reynolds stays finite.
    """
    if t <= 0:
        raise DomainError("point-mass solution needs t > 0")
    x = np.asarray(x, dtype=float)
    r = reynolds
    if delta == 0:
        z = x - v * t
        return np.sqrt(r / (np.pi * t)) * np.exp(-r * z * z / (4.0 * t))
    a = delta * r
    z = x - (1.0 - delta) * v * t
    zeta = z / (2.0 * np.sqrt(t / r))
    gauss = np.exp(-(zeta * zeta))
    scale = delta * np.sqrt(np.pi * r * t)
    if np.real(a) > 0:
        # multiply through by exp(-a) to keep both sides bounded
        em = -np.expm1(-a)
        num = 2.0 * em * gauss
        den = scale * (2.0 * np.exp(-a) + em * erfc(zeta))
    else:
        ep = np.expm1(a)
        num = 2.0 * ep * gauss
        den = scale * (2.0 + ep * erfc(zeta))
    return num / den


def burgers_delta_u1(t, x, v, reynolds):
    """First expansion coefficient of the point-mass solution in delta.

    sqrt(R^3/(4 pi t)) exp(-R (x-vt)^2/4t) (erf((x-vt)/(2 sqrt(t/R))) - v(x-vt)).
    """
    if t <= 0:
        raise DomainError("point-mass solution needs t > 0")
    x = np.asarray(x, dtype=float)
    r = reynolds
    z = x - v * t
    zeta = z / (2.0 * np.sqrt(t / r))
    return (np.sqrt(r ** 3 / (4.0 * np.pi * t)) * np.exp(-(zeta * zeta))
            * (erf(zeta) - v * z))


def fd_weights(nodes, m: int) -> np.ndarray:
    """Finite-difference weights for the m-th derivative at 0 (Fornberg)."""
    nodes = np.asarray(nodes, dtype=float)
    n = len(nodes)
    c = np.zeros((m + 1, n))
    c[0, 0] = 1.0
    c1 = 1.0
    c4 = nodes[0]
    for i in range(1, n):
        mn = min(i, m)
        c2 = 1.0
        c5 = c4
        c4 = nodes[i]
        for j in range(i):
            c3 = nodes[i] - nodes[j]
            c2 *= c3
            if j == i - 1:
                for k in range(mn, 0, -1):
                    c[k, i] = c1 * (k * c[k - 1, i - 1] - c5 * c[k, i - 1]) / c2
                c[0, i] = -c1 * c5 * c[0, i - 1] / c2
            for k in range(mn, 0, -1):
                c[k, j] = (c4 * c[k, j] - k * c[k - 1, j]) / c3
            c[0, j] = c4 * c[0, j] / c3
        c1 = c2
    return c[m]


def fd_taylor_coefficients(f: Callable, n_max: int, step: float = 0.4,
                           levels: int = 3) -> list:
    """Taylor coefficients of f about 0 by central differences with Richardson.

    Returns [f(0), f'(0), f''(0)/2!, ...] up to order ``n_max``.  Each
    derivative uses the minimal symmetric stencil at ``levels`` dyadically
    refined step sizes combined through a Richardson table (error O(step^2) per
    level removed).  ``f`` may return arrays; evaluations are cached.
    """
    cache = {0.0: f(0.0)}

    def feval(d):
        if d not in cache:
            cache[d] = f(d)
        return cache[d]

    coeffs = [cache[0.0]]
    for n in range(1, n_max + 1):
        m = (n + 1) // 2
        table = []
        for lev in range(levels):
            h = step / 2 ** lev
            nodes = [j * h for j in range(-m, m + 1)]
            w = fd_weights(nodes, n)
            est = sum(wj * feval(d) for wj, d in zip(w, nodes))
            row = [est]
            for j in range(1, lev + 1):
                fac = 4.0 ** j
                row.append((fac * row[j - 1] - table[lev - 1][j - 1]) / (fac - 1.0))
            table.append(row)
        coeffs.append(table[-1][-1] / math.factorial(n))
    return coeffs


def burgers_delta_taylor(t, x, v, reynolds, n_max: int,
                         step: float = 0.4, levels: int = 3) -> list:
    """Expansion coefficients u_0..u_N of the point-mass solution in delta."""
    return fd_taylor_coefficients(
        lambda d: burgers_delta_exact(t, x, d, v, reynolds),
        n_max, step=step, levels=levels)


# ----------------------------------------------------------------------------
# Burgers deformation, cosine-squared initial condition on the circle
# ----------------------------------------------------------------------------

def cosine_squared_exact(t, x, delta, v, reynolds, bessel_terms: int = 200):
    """Exact periodic solution for g(x) = cos^2(2 pi x) - 1/2.

    The transformed linear solution is a modified-Bessel cosine series; the
    logarithmic derivative is taken term by term.  Terms are dropped once the
    Bessel/Gaussian factor falls below 1e-16 of the leading one,
    ``bessel_terms`` caps the count.  At delta = 0 the linear
    advection-diffusion limit (one decaying cosine mode) is returned.
    """
    if t <= 0:
        raise DomainError("periodic closed form needs t > 0")
    x = np.asarray(x, dtype=float)
    if delta == 0:
        return 0.5 * np.cos(2.0 * TWO_PI * (x - v * t)) * np.exp(
            -4.0 * TWO_PI ** 2 * t / reynolds)
    z = delta * reynolds / (16.0 * np.pi)
    shift = x - (1.0 - delta) * v * t + 0.125
    i0 = iv(0, z)
    w = np.full_like(x, i0)
    wx = np.zeros_like(x)
    for k in range(1, bessel_terms + 1):
        c = iv(k, z) * np.exp(-(TWO_PI ** 2) * 4.0 * k * k * t / reynolds)
        if abs(c) < 1e-16 * abs(i0):
            break
        theta = 2.0 * TWO_PI * k * shift
        w += 2.0 * c * np.cos(theta)
        wx += -4.0 * TWO_PI * k * c * np.sin(theta)
    return -(2.0 / (delta * reynolds)) * wx / w


# ----------------------------------------------------------------------------
# Quadrature oracle for arbitrary integrable line data
# ----------------------------------------------------------------------------

@dataclass(frozen=True)
class LineOracleSpec:
    """Inputs of the transformed-solution quadrature on the line.

    ``g`` is the integrable initial condition; ``antiderivative`` optionally
    supplies int_{-inf}^x g directly (required when g is not a pointwise
    function, e.g. a point mass, in which case leave ``g`` as None).  The
    quadrature uses composite Gauss-Legendre with ``panels`` panels of
    ``nodes_per_panel`` nodes on [-window, window]; the window must be wide
    enough that both g and the Gaussian kernel tails are negligible.
    """

    g: Callable | None
    delta: complex
    v: float
    reynolds: float
    window: float
    antiderivative: Callable | None = None
    panels: int = 64
    nodes_per_panel: int = 24

    def __post_init__(self):
        if self.g is None and self.antiderivative is None:
            raise ValueError("need g or its antiderivative")
        if self.window <= 0:
            raise ValueError("window must be positive")


def _gauss_panels(lo, hi, panels, nodes):
    base, wts = np.polynomial.legendre.leggauss(nodes)
    edges = np.linspace(lo, hi, panels + 1)
    half = 0.5 * (edges[1:] - edges[:-1])
    mid = 0.5 * (edges[1:] + edges[:-1])
    y = (mid[:, None] + half[:, None] * base[None, :]).ravel()
    w = (half[:, None] * wts[None, :]).ravel()
    return y, w


def _cumulative_integral(g, y):
    """int_{y[0]}^{y[i]} g for sorted nodes, by per-gap 7-node Gauss rule."""
    base, wts = np.polynomial.legendre.leggauss(7)
    lo = y[:-1]
    hi = y[1:]
    half = 0.5 * (hi - lo)
    mid = 0.5 * (hi + lo)
    pts = mid[:, None] + half[:, None] * base[None, :]
    gaps = (np.asarray(g(pts.ravel())).reshape(pts.shape) * wts[None, :]).sum(axis=1)
    out = np.empty_like(y)
    out[0] = 0.0
    out[1:] = np.cumsum(gaps * half * 2.0)
    return out


def cole_hopf_line_oracle(spec: LineOracleSpec, t, x):
    """Ground-truth solution on the line via the transformed linear problem.

    Evaluates the ratio of two Gaussian-kernel quadratures against the weight
    exp(-delta R/2 * int g); when g is not available pointwise the spatial
    derivative falls on the kernel instead.  Raises when the denominator is
    singular (possible only for complex delta).
    """
    if t <= 0:
        raise DomainError("line oracle needs t > 0")
    x = np.atleast_1d(np.asarray(x, dtype=float))
    r, v, delta = spec.reynolds, spec.v, spec.delta
    y, w = _gauss_panels(-spec.window, spec.window, spec.panels,
                         spec.nodes_per_panel)
    if spec.antiderivative is not None:
        big_t = np.asarray(spec.antiderivative(y))
    else:
        big_t = _cumulative_integral(spec.g, y)
    weight = np.exp(-0.5 * delta * r * big_t)

    z = x[:, None] - y[None, :] - (1.0 - delta) * v * t
    kern = np.sqrt(r / (4.0 * np.pi * t)) * np.exp(-r * z * z / (4.0 * t))
    den = kern @ (w * weight)
    scale = np.abs(kern) @ np.abs(w * weight)
    if np.any(np.abs(den) < 1e-12 * np.maximum(scale, 1e-300)):
        raise SingularEvaluationError("transformed solution vanishes at an "
                                      "evaluation point")
    if spec.g is not None:
        gy = np.asarray(spec.g(y))
        num = kern @ (w * weight * gy)
        u = num / den
    else:
        if delta == 0:
            raise ValueError("delta = 0 needs pointwise g")
        dkern = -(r * z / (2.0 * t)) * kern
        u = -(2.0 / (delta * r)) * (dkern @ (w * weight)) / den
    return u if np.ndim(x) else u[0]


# ----------------------------------------------------------------------------
# p-Laplacian Dirichlet problem on the unit ball
# ----------------------------------------------------------------------------

def _check_ball(p, x):
    if p <= 1:
        raise DomainError("p must exceed 1")
    r = np.abs(np.asarray(x, dtype=float))
    if np.any(r > 1.0 + 1e-12):
        raise DomainError("|x| must not exceed 1")
    return np.minimum(r, 1.0)


def plap_ball_exact(p, d, x):
    """Solution of the p-Laplacian Dirichlet problem on the unit ball.

    Source -1, zero boundary data: (p-1)/(p d^(1/(p-1))) (1 - |x|^(p/(p-1))).
    ``x`` is the radial coordinate.
    """
    r = _check_ball(p, x)
    return (p - 1.0) / (p * d ** (1.0 / (p - 1.0))) * (1.0 - r ** (p / (p - 1.0)))


def _xx_log_xx(r):
    # |x|^2 ln |x|^2 with the removable value 0 at the origin
    r2 = r * r
    out = np.zeros_like(r2)
    nz = r2 > 0
    out[nz] = r2[nz] * np.log(r2[nz])
    return out


def plap_ball_u1(d, x):
    """First coefficient of the ball solution expanded in p - 2."""
    r = _check_ball(2.0, x)
    return ((1.0 + math.log(d * d)) * (1.0 - r * r) + _xx_log_xx(r)) / (4.0 * d)


def plap_ball_dual_un(n, x):
    """n-th coefficient of the 1D ball solution expanded in the conjugate exponent.

    With p' = 2 + delta the solution is (1 - |x|^{p'}) / p', whose expansion
    coefficients are, for n >= 1,
    (-1)^n (1-x^2)/2^{n+1} - (x^2/2) sum_{k=1..n} (-1)^{n-k} ln^k|x| / (2^{n-k} k!);
    n = 0 returns (1 - x^2)/2.  Restricted to d = 1.
    """
    if n < 0:
        raise ValueError("n must be non-negative")
    r = _check_ball(2.0, x)
    first = (-1.0) ** n * (1.0 - r * r) / 2.0 ** (n + 1)
    if n == 0:
        return first
    tail = np.zeros_like(r)
    nz = r > 0
    logr = np.log(r[nz])
    for k in range(1, n + 1):
        tail[nz] += ((-1.0) ** (n - k) * logr ** k
                     / (2.0 ** (n - k) * math.factorial(k)))
    return first - 0.5 * r * r * tail


# ----------------------------------------------------------------------------
# Self-similar point-source solution of the p-Laplacian evolution equation
# ----------------------------------------------------------------------------

def barenblatt_constants(p, d):
    """(k_p, q_p, c_p, lambda_p) of the self-similar point-source solution.

    c_p normalizes the total mass to 1 and has a Beta-function closed form
    whose branch depends on the sign of p - 2; p = 2 is excluded (the
    solution is then the heat kernel).
    """
    if p <= 2.0 * d / (1.0 + d):
        raise DomainError("need p > 2d/(1+d)")
    if p == 2:
        raise DomainError("p = 2 is the heat kernel; the normalization "
                          "branches need p != 2")
    kp = 1.0 / (p - 2.0 + p / d)
    qp = (p - 2.0) / p * (kp / d) ** (1.0 / (p - 1.0))
    pp = p / (p - 1.0)
    lam = p * (p - 2.0) * kp / (d * (p - 1.0))
    log_sphere = math.log(2.0) + (d / 2.0) * math.log(math.pi) - gammaln(d / 2.0)
    if p > 2:
        logb = betaln(d / pp, 1.0 + 1.0 / (2.0 - pp))
    else:
        logb = betaln(d / pp, 1.0 / (pp - 2.0) - d / pp)
    cp = abs(qp) ** ((p - 2.0) * kp) * math.exp(
        lam * (math.log(pp) - log_sphere - logb))
    return kp, qp, cp, lam


def barenblatt(p, d, t, x):
    """Point-source solution of the p-Laplacian evolution equation at time t.

    Compactly supported for p > 2, strictly positive for p < 2, and the heat
    kernel at p = 2.  ``x`` is the radial coordinate.
    """
    if t <= 0:
        raise DomainError("self-similar solution needs t > 0")
    if p == 2:
        return heat_kernel(t, x, d)
    kp, qp, cp, _ = barenblatt_constants(p, d)
    r = np.abs(np.asarray(x, dtype=float))
    s = t ** (-kp / d) * r
    base = cp - qp * s ** (p / (p - 1.0))
    if p > 2:
        return t ** (-kp) * np.maximum(base, 0.0) ** ((p - 1.0) / (p - 2.0))
    return t ** (-kp) * base ** ((p - 1.0) / (p - 2.0))


def barenblatt_u1(t, x):
    """d/dp of the point-source solution at p = 2, one dimension.

    Closed form with Euler's constant; the removable singularity of the
    x^2 ln(1/x^2) term at x = 0 is evaluated by its limit.
    """
    if t <= 0:
        raise DomainError("needs t > 0")
    x = np.asarray(x, dtype=float)
    x2 = x * x
    log_term = np.zeros_like(x2)
    nz = x2 > 0
    log_term[nz] = 4.0 * x2[nz] * t * (np.log(16.0 * np.pi * t ** 3 / x2[nz]) - 1.0)
    const = 4.0 * t * t * (math.log(256.0 * np.pi ** 2) + 2.0 * np.euler_gamma - 3.0)
    bracket = math.log(math.sqrt(t)) - (x2 * x2 + log_term - const) / (32.0 * t * t)
    return bracket * np.exp(-x2 / (4.0 * t)) / np.sqrt(4.0 * np.pi * t)
