"""Convergence metrics, rate estimation, and energy spectrum diagnostics."""

from __future__ import annotations

from dataclasses import dataclass, field as dataclass_field

import numpy as np

from .errors import GridMismatchError
from .spectral import fft_forward


@dataclass
class ConvergenceReport:
    """Error-versus-order summary of one series experiment."""

    metrics: list
    rate: float
    plateau_index: int
    q: float
    scenario: dict = dataclass_field(default_factory=dict)


@dataclass
class Spectrum:
    """Kinetic energy per non-negative wavenumber of a real periodic field."""

    energy: np.ndarray
    total: float
    time: float = 0.0


def _trapezoid_weights(shape, x=None, dx=None):
    if x is not None:
        x = np.asarray(x)
        w = np.empty_like(x, dtype=float)
        w[1:-1] = 0.5 * (x[2:] - x[:-2])
        w[0] = 0.5 * (x[1] - x[0])
        w[-1] = 0.5 * (x[-1] - x[-2])
        return w
    h = 1.0 if dx is None else dx
    weights = np.ones(shape, dtype=float) * h ** len(shape)
    for ax in range(len(shape)):
        sl = [slice(None)] * len(shape)
        sl[ax] = 0
        weights[tuple(sl)] *= 0.5
        sl[ax] = -1
        weights[tuple(sl)] *= 0.5
    return weights


def error_metric(approx, exact, q, x=None, dx=None) -> float:
    """Discrete L^q distance between two fields on a shared grid.

    q is 1, 2, or inf; finite q uses trapezoidal weights built from the node
    coordinates ``x`` (1D, possibly non-uniform) or the spacing ``dx``.
    """
    approx = np.asarray(approx, dtype=float)
    exact = np.asarray(exact, dtype=float)
    if approx.shape != exact.shape:
        raise GridMismatchError("fields live on different grids")
    diff = np.abs(approx - exact)
    if np.isinf(q):
        return float(diff.max())
    if q not in (1, 2):
        raise ValueError("q must be 1, 2, or inf")
    if x is not None and np.asarray(x).shape != approx.shape:
        raise GridMismatchError("coordinate array does not match the fields")
    w = _trapezoid_weights(approx.shape, x=x, dx=dx)
    return float(np.sum(w * diff ** q) ** (1.0 / q))


def detect_plateau(metrics) -> int:
    """First order at which the error stops improving by more than 10 percent
    twice in a row; falls back to the last index."""
    m = np.asarray(metrics, dtype=float)
    for n in range(len(m) - 2):
        if m[n + 1] > 0.9 * m[n] and m[n + 2] > 0.9 * m[n + 1]:
            return n
    return len(m) - 1


def convergence_rate(metrics, n_plateau: int) -> float:
    """Mean log-slope of the error-versus-order curve before the plateau.

    r = sum_{n < n_plateau - 1} log(M[n+1]/M[n]) / (n_plateau - 1); negative r
    means the series converges, positive r flags divergence.
    """
    m = np.asarray(metrics, dtype=float)
    if n_plateau < 2:
        raise ValueError("need at least two orders before the plateau")
    if n_plateau > len(m):
        raise ValueError("plateau index exceeds the metric sequence")
    used = m[:n_plateau]
    if np.any(used <= 0):
        raise ValueError("metrics must be positive up to the plateau")
    return float(np.sum(np.log(used[1:] / used[:-1])) / (n_plateau - 1))


def build_convergence_report(metrics, q=1, n_plateau=None, **scenario) -> ConvergenceReport:
    idx = detect_plateau(metrics) if n_plateau is None else n_plateau
    rate = convergence_rate(metrics, max(idx, 2))
    return ConvergenceReport(metrics=list(map(float, metrics)), rate=rate,
                             plateau_index=idx, q=q, scenario=scenario)


def energy_spectrum(samples, time: float = 0.0) -> Spectrum:
    """Energy per wavenumber E(k) = |uhat(k)|^2 for k = 0..K-1.

    The total is half the signed-mode sum, which equals half the mean-square
    of the field (Parseval).
    """
    samples = np.asarray(samples, dtype=float)
    modes = fft_forward(samples).modes
    power = np.abs(modes) ** 2
    half = samples.shape[-1] // 2
    total = 0.5 * float(power.sum())
    return Spectrum(energy=power[:half], total=total, time=time)


def spectrum_slope(spectrum: Spectrum, k_lo: int, k_hi: int) -> float:
    """Least-squares slope of log E versus log k over k in [k_lo, k_hi]."""
    if not (1 <= k_lo < k_hi < len(spectrum.energy)):
        raise ValueError("need 1 <= k_lo < k_hi inside the resolved range")
    k = np.arange(k_lo, k_hi + 1)
    e = spectrum.energy[k_lo:k_hi + 1]
    keep = e > 0
    if not keep.any():
        raise ValueError("no positive energies in the fit range")
    lk = np.log(k[keep])
    le = np.log(e[keep])
    a = np.vstack([lk, np.ones_like(lk)]).T
    slope, _ = np.linalg.lstsq(a, le, rcond=None)[0]
    return float(slope)
