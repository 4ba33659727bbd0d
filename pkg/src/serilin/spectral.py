"""Fourier solver for the Burgers deformation hierarchy on the periodic unit interval.

Every equation in the hierarchy is linear with constant coefficients, so each
Fourier mode decouples: one step multiplies the mode by the exact decay factor
of linear advection-diffusion and adds the forcing through the closed-form
integral of the variation-of-constants formula with the forcing frozen over
the step.  A centered-difference / forward-Euler baseline of the full
nonlinear equation is included for accuracy comparisons.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import GridMismatchError, SolverError
from .hierarchy import (
    BURGERS_LINEAR,
    HierarchyState,
    HomotopySpec,
    advance_with_refeeding,
    burgers_forcing,
    partial_sum,
)

TWO_PI = 2.0 * np.pi


def _check_power_of_two(n):
    if n < 2 or (n & (n - 1)) != 0:
        raise ValueError(f"grid size must be a power of two, got {n}")


@dataclass(frozen=True)
class SpectralField:
    """Fourier coefficients of a periodic field on a grid of ``grid_size`` points.

    ``modes[k]`` follows the standard FFT layout k = 0, 1, ..., K-1, -K, ..., -1
    with the integral normalization uhat(k) = (1/M) sum_j u_j exp(-2 pi i k x_j).
    """

    modes: np.ndarray
    grid_size: int

    def __post_init__(self):
        _check_power_of_two(self.grid_size)
        if self.modes.shape != (self.grid_size,):
            raise ValueError("mode array length must equal grid_size")

    def wavenumbers(self) -> np.ndarray:
        return np.fft.fftfreq(self.grid_size, d=1.0 / self.grid_size)

    def mean_zero(self) -> "SpectralField":
        """Copy with the k=0 coefficient removed (shift by the field mean)."""
        m = self.modes.copy()
        m[0] = 0.0
        return SpectralField(m, self.grid_size)


def fft_forward(samples: np.ndarray) -> SpectralField:
    """Forward transform of real samples on x_j = j/M, integral normalization."""
    samples = np.asarray(samples)
    _check_power_of_two(samples.shape[-1])
    return SpectralField(np.fft.fft(samples) / samples.shape[-1], samples.shape[-1])


def fft_inverse(f: SpectralField) -> np.ndarray:
    """Real grid samples of a spectral field (imaginary residue discarded)."""
    return np.fft.ifft(f.modes * f.grid_size).real


@dataclass(frozen=True)
class ForcingSpec:
    """Band of sinusoidal forcing modes with seeded random amplitudes/phases.

    f(x) = sum_{k=kmin..kmax} A_k sin(2 pi k x + phi_k).  When amplitudes or
    phases are not given they are drawn from ``seed`` with a fixed stream
    layout: all amplitudes first (uniform on [-1, 1], k ascending), then all
    phases (uniform on [0, 2 pi)), so runs are reproducible across machines.
    """

    k_min: int
    k_max: int
    seed: int = 0
    amplitudes: tuple[float, ...] = ()
    phases: tuple[float, ...] = ()

    def __post_init__(self):
        if not (1 <= self.k_min <= self.k_max):
            raise ValueError("need 1 <= k_min <= k_max")
        n = self.k_max - self.k_min + 1
        if not self.amplitudes or not self.phases:
            rng = np.random.default_rng(self.seed)
            amps = tuple(rng.uniform(-1.0, 1.0, size=n))
            phs = tuple(rng.uniform(0.0, TWO_PI, size=n))
            if not self.amplitudes:
                object.__setattr__(self, "amplitudes", amps)
            if not self.phases:
                object.__setattr__(self, "phases", phs)
        if len(self.amplitudes) != n or len(self.phases) != n:
            raise ValueError("amplitude/phase arrays must cover k_min..k_max")

    def sample(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x)
        f = np.zeros_like(x, dtype=float)
        for i, k in enumerate(range(self.k_min, self.k_max + 1)):
            f += self.amplitudes[i] * np.sin(TWO_PI * k * x + self.phases[i])
        return f


@dataclass(frozen=True)
class SolverConfig:
    """Grid and time-step parameters of the periodic spectral solver.

    ``forcing_time`` selects where within a step the hierarchy forcings are
    frozen: "start" is the default exponential-Euler rule; "end" evaluates
    them from the already-advanced lower orders at the new time.
    """

    grid_size: int = 512
    dt: float = 1e-4
    dealias: bool = False
    forcing_time: str = "start"

    def __post_init__(self):
        _check_power_of_two(self.grid_size)
        if self.dt <= 0:
            raise ValueError("dt must be positive")
        if self.forcing_time not in ("start", "end"):
            raise ValueError("forcing_time must be 'start' or 'end'")


def duhamel_phi(lam: np.ndarray, dt: float) -> np.ndarray:
    """(1 - exp(-lam dt)) / lam with the lam -> 0 limit dt, elementwise."""
    lam = np.asarray(lam, dtype=complex)
    out = np.full(lam.shape, dt, dtype=complex)
    nz = lam != 0
    out[nz] = -np.expm1(-lam[nz] * dt) / lam[nz]
    return out


def advance_mode_duhamel(order: int, u_hat, f_hat, k, dt: float,
                         v: float, reynolds: float):
    """One exponential-Euler step of mode k at hierarchy order >= 1.

    Returns exp(-lam dt) u_hat - 2 pi i k phi(lam, dt) f_hat with
    lam = 2 pi i k v + 4 pi^2 k^2 / reynolds and f_hat the forcing coefficient
    frozen over the step.  Accepts scalars or arrays over k.
    """
    if order < 1:
        raise ValueError("orders >= 1 carry divergence-form forcing; use "
                         "advance_mode_order0 for the zeroth order")
    k = np.asarray(k, dtype=float)
    lam = TWO_PI * 1j * k * v + 4.0 * np.pi ** 2 * k ** 2 / reynolds
    return np.exp(-lam * dt) * u_hat - TWO_PI * 1j * k * duhamel_phi(lam, dt) * f_hat


def advance_mode_order0(u_hat, f_hat, k, dt: float, v: float, reynolds: float):
    """One exponential-Euler step of the zeroth order, whose forcing is f itself."""
    k = np.asarray(k, dtype=float)
    lam = TWO_PI * 1j * k * v + 4.0 * np.pi ** 2 * k ** 2 / reynolds
    out = np.exp(-lam * dt) * u_hat
    if f_hat is not None:
        out = out + duhamel_phi(lam, dt) * f_hat
    return out


@dataclass
class Trajectory:
    """Snapshots of a hierarchy run on the periodic grid."""

    x: np.ndarray
    times: list[float] = field(default_factory=list)
    states: list[HierarchyState] = field(default_factory=list)
    delta: float = 1.0

    def add(self, state: HierarchyState):
        self.times.append(state.time)
        self.states.append(state)

    def state_at(self, t: float) -> HierarchyState:
        i = int(np.argmin(np.abs(np.asarray(self.times) - t)))
        if abs(self.times[i] - t) > 1e-9 + 1e-9 * abs(t):
            raise KeyError(f"no snapshot near t={t}")
        return self.states[i]

    def sum_at(self, t: float, delta: float | None = None) -> np.ndarray:
        d = self.delta if delta is None else delta
        return partial_sum(self.state_at(t), d).values


def _snapshot_steps(sample_times, dt, n_steps):
    steps = set()
    for t in sample_times:
        i = int(round(t / dt))
        if not (0 < i <= n_steps) or abs(i * dt - t) > 1e-9 + 1e-6 * dt:
            raise ValueError(f"sample time {t} is not a step multiple of dt={dt}")
        steps.add(i)
    return steps


def solve_periodic_hierarchy(g, spec: HomotopySpec, config: SolverConfig,
                             order: int, t_final: float,
                             forcing: ForcingSpec | None = None,
                             refeed_every: int = 1,
                             sample_times: Sequence[float] = ()) -> Trajectory:
    """March the Burgers deformation hierarchy on [0, 1] with periodic BCs.

    ``g`` gives the initial zeroth-order field (callable of x or samples).
    External forcing enters the zeroth-order equation only; higher orders are
    forced by the divergence of the hierarchy couplings, differentiated
    spectrally.  Refeeding restarts the hierarchy from its partial sum at
    ``spec.target_delta`` every ``refeed_every`` steps (<= 0 disables).
    Snapshots are taken at ``sample_times`` and at t_final.
    """
    if spec.kind != BURGERS_LINEAR:
        raise ValueError("periodic spectral solver handles the Burgers deformation")
    m = config.grid_size
    x = np.arange(m) / m
    u0 = np.asarray(g(x), dtype=float) if callable(g) else np.asarray(g, dtype=float)
    if u0.shape != (m,):
        raise GridMismatchError("initial data does not match the grid size")

    v, reynolds = spec.advection_speed, spec.reynolds
    k = np.fft.fftfreq(m, d=1.0 / m)
    lam = TWO_PI * 1j * k * v + 4.0 * np.pi ** 2 * k ** 2 / reynolds
    decay = np.exp(-lam * config.dt)
    phi = duhamel_phi(lam, config.dt)
    deriv = -TWO_PI * 1j * k * phi
    mask = None
    if config.dealias:
        mask = np.abs(k) <= (m // 2) * 2 / 3

    f_hat = None
    if forcing is not None:
        if forcing.k_max >= m // 2:
            raise ValueError("forcing band exceeds the resolved wavenumbers")
        f_hat = np.fft.fft(forcing.sample(x)) / m

    dt = config.dt
    n_steps = int(round(t_final / dt))
    if abs(n_steps * dt - t_final) > 1e-9 + 1e-6 * dt:
        raise ValueError("t_final must be an integer number of steps")

    snapshot = {"coeffs": None}

    def build_forcing(n, working):
        if n == 0:
            if config.forcing_time == "start":
                snapshot["coeffs"] = list(working)
            return None
        coeffs = snapshot["coeffs"] if config.forcing_time == "start" else working
        return burgers_forcing(n, coeffs, v)

    step_counter = {"i": 0}

    def stepper(n, coeff, forcing_field, dt_):
        u_hat = np.fft.fft(coeff) / m
        if n == 0:
            u_hat = decay * u_hat + (phi * f_hat if f_hat is not None else 0.0)
        else:
            fk = np.fft.fft(forcing_field) / m
            if mask is not None:
                fk = fk * mask
            u_hat = decay * u_hat + deriv * fk
        out = np.fft.ifft(u_hat * m).real
        if not np.isfinite(out).all():
            raise SolverError("non-finite field", order=n, step=step_counter["i"])
        return out

    traj = Trajectory(x=x, delta=spec.target_delta)
    wanted = _snapshot_steps(sample_times, dt, n_steps)
    wanted.add(n_steps)

    def on_step(state, i):
        step_counter["i"] = i
        if i in wanted:
            traj.add(state)

    state = HierarchyState.from_initial(u0, order, grid=("periodic", m))
    advance_with_refeeding(state, dt, n_steps, stepper, build_forcing,
                           refeed_every=refeed_every, delta=spec.target_delta,
                           callback=on_step)
    return traj


def dns_burgers(g, dt: float, t_final: float, reynolds: float,
                forcing: ForcingSpec | None = None,
                sample_times: Sequence[float] = ()) -> Trajectory:
    """Centered-difference / forward-Euler baseline for the nonlinear equation.

    Solves u_t + u u_x = u_xx / reynolds + f on the periodic unit interval at
    the grid implied by ``g``.  Warns when dt violates the diffusive stability
    bound dt <= h^2 reynolds / 2; aborts when max|u| exceeds 1e6.
    """
    u = np.asarray(g, dtype=float).copy()
    m = u.shape[0]
    x = np.arange(m) / m
    h = 1.0 / m
    if dt > h * h * reynolds / 2.0:
        warnings.warn("dt exceeds the forward-Euler diffusive stability bound",
                      stacklevel=2)
    f = forcing.sample(x) if forcing is not None else 0.0

    n_steps = int(round(t_final / dt))
    traj = Trajectory(x=x, delta=1.0)
    wanted = _snapshot_steps(sample_times, dt, n_steps)
    wanted.add(n_steps)

    for i in range(1, n_steps + 1):
        du = (np.roll(u, -1) - np.roll(u, 1)) / (2.0 * h)
        d2u = (np.roll(u, -1) - 2.0 * u + np.roll(u, 1)) / (h * h)
        u = u + dt * (-u * du + d2u / reynolds + f)
        if not np.isfinite(u).all() or np.max(np.abs(u)) > 1e6:
            raise SolverError("DNS blow-up", step=i)
        if i in wanted:
            traj.add(HierarchyState((u.copy(),), time=i * dt, grid=("periodic", m)))
    return traj
