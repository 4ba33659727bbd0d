"""Named experiment presets and the config-driven runner.

Each preset bundles the parameters of one reference scenario (point-mass
convergence study, periodic refeeding comparison, turbulence spectrum,
Dirichlet rate tables, evolution residuals) and writes plot-ready CSV
artifacts plus a JSON manifest.  Configs are JSON documents validated
against CONFIG_SCHEMA; a preset name is shorthand for its default config.
"""

from __future__ import annotations

import time
from pathlib import Path

import numpy as np
from jsonschema import Draft202012Validator

from . import analysis, elliptic, exact, fem, spectral
from .errors import ConfigError
from .hierarchy import HomotopySpec, partial_sum
from .output import write_csv, write_manifest

CONFIG_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "required": ["schema_version", "experiment"],
    "additionalProperties": False,
    "properties": {
        "schema_version": {"const": 1},
        "experiment": {"type": "string"},
        "seed": {"type": "integer", "minimum": 0},
        "params": {"type": "object"},
    },
}

_VALIDATOR = Draft202012Validator(CONFIG_SCHEMA)


def _merge_params(preset, overrides):
    params = dict(preset.defaults)
    for key, value in (overrides or {}).items():
        if key not in params:
            raise ConfigError(f"unknown parameter {key!r} for {preset.name}")
        default = params[key]
        if isinstance(default, bool) != isinstance(value, bool):
            raise ConfigError(f"parameter {key!r} expects {type(default).__name__}")
        if isinstance(default, (int, float)) and not isinstance(value, (int, float)):
            raise ConfigError(f"parameter {key!r} expects a number")
        if isinstance(default, str) and not isinstance(value, str):
            raise ConfigError(f"parameter {key!r} expects a string")
        if isinstance(default, list) and not isinstance(value, list):
            raise ConfigError(f"parameter {key!r} expects a list")
        params[key] = value
    return params


class Preset:
    def __init__(self, name, description, defaults, runner):
        self.name = name
        self.description = description
        self.defaults = defaults
        self.runner = runner


_PRESETS: dict[str, Preset] = {}


def _preset(name, description, **defaults):
    def wrap(fn):
        _PRESETS[name] = Preset(name, description, defaults, fn)
        return fn
    return wrap


def list_presets():
    """Stable (name, description) listing of the bundled experiments."""
    return [(p.name, p.description) for _, p in sorted(_PRESETS.items())]


def default_config(name) -> dict:
    if name not in _PRESETS:
        raise ConfigError(f"unknown preset {name!r}")
    return {"schema_version": 1, "experiment": name, "seed": 0,
            "params": dict(_PRESETS[name].defaults)}


def validate_config(config) -> dict:
    """Validate a config document and fill in preset defaults."""
    errors = sorted(_VALIDATOR.iter_errors(config), key=str)
    if errors:
        raise ConfigError("; ".join(e.message for e in errors))
    name = config["experiment"]
    if name not in _PRESETS:
        raise ConfigError(f"unknown preset {name!r}")
    preset = _PRESETS[name]
    params = _merge_params(preset, config.get("params"))
    return {"schema_version": 1, "experiment": name,
            "seed": int(config.get("seed", 0)), "params": params}


def run_config(config, out_dir) -> str:
    """Execute a validated config, write artifacts, return the manifest path."""
    config = validate_config(config)
    preset = _PRESETS[config["experiment"]]
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    started = time.perf_counter()
    artifacts = preset.runner(config["params"], config["seed"], out)
    wall = time.perf_counter() - started
    return write_manifest(out / f"{preset.name}-manifest.json",
                          config, config["seed"], wall, artifacts)


# ---------------------------------------------------------------------------
# Burgers experiments
# ---------------------------------------------------------------------------

@_preset("fig1-delta-ic",
         "Point-mass Burgers: partial-sum error versus time for both "
         "advection-speed choices, from numerically differentiated "
         "closed-form coefficients",
         reynolds=2.0, order=8, t_min=0.25, t_max=10.0, n_times=40,
         x_lo=-8.0, x_hi=20.0, n_points=561, fd_step=0.4, fd_levels=3)
def _run_delta_ic(params, seed, out):
    r = params["reynolds"]
    order = int(params["order"])
    ts = np.linspace(params["t_min"], params["t_max"], int(params["n_times"]))
    x = np.linspace(params["x_lo"], params["x_hi"], int(params["n_points"]))
    rows = []
    snaps = []
    for v in (1.0, 1.0 / r):
        for t in ts:
            coeffs = exact.burgers_delta_taylor(
                t, x, v, r, order, step=params["fd_step"],
                levels=int(params["fd_levels"]))
            ref = exact.burgers_delta_exact(t, x, 1.0, v, r)
            s = np.zeros_like(x)
            for n in range(order + 1):
                s += coeffs[n]
                rows.append((v, n, t, float(np.max(np.abs(s - ref)))))
        for t in (1.0, 10.0):
            coeffs = exact.burgers_delta_taylor(
                t, x, v, r, order, step=params["fd_step"],
                levels=int(params["fd_levels"]))
            s = np.sum(coeffs, axis=0)
            ref = exact.burgers_delta_exact(t, x, 1.0, v, r)
            snaps.extend((v, t, xx, rr, ss) for xx, rr, ss in zip(x, ref, s))
    return [
        write_csv(out / "delta-ic-max-error.csv", ["v", "N", "t", "max_err"], rows),
        write_csv(out / "delta-ic-snapshots.csv",
                  ["v", "t", "x", "u_exact", "S_N"], snaps),
    ]


def _cosine_ic(x):
    return np.cos(2.0 * np.pi * x) ** 2 - 0.5


def _spectral_setup(params):
    r = params["reynolds"]
    v = 1.0 / r if params["v_choice"] == "1/Re" else 1.0
    spec = HomotopySpec.burgers_linear(v, r)
    cfg = spectral.SolverConfig(grid_size=int(params["grid_size"]),
                                dt=params["dt"])
    return spec, cfg, v, r


@_preset("fig2-cosine-squared",
         "Periodic Burgers without refeeding: partial-sum error versus time "
         "against the closed-form cosine-squared solution",
         reynolds=500.0, v_choice="1/Re", grid_size=512, dt=1e-4,
         order=8, t_final=0.1, n_times=20)
def _run_cosine_squared(params, seed, out):
    spec, cfg, v, r = _spectral_setup(params)
    order = int(params["order"])
    n_steps = int(round(params["t_final"] / cfg.dt))
    stride = max(1, n_steps // int(params["n_times"]))
    times = [i * cfg.dt for i in range(stride, n_steps + 1, stride)]
    traj = spectral.solve_periodic_hierarchy(_cosine_ic, spec, cfg, order,
                                             params["t_final"], refeed_every=0,
                                             sample_times=times)
    rows = []
    for t in times:
        state = traj.state_at(t)
        ref = exact.cosine_squared_exact(t, traj.x, 1.0, v, r)
        s = np.zeros_like(traj.x)
        for n in range(order + 1):
            s += state.coeffs[n]
            rows.append((params["v_choice"], n, t, float(np.max(np.abs(s - ref)))))
    return [write_csv(out / "cosine-squared-max-error.csv",
                      ["v_choice", "N", "t", "max_err"], rows)]


@_preset("fig3-refeeding",
         "Periodic Burgers to t=1: error versus time for the refed series, "
         "the plain series, and the finite-difference baseline",
         reynolds=500.0, v_choice="1/Re", grid_size=512, dt=1e-4,
         order=8, t_final=1.0, n_times=25)
def _run_refeeding(params, seed, out):
    spec, cfg, v, r = _spectral_setup(params)
    order = int(params["order"])
    n_steps = int(round(params["t_final"] / cfg.dt))
    stride = max(1, n_steps // int(params["n_times"]))
    times = [i * cfg.dt for i in range(stride, n_steps + 1, stride)]
    x = np.arange(cfg.grid_size) / cfg.grid_size

    runs = {
        "refeed": spectral.solve_periodic_hierarchy(
            _cosine_ic, spec, cfg, order, params["t_final"], refeed_every=1,
            sample_times=times),
        "no-refeed": spectral.solve_periodic_hierarchy(
            _cosine_ic, spec, cfg, order, params["t_final"], refeed_every=0,
            sample_times=times),
        "dns": spectral.dns_burgers(_cosine_ic(x), cfg.dt, params["t_final"],
                                    r, sample_times=times),
    }
    rows = []
    grad_rows = []
    for t in times:
        ref = exact.cosine_squared_exact(t, x, 1.0, v, r)
        for method, traj in runs.items():
            s = traj.sum_at(t)
            rows.append((method, t, float(np.max(np.abs(s - ref)))))
        s = runs["refeed"].sum_at(t)
        grad = np.max(np.abs(np.gradient(s, 1.0 / cfg.grid_size)))
        grad_ref = np.max(np.abs(np.gradient(ref, 1.0 / cfg.grid_size)))
        grad_rows.append((t, grad_ref, grad))
    t_star = max(grad_rows, key=lambda row: row[1])[0]
    ref = exact.cosine_squared_exact(t_star, x, 1.0, v, r)
    snap = [(t_star, xx, rr, ss)
            for xx, rr, ss in zip(x, ref, runs["refeed"].sum_at(t_star))]
    return [
        write_csv(out / "refeeding-max-error.csv", ["method", "t", "max_err"], rows),
        write_csv(out / "refeeding-max-gradient.csv",
                  ["t", "maxgrad_exact", "maxgrad_series"], grad_rows),
        write_csv(out / "refeeding-snapshot.csv", ["t", "x", "u_exact", "S_N"], snap),
    ]


@_preset("fig4-error-vs-order",
         "Periodic Burgers with refeeding: error versus expansion order at "
         "several time slices",
         reynolds=500.0, v_choice="1/Re", grid_size=512, dt=1e-4,
         max_order=8, t_slices=[0.01, 0.1, 0.5, 1.0])
def _run_error_vs_order(params, seed, out):
    spec, cfg, v, r = _spectral_setup(params)
    slices = [float(t) for t in params["t_slices"]]
    rows = []
    for order in range(int(params["max_order"]) + 1):
        traj = spectral.solve_periodic_hierarchy(
            _cosine_ic, spec, cfg, order, max(slices), refeed_every=1,
            sample_times=slices)
        for t in slices:
            ref = exact.cosine_squared_exact(t, traj.x, 1.0, v, r)
            rows.append((order, t, float(np.max(np.abs(traj.sum_at(t) - ref)))))
    return [write_csv(out / "error-vs-order.csv", ["N", "t", "max_err"], rows)]


@_preset("fig6-turbulence",
         "Forced periodic Burgers to steady state: solution snapshot, energy "
         "spectrum, and inertial-range slope",
         reynolds=500.0, v_choice="1/Re", grid_size=512, dt=1e-4,
         order=4, t_final=5.0, k_min=1, k_max=128, fit_k_lo=8, fit_k_hi=100)
def _run_turbulence(params, seed, out):
    spec, cfg, v, r = _spectral_setup(params)
    forcing = spectral.ForcingSpec(k_min=int(params["k_min"]),
                                   k_max=int(params["k_max"]), seed=seed)
    traj = spectral.solve_periodic_hierarchy(
        np.zeros(cfg.grid_size), spec, cfg, int(params["order"]),
        params["t_final"], forcing=forcing, refeed_every=1)
    u = traj.sum_at(params["t_final"])
    spectrum = analysis.energy_spectrum(u, time=params["t_final"])
    slope = analysis.spectrum_slope(spectrum, int(params["fit_k_lo"]),
                                    int(params["fit_k_hi"]))
    ks = np.arange(len(spectrum.energy))
    return [
        write_csv(out / "turbulence-solution.csv", ["t", "x", "S_N"],
                  [(params["t_final"], xx, uu) for xx, uu in zip(traj.x, u)]),
        write_csv(out / "turbulence-spectrum.csv", ["k", "E", "k2E"],
                  [(k, e, k * k * e) for k, e in zip(ks, spectrum.energy)]),
        write_csv(out / "turbulence-slope.csv",
                  ["k_lo", "k_hi", "slope", "total_energy"],
                  [(params["fit_k_lo"], params["fit_k_hi"], slope,
                    spectrum.total)]),
    ]


# ---------------------------------------------------------------------------
# p-Laplacian experiments
# ---------------------------------------------------------------------------

def _square_boundary(p):
    def g(xg, yg):
        rr = np.sqrt(xg ** 2 + yg ** 2)
        c = (p - 1.0) / (p * 2.0 ** (1.0 / (p - 1.0)))
        return c * (1.0 - rr ** (p / (p - 1.0)))
    return g


def _dirichlet_metrics(dim, n_intervals, p, kind, max_order):
    if dim == 1:
        problem = elliptic.DirichletProblem(dimension=1, n_intervals=n_intervals,
                                            p=p, kind=kind)
        ref = exact.plap_ball_exact(p, 1, problem.axis)
        coords = problem.axis
    else:
        problem = elliptic.DirichletProblem(dimension=2, n_intervals=n_intervals,
                                            p=p, kind=kind,
                                            boundary=_square_boundary(p))
        xg, yg = problem.nodes()
        ref = _square_boundary(p)(xg, yg)
        coords = None
    state = elliptic.solve_dirichlet_hierarchy(problem, max_order)
    delta = problem.homotopy().target_delta
    metrics = []
    s = np.zeros(problem.shape)
    for n in range(max_order + 1):
        s = s + delta ** n * state.coeffs[n]
        metrics.append(analysis.error_metric(s, ref, 1, x=coords,
                                             dx=problem.h))
    return metrics


def _rate_preset(dim):
    def run(params, seed, out):
        import warnings
        ps = [float(p) for p in params["p_values"]]
        max_order = int(params["max_order"])
        n_plateau = int(params["n_plateau"])
        rate_rows = []
        metric_rows = []
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            for kind in ("ordinary", "dual"):
                for p in ps:
                    metrics = _dirichlet_metrics(dim, int(params["n_intervals"]),
                                                 p, kind, max_order)
                    rate = analysis.convergence_rate(metrics, n_plateau)
                    rate_rows.append((kind, p, rate))
                    metric_rows.extend((kind, p, n, m)
                                       for n, m in enumerate(metrics))
        tag = "1d" if dim == 1 else "2d"
        return [
            write_csv(out / f"rates-{tag}.csv", ["series", "p", "r"], rate_rows),
            write_csv(out / f"errors-{tag}.csv", ["series", "p", "N", "M"],
                      metric_rows),
        ]
    return run


_preset("fig5-rates",
        "Dirichlet problem in 1D: convergence rate versus p for the ordinary "
        "and conjugate-exponent series",
        p_values=[1.5, 1.75, 2.25, 2.5, 2.75, 3.0, 3.25, 3.5],
        n_intervals=2048, max_order=8, n_plateau=5)(_rate_preset(1))

_preset("fig7-error-2d",
        "Dirichlet problem on the square: error versus order tables",
        p_values=[1.7, 3.0], n_intervals=64, max_order=8, n_plateau=5)(
            _rate_preset(2))

_preset("fig8-rates-2d",
        "Dirichlet problem on the square: convergence rate versus p",
        p_values=[1.5, 1.75, 2.25, 2.5, 2.75, 3.0, 3.25, 3.5],
        n_intervals=64, max_order=8, n_plateau=5)(_rate_preset(2))


@_preset("fig9-barenblatt",
         "p-Laplacian evolution from a point mass: residuals versus order for "
         "both series, with and without refeeding",
         p_values=[1.4, 1.7, 2.0, 2.3, 2.6, 3.0], dx=0.02, dt=0.01,
         t_final=1.0, max_order=4, refeed_order=3, half_width=6.0)
def _run_barenblatt(params, seed, out):
    rows = []
    snap_rows = []
    for kind in ("ordinary", "dual"):
        for p in [float(v) for v in params["p_values"]]:
            res = fem.solve_evolution_hierarchy(
                p, kind, int(params["max_order"]), dx=params["dx"],
                dt=params["dt"], t_final=params["t_final"],
                half_width=params["half_width"],
                residual_times=(params["t_final"],))
            state = res.states[params["t_final"]]
            ref = exact.barenblatt(p, 1, params["t_final"], res.mesh.nodes)
            s = np.zeros_like(ref)
            for n in range(int(params["max_order"]) + 1):
                s = s + res.delta ** n * state.coeffs[n]
                rows.append((kind, p, "series", n, float(np.sqrt(
                    np.trapezoid((s - ref) ** 2, res.mesh.nodes)))))
            refed = fem.solve_evolution_hierarchy(
                p, kind, int(params["refeed_order"]), dx=params["dx"],
                dt=params["dt"], t_final=params["t_final"],
                refeed_every=1, half_width=params["half_width"],
                residual_times=(params["t_final"],))
            rows.append((kind, p, "refeed", int(params["refeed_order"]),
                         refed.residuals[params["t_final"]]))
            if p in (1.7, 3.0):
                snap_rows.extend(
                    (kind, p, xx, rr, ss) for xx, rr, ss in
                    zip(res.mesh.nodes, ref,
                        partial_sum(state, res.delta).values))
    return [
        write_csv(out / "barenblatt-residuals.csv",
                  ["series", "p", "variant", "N", "residual_L2"], rows),
        write_csv(out / "barenblatt-snapshots.csv",
                  ["series", "p", "x", "H_p", "S_N"], snap_rows),
    ]
