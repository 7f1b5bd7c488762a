"""Command-line sweeps reproducing the thermometry, phase-estimation and
XY-chain datasets, with CSV/JSON output and companion figures.

Exit codes: 0 success, 2 usage error, 3 numerical failure.
"""

import concurrent.futures
import dataclasses
import json
import math
import os
import sys
import time
from dataclasses import dataclass

import click
import numpy as np

from . import __version__, phase, thermometry, xychain
from .errors import DomainError, NumericalError
from .report import Dataset, render_figure, write_dataset

WORKERS_ENV = "SGU_WORKERS"


@dataclass
class RunConfig:
    # shared numerics
    grid_points: int = 64
    rtol: float = 1e-8
    seed: int = 0  # only used by sampled property checks, never by sweeps
    # thermometry sweeps
    t0_min: float = 0.05
    t0_max: float = 10.0
    t0_points: int = 16
    delta_rel_min: float = 0.125
    delta_rel_max: float = 2.0
    delta_rel_points: int = 16
    t0_slice: tuple = (0.01, 10.0)
    m0_cap: int = thermometry.COUNTER_CAP
    # phase estimation sweeps
    lam0: float = phase.DEFAULT_LAMBDA0
    delta: float = math.pi / 20
    n_min: float = 1.0
    n_max: float = 1e6
    n_points: int = 13
    pe_n: float = 1e6
    pe_delta_min: float = math.pi / 100
    pe_delta_max: float = math.pi / 2
    pe_delta_points: int = 10
    st_s: float = 1.0
    n_thermal_values: tuple = (0.0, 0.5, 1.0)
    # XY chain
    n_sites: int = 64
    gamma: float = 1.0
    xy_lam0: float = 0.5
    xy_delta: float = 0.2
    k_cutoff: float = 0.0  # 0 disables the momentum cutoff

    def validate(self):
        for name in ("rtol",):
            if not getattr(self, name) > 0:
                raise click.UsageError(f"config field {name!r} must be positive")
        for name in ("grid_points", "t0_points", "delta_rel_points",
                     "n_points", "pe_delta_points", "m0_cap"):
            if getattr(self, name) < 1:
                raise click.UsageError(f"config field {name!r} must be at least 1")
        if not self.n_thermal_values:
            raise click.UsageError("config field 'n_thermal_values' must be nonempty")
        if not self.t0_slice:
            raise click.UsageError("config field 't0_slice' must be nonempty")
        return self

    def to_dict(self):
        d = dataclasses.asdict(self)
        d["t0_slice"] = list(self.t0_slice)
        d["n_thermal_values"] = list(self.n_thermal_values)
        return d

    @classmethod
    def from_dict(cls, data):
        known = {f.name for f in dataclasses.fields(cls)}
        for key in data:
            if key not in known:
                raise click.UsageError(f"unknown config field {key!r}")
        data = dict(data)
        for key in ("t0_slice", "n_thermal_values"):
            if key in data:
                data[key] = tuple(data[key])
        return cls(**data).validate()


def _load_config(path, overrides):
    data = {}
    if path is not None:
        with open(path) as fh:
            data = json.load(fh)
    data.update({k: v for k, v in overrides.items() if v is not None})
    return RunConfig.from_dict(data)


def _metadata(cfg, t_start):
    return {
        "config": cfg.to_dict(),
        "version": __version__,
        "wall_time_s": round(time.monotonic() - t_start, 3),
    }


def _workers():
    return max(1, int(os.environ.get(WORKERS_ENV, "1")))


def _parallel_map(func, items):
    n = _workers()
    if n == 1:
        return [func(item) for item in items]
    with concurrent.futures.ProcessPoolExecutor(max_workers=n) as pool:
        return list(pool.map(func, items))


def _emit(kind, dataset, output, fmt, figure):
    write_dataset(dataset, output, fmt)
    click.echo(f"wrote {output}")
    if figure:
        fig_path = os.path.splitext(output)[0] + ".png"
        render_figure(kind, dataset, fig_path)
        click.echo(f"wrote {fig_path}")


def _common_options(func):
    for deco in [
        click.option("--config", "config_path", type=click.Path(exists=True),
                     default=None, help="JSON config file."),
        click.option("--output", "-o", default=None, help="Output data file."),
        click.option("--format", "fmt", type=click.Choice(["csv", "json"]),
                     default="csv", show_default=True),
        click.option("--figure/--no-figure", default=True, show_default=True,
                     help="Also render a PNG next to the data file."),
    ]:
        func = deco(func)
    return func


@click.group()
@click.version_option(__version__)
def main():
    """Saturable-global-uncertainty sweeps for Gaussian and XY-chain sensors."""


def _thermo_grids(cfg):
    t0 = np.geomspace(cfg.t0_min, cfg.t0_max, cfg.t0_points)
    rel = np.linspace(cfg.delta_rel_min, cfg.delta_rel_max, cfg.delta_rel_points)
    return t0, rel


def _thermo_cell(args):
    t0, rel, grid_points, rtol = args
    res = thermometry.sgu_thermometry(t0, rel * t0, grid_points=grid_points, rtol=rtol)
    if res.diverged:
        return math.nan, math.nan
    return res.params["r_m"], res.value


@main.command("thermometry-map")
@_common_options
@click.option("--t0-min", type=float, default=None)
@click.option("--t0-max", type=float, default=None)
@click.option("--t0-points", type=int, default=None)
@click.option("--delta-rel-max", type=float, default=None)
@click.option("--delta-rel-points", type=int, default=None)
@click.option("--grid-points", type=int, default=None)
def thermometry_map(config_path, output, fmt, figure, **overrides):
    """Optimal r_m over the (T0, delta/T0) plane."""
    cfg = _load_config(config_path, overrides)
    t_start = time.monotonic()
    t0_grid, rel_grid = _thermo_grids(cfg)
    cells = [(t0, rel, cfg.grid_points, cfg.rtol)
             for t0 in t0_grid for rel in rel_grid]
    results = _parallel_map(_thermo_cell, cells)
    rows = []
    for (t0, rel, _, _), (r_opt, value) in zip(cells, results):
        diverged = math.isnan(r_opt)
        rows.append([t0, rel,
                     math.nan if diverged else r_opt,
                     math.nan if diverged else value,
                     int(diverged)])
    dataset = Dataset(["T0", "delta_rel", "r_m_opt", "sgu", "diverged"],
                      rows, _metadata(cfg, t_start))
    _emit("thermometry-map", dataset, output or "thermometry_map.csv", fmt, figure)


def _counter_cell(args):
    t0, rel, cap, rtol = args
    return thermometry.minimal_outperforming_levels(t0, rel * t0, cap=cap, rtol=rtol)


@main.command("counter-map")
@_common_options
@click.option("--t0-min", type=float, default=None)
@click.option("--t0-max", type=float, default=None)
@click.option("--t0-points", type=int, default=None)
@click.option("--delta-rel-max", type=float, default=None)
@click.option("--delta-rel-points", type=int, default=None)
@click.option("--m0-cap", type=int, default=None)
def counter_map(config_path, output, fmt, figure, **overrides):
    """Minimal photon-counter levels m0 beating the best Gaussian strategy."""
    cfg = _load_config(config_path, overrides)
    t_start = time.monotonic()
    t0_grid, rel_grid = _thermo_grids(cfg)
    cells = [(t0, rel, cfg.m0_cap, cfg.rtol) for t0 in t0_grid for rel in rel_grid]
    results = _parallel_map(_counter_cell, cells)
    rows = []
    for (t0, rel, _, _), m0 in zip(cells, results):
        capped = m0 == thermometry.GAUSSIAN_OPTIMAL
        rows.append([t0, rel, math.nan if capped else m0, int(capped)])
    dataset = Dataset(["T0", "delta_rel", "m0", "gaussian_optimal"],
                      rows, _metadata(cfg, t_start))
    _emit("counter-map", dataset, output or "counter_map.csv", fmt, figure)


@main.command("counter-slice")
@_common_options
@click.option("--delta-rel-min", type=float, default=None)
@click.option("--delta-rel-max", type=float, default=None)
@click.option("--delta-rel-points", type=int, default=None)
@click.option("--m0-cap", type=int, default=None)
def counter_slice(config_path, output, fmt, figure, **overrides):
    """m0 versus delta/T0 at the low/high reference temperatures."""
    cfg = _load_config(config_path, overrides)
    t_start = time.monotonic()
    rel_grid = np.linspace(cfg.delta_rel_min, cfg.delta_rel_max,
                           cfg.delta_rel_points)
    cells = [(t0, rel, cfg.m0_cap, cfg.rtol)
             for t0 in cfg.t0_slice for rel in rel_grid]
    results = _parallel_map(_counter_cell, cells)
    rows = []
    for (t0, rel, _, _), m0 in zip(cells, results):
        capped = m0 == thermometry.GAUSSIAN_OPTIMAL
        rows.append([t0, rel, math.nan if capped else m0, int(capped)])
    dataset = Dataset(["T0", "delta_rel", "m0", "gaussian_optimal"],
                      rows, _metadata(cfg, t_start))
    _emit("counter-slice", dataset, output or "counter_slice.csv", fmt, figure)


@main.command("pe-scaling")
@_common_options
@click.option("--delta", type=float, default=None)
@click.option("--n-min", type=float, default=None)
@click.option("--n-max", type=float, default=None)
@click.option("--n-points", type=int, default=None)
@click.option("--lam0", type=float, default=None)
@click.option("--grid-points", type=int, default=None)
def pe_scaling(config_path, output, fmt, figure, **overrides):
    """Averaged uncertainty vs photon number for the squeezed-vacuum probe."""
    cfg = _load_config(config_path, overrides)
    t_start = time.monotonic()
    n_grid = np.geomspace(cfg.n_min, cfg.n_max, cfg.n_points)
    curve = phase.measurement_comparison_curve(
        cfg.delta, n_grid, lam0=cfg.lam0, grid_points=cfg.grid_points,
        rtol=cfg.rtol)
    rows = [[r["n_prime"], cfg.delta, r["G_opt"], r["G_homodyne"],
             r["G_heterodyne"], r["s_m_opt"]] for r in curve]
    dataset = Dataset(
        ["n_prime", "delta", "G_opt", "G_homodyne", "G_heterodyne", "s_m_opt"],
        rows, _metadata(cfg, t_start))
    _emit("pe-scaling", dataset, output or "pe_scaling.csv", fmt, figure)


@main.command("pe-asymptotic")
@_common_options
@click.option("--pe-n", type=float, default=None)
@click.option("--pe-delta-min", type=float, default=None)
@click.option("--pe-delta-max", type=float, default=None)
@click.option("--pe-delta-points", type=int, default=None)
@click.option("--lam0", type=float, default=None)
def pe_asymptotic(config_path, output, fmt, figure, **overrides):
    """Optimal measurement squeezing vs window width at large photon number."""
    cfg = _load_config(config_path, overrides)
    t_start = time.monotonic()
    deltas = np.geomspace(cfg.pe_delta_min, cfg.pe_delta_max, cfg.pe_delta_points)
    rows = []
    for delta in deltas:
        res = phase.sgu_sv_from_photons(cfg.lam0, delta, cfg.pe_n,
                                        grid_points=cfg.grid_points, rtol=cfg.rtol)
        rows.append([delta, res.params.get("s_m", math.nan)])
    dataset = Dataset(["delta", "s_m_opt"], rows, _metadata(cfg, t_start))
    _emit("pe-asymptotic", dataset, output or "pe_asymptotic.csv", fmt, figure)


@main.command("pe-thermal")
@_common_options
@click.option("--st-s", type=float, default=None)
@click.option("--pe-delta-min", type=float, default=None)
@click.option("--pe-delta-max", type=float, default=None)
@click.option("--pe-delta-points", type=int, default=None)
@click.option("--lam0", type=float, default=None)
def pe_thermal(config_path, output, fmt, figure, **overrides):
    """Optimal measurement squeezing for squeezed-thermal probes."""
    cfg = _load_config(config_path, overrides)
    t_start = time.monotonic()
    deltas = np.geomspace(cfg.pe_delta_min, cfg.pe_delta_max, cfg.pe_delta_points)
    rows = []
    for n_th in cfg.n_thermal_values:
        for delta in deltas:
            res = phase.sgu_st(cfg.lam0, delta, cfg.st_s, n_th,
                               grid_points=cfg.grid_points, rtol=cfg.rtol)
            rows.append([delta, n_th, res.params.get("s_m", math.nan)])
    dataset = Dataset(["delta", "n_thermal", "s_m_opt"], rows,
                      _metadata(cfg, t_start))
    _emit("pe-thermal", dataset, output or "pe_thermal.csv", fmt, figure)


@main.command("xy-sgu")
@_common_options
@click.option("--n-sites", type=int, default=None)
@click.option("--gamma", type=float, default=None)
@click.option("--xy-lam0", type=float, default=None)
@click.option("--xy-delta", type=float, default=None)
@click.option("--k-cutoff", type=float, default=None)
def xy_sgu(config_path, output, fmt, figure, **overrides):
    """XY-chain magnetometry: SGU, the QFI bound G, and the per-cell bases."""
    cfg = _load_config(config_path, overrides)
    t_start = time.monotonic()
    chain = xychain.XYChain(cfg.n_sites, cfg.gamma)
    if cfg.k_cutoff > 0:
        res = xychain.truncated_sgu(chain, cfg.xy_lam0, cfg.xy_delta,
                                    cfg.k_cutoff, rtol=cfg.rtol)
    else:
        res = xychain.sgu_xy(chain, cfg.xy_lam0, cfg.xy_delta, rtol=cfg.rtol)
    bases = res.flags["bases"]
    angles = ";".join(f"{b.theta_m:.12g}:{b.phi_m:.12g}" for b in bases)
    rows = [[cfg.xy_lam0, cfg.xy_delta, res.flags["G"],
             math.nan if res.diverged else res.value,
             int(res.diverged), angles]]
    dataset = Dataset(["lambda0", "delta", "G", "sgu", "diverged",
                       "basis_angles"], rows, _metadata(cfg, t_start))
    _emit("xy-sgu", dataset, output or "xy_sgu.csv", fmt, figure)


def run():
    # click maps usage errors to exit code 2 on its own; numerical failures
    # are mapped to 3 here
    try:
        main()
    except (NumericalError, DomainError) as exc:
        click.echo(f"numerical failure: {exc}", err=True)
        sys.exit(3)


if __name__ == "__main__":
    run()
