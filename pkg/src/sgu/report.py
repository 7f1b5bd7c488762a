"""Dataset serialization and figure rendering for the CLI sweeps.

CSV output carries a '#'-prefixed metadata block (config echo, version, wall
time) followed by a header row; the JSON format mirrors the same fields.
Numbers are printed with 12 significant digits; missing / diverged cells are
empty, never zero.
"""

import json
import math
from dataclasses import dataclass, field

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np


@dataclass
class Dataset:
    columns: list
    rows: list
    metadata: dict = field(default_factory=dict)


def _fmt(value):
    if value is None:
        return ""
    if isinstance(value, str):
        return value
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, float) and math.isnan(value):
        return ""
    return f"{value:.12g}"


def write_csv(dataset, path):
    with open(path, "w") as fh:
        for key, value in dataset.metadata.items():
            if isinstance(value, (dict, list)):
                value = json.dumps(value, sort_keys=True)
            fh.write(f"# {key} = {value}\n")
        fh.write(",".join(dataset.columns) + "\n")
        for row in dataset.rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def write_json(dataset, path):
    def cell(v):
        if isinstance(v, float) and math.isnan(v):
            return None
        if isinstance(v, (np.integer,)):
            return int(v)
        if isinstance(v, (np.floating,)):
            return float(v)
        return v

    payload = {
        "metadata": dataset.metadata,
        "columns": dataset.columns,
        "rows": [[cell(v) for v in row] for row in dataset.rows],
    }
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def write_dataset(dataset, path, fmt):
    if fmt == "csv":
        write_csv(dataset, path)
    elif fmt == "json":
        write_json(dataset, path)
    else:
        raise ValueError(f"unknown output format {fmt!r}")


def _column(dataset, name):
    i = dataset.columns.index(name)
    return np.array([row[i] if row[i] is not None else math.nan
                     for row in dataset.rows], dtype=float)


def _heatmap(ax, dataset, xcol, ycol, zcol, logx=False):
    x = np.unique(_column(dataset, xcol))
    y = np.unique(_column(dataset, ycol))
    z = np.full((y.size, x.size), np.nan)
    xi = {v: i for i, v in enumerate(x)}
    yi = {v: i for i, v in enumerate(y)}
    for row in dataset.rows:
        r = dict(zip(dataset.columns, row))
        zv = r[zcol]
        if zv is None or (isinstance(zv, float) and math.isnan(zv)):
            continue
        z[yi[r[ycol]], xi[r[xcol]]] = zv
    mesh = ax.pcolormesh(x, y, z, shading="nearest")
    if logx:
        ax.set_xscale("log")
    ax.set_xlabel(xcol)
    ax.set_ylabel(ycol)
    return mesh


def render_figure(kind, dataset, path):
    """Render the standard companion figure for a subcommand's dataset."""
    fig, ax = plt.subplots(figsize=(5.2, 4.0))
    if kind == "thermometry-map":
        mesh = _heatmap(ax, dataset, "T0", "delta_rel", "r_m_opt", logx=True)
        fig.colorbar(mesh, ax=ax, label="optimal r_m")
    elif kind == "counter-map":
        mesh = _heatmap(ax, dataset, "T0", "delta_rel", "m0", logx=True)
        fig.colorbar(mesh, ax=ax, label="minimal m0")
    elif kind == "counter-slice":
        t0s = np.unique(_column(dataset, "T0"))
        for t0 in t0s:
            mask = _column(dataset, "T0") == t0
            ax.plot(_column(dataset, "delta_rel")[mask],
                    _column(dataset, "m0")[mask], marker="o", label=f"T0 = {t0:g}")
        ax.set_xlabel("delta / T0")
        ax.set_ylabel("minimal m0")
        ax.set_yscale("log")
        ax.legend()
    elif kind == "pe-scaling":
        n = _column(dataset, "n_prime")
        for col, label in [("G_opt", "optimal"), ("G_homodyne", "homodyne"),
                           ("G_heterodyne", "heterodyne")]:
            ax.loglog(n, _column(dataset, col), label=label)
        ax.set_xlabel("n'")
        ax.set_ylabel("averaged uncertainty")
        ax.legend()
    elif kind == "pe-asymptotic":
        ax.semilogx(_column(dataset, "delta"), _column(dataset, "s_m_opt"),
                    marker="o")
        ax.set_xlabel("delta")
        ax.set_ylabel("optimal s_m")
    elif kind == "pe-thermal":
        nth = np.unique(_column(dataset, "n_thermal"))
        for v in nth:
            mask = _column(dataset, "n_thermal") == v
            ax.semilogx(_column(dataset, "delta")[mask],
                        _column(dataset, "s_m_opt")[mask],
                        marker="o", label=f"n_th = {v:g}")
        ax.set_xlabel("delta")
        ax.set_ylabel("optimal s_m")
        ax.legend()
    elif kind == "xy-sgu":
        ax.axis("off")
        lines = [f"{c} = {_fmt(v)}" for c, v in
                 zip(dataset.columns[:4], dataset.rows[0][:4])]
        ax.text(0.05, 0.6, "\n".join(lines), family="monospace")
    else:
        raise ValueError(f"unknown figure kind {kind!r}")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
