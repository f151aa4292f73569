"""The three figure kinds: fitness curve, Pareto scatter, impact scatter.

Rendering is a pure function of the input CSV under a pinned style, so the
same file produces byte-identical PNGs run after run.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from enum import Enum
from typing import Optional

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

# pinned style: deterministic output regardless of user rc files
STYLE = {
    "figure.figsize": (6.4, 4.8),
    "figure.dpi": 110,
    "savefig.dpi": 110,
    "font.family": "DejaVu Sans",
    "font.size": 10,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "svg.hashsalt": "balanceplots",
}

FRONT_COLOR = "#d62728"      # non-dominated points
SEED_COLOR = "#ffd700"       # seeded individuals
CLOUD_COLOR = "#7f8fa6"
CURVE_COLORS = {"min": "#1f77b4", "avg": "#2ca02c", "max": "#ff7f0e"}


class SchemaError(Exception):
    """The CSV does not match the schema of the requested figure kind."""


class FigureKind(str, Enum):
    FITNESS_CURVE = "fitness-curve"
    PARETO_SCATTER = "pareto-scatter"
    IMPACT_SCATTER = "impact-scatter"


@dataclass(frozen=True)
class FigureSpec:
    kind: FigureKind
    csv_path: str
    out_path: str
    baseline: Optional[float] = None


def _read_csv(path, required):
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        for column in required:
            if column not in header:
                raise SchemaError(f"{path}: missing column {column!r} "
                                  f"(have {header})")
        rows = list(reader)
    if not rows:
        raise SchemaError(f"{path}: no data rows")
    return rows


def _floats(rows, column, allow_blank=False):
    out = []
    for i, row in enumerate(rows):
        raw = row[column].strip()
        if raw == "" and allow_blank:
            out.append(math.nan)
            continue
        try:
            out.append(float(raw))
        except ValueError:
            raise SchemaError(f"row {i + 1}: column {column!r} is not numeric: {raw!r}")
    return np.asarray(out)


def build_figure(spec: FigureSpec):
    """Build the matplotlib figure for a spec; separated out for testing."""
    with plt.rc_context(STYLE):
        if spec.kind is FigureKind.FITNESS_CURVE:
            return _fitness_curve(spec)
        if spec.kind is FigureKind.PARETO_SCATTER:
            return _pareto_scatter(spec)
        return _impact_scatter(spec)


def render(spec: FigureSpec) -> str:
    fig = build_figure(spec)
    try:
        fig.savefig(spec.out_path, format="png",
                    metadata={"Software": "balanceplots"})
    finally:
        plt.close(fig)
    return spec.out_path


def _fitness_curve(spec: FigureSpec):
    rows = _read_csv(spec.csv_path, ["generation", "min_F", "avg_F", "max_F"])
    gens = _floats(rows, "generation")
    fig, ax = plt.subplots()
    for name, column in (("min", "min_F"), ("avg", "avg_F"), ("max", "max_F")):
        ax.plot(gens, _floats(rows, column), marker="o", markersize=3,
                color=CURVE_COLORS[name], label=f"{name} fitness")
    if spec.baseline is not None:
        ax.axhline(spec.baseline, color="#555555", linestyle="--",
                   label=f"baseline {spec.baseline:.2f}")
    ax.set_xlabel("generation")
    ax.set_ylabel("balance fitness F")
    ax.set_xticks(gens)
    ax.set_ylim(bottom=0)
    ax.legend()
    ax.set_title("Fitness per generation")
    fig.tight_layout()
    return fig


def _pareto_scatter(spec: FigureSpec):
    rows = _read_csv(spec.csv_path,
                     ["individual_id", "generation", "F", "M", "on_front", "seeded"])
    f = _floats(rows, "F")
    m = _floats(rows, "M")
    on_front = _floats(rows, "on_front").astype(bool)
    seeded = _floats(rows, "seeded").astype(bool)
    cloud = ~on_front & ~seeded
    fig, ax = plt.subplots()
    ax.scatter(m[cloud], f[cloud], s=12, color=CLOUD_COLOR, alpha=0.5,
               label="evaluated", gid="cloud")
    ax.scatter(m[seeded & ~on_front], f[seeded & ~on_front], s=36,
               color=SEED_COLOR, edgecolors="black", linewidths=0.5,
               label="seeded", gid="seeded")
    ax.scatter(m[on_front & ~seeded], f[on_front & ~seeded], s=28,
               color=FRONT_COLOR, label="Pareto front", gid="front")
    both = on_front & seeded
    ax.scatter(m[both], f[both], s=40, color=FRONT_COLOR,
               edgecolors=SEED_COLOR, linewidths=1.5,
               label="seeded, on front", gid="front-seeded")
    ax.set_xlabel("magnitude of changes M")
    ax.set_ylabel("balance fitness F")
    ax.legend()
    ax.set_title("Balance vs. magnitude, non-dominated front highlighted")
    fig.tight_layout()
    return fig


def _corr(xs, ys):
    ok = ~(np.isnan(xs) | np.isnan(ys))
    xs, ys = xs[ok], ys[ok]
    if len(xs) < 2:
        return math.nan, math.nan, len(xs)
    pearson = float(np.corrcoef(xs, ys)[0, 1])

    def ranks(v):
        order = np.argsort(v, kind="stable")
        r = np.empty(len(v))
        r[order] = np.arange(1, len(v) + 1)
        # average ties
        for val in np.unique(v):
            mask = v == val
            r[mask] = r[mask].mean()
        return r

    spearman = float(np.corrcoef(ranks(xs), ranks(ys))[0, 1])
    return pearson, spearman, len(xs)


def _impact_scatter(spec: FigureSpec):
    rows = _read_csv(spec.csv_path, ["card_id", "wrd", "wrp", "wrn", "baseline"])
    wrd = _floats(rows, "wrd", allow_blank=True)
    wrp = _floats(rows, "wrp", allow_blank=True)
    wrn = _floats(rows, "wrn")
    baseline = _floats(rows, "baseline")[0]
    fig, axes = plt.subplots(1, 2, figsize=(9.6, 4.4))
    for ax, xs, name in ((axes[0], wrp, "WRP"), (axes[1], wrd, "WRD")):
        ok = ~(np.isnan(xs) | np.isnan(wrn))
        ax.scatter(xs[ok], wrn[ok], s=20, color="#1f77b4", gid=f"{name.lower()}-points")
        pearson, spearman, n = _corr(xs, wrn)
        if n >= 2:
            slope, intercept = np.polyfit(xs[ok], wrn[ok], 1)
            grid = np.linspace(float(xs[ok].min()), float(xs[ok].max()), 32)
            ax.plot(grid, slope * grid + intercept, color=FRONT_COLOR,
                    linestyle="-", gid=f"{name.lower()}-trend")
            ax.annotate(f"Pearson {pearson:+.3f}\nSpearman {spearman:+.3f}",
                        xy=(0.03, 0.04), xycoords="axes fraction", fontsize=9)
        ax.axhline(baseline, color="#555555", linestyle=":", linewidth=1)
        ax.set_xlabel(name)
        ax.set_ylabel("WRN")
        ax.set_title(f"{name} versus win rate after nerf")
    fig.tight_layout()
    return fig
