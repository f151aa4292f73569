"""Figure rendering: schemas, front coloring, baseline line, pixel stability."""

import csv
import subprocess
import sys

import numpy as np
import pytest

from balanceplots import FigureKind, FigureSpec, SchemaError, build_figure, render
from balanceplots.cli import main


def write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        w.writerows(rows)
    return str(path)


@pytest.fixture
def generations_csv(tmp_path):
    rows = [[g, 0.8 - 0.05 * g, 0.9 - 0.04 * g, 0.95, 100 + g] for g in range(1, 13)]
    return write_csv(tmp_path / "generations.csv",
                     ["generation", "min_F", "avg_F", "max_F", "best_M"], rows)


@pytest.fixture
def archive_csv(tmp_path):
    # five points whose true front is {(0.1, 30), (0.5, 0)}
    rows = [
        [0, 0, 0.5, 0, 1, 1],
        [1, 0, 0.1, 30, 1, 0],
        [2, 1, 0.2, 40, 0, 0],
        [3, 1, 0.6, 10, 0, 0],
        [4, 2, 0.3, 35, 0, 0],
    ]
    return write_csv(tmp_path / "archive.csv",
                     ["individual_id", "generation", "F", "M", "on_front", "seeded"],
                     rows)


@pytest.fixture
def impact_csv(tmp_path):
    rows = [
        ["a", 0.82, 0.81, 0.70, 0.75, -0.05, 0],
        ["b", 0.78, 0.77, 0.72, 0.75, -0.03, 0],
        ["c", 0.74, "", 0.74, 0.75, -0.01, 0],
        ["d", 0.70, 0.69, 0.75, 0.75, 0.00, 0],
        ["e", 0.66, 0.65, 0.76, 0.75, 0.01, 0],
    ]
    return write_csv(tmp_path / "impact.csv",
                     ["card_id", "wrd", "wrp", "wrn", "baseline", "delta", "noop_nerf"],
                     rows)


def test_fitness_curve_has_baseline_line(generations_csv, tmp_path):
    spec = FigureSpec(kind=FigureKind.FITNESS_CURVE, csv_path=generations_csv,
                      out_path=str(tmp_path / "fig.png"), baseline=0.78)
    fig = build_figure(spec)
    ax = fig.axes[0]
    assert len(ax.get_xticks()) == 12
    baselines = [line for line in ax.get_lines()
                 if np.allclose(line.get_ydata(), 0.78)]
    assert baselines, "baseline line missing"
    assert len(ax.get_lines()) == 4  # min, avg, max, baseline


def test_pareto_scatter_colors_exactly_the_front(archive_csv, tmp_path):
    spec = FigureSpec(kind=FigureKind.PARETO_SCATTER, csv_path=archive_csv,
                      out_path=str(tmp_path / "fig.png"))
    fig = build_figure(spec)
    ax = fig.axes[0]
    by_gid = {c.get_gid(): c for c in ax.collections}
    front_pts = np.vstack([by_gid["front"].get_offsets(),
                           by_gid["front-seeded"].get_offsets()])
    # recompute the front from the CSV by direct dominance as the oracle
    points = [(0.5, 0), (0.1, 30), (0.2, 40), (0.6, 10), (0.3, 35)]

    def dominated(p, q):
        return q[0] <= p[0] and q[1] <= p[1] and q != p

    oracle = {(m, f) for f, m in points
              if not any(dominated((f, m), q) for q in points)}
    assert {tuple(p) for p in front_pts} == oracle
    assert len(by_gid["cloud"].get_offsets()) == 3


def test_impact_scatter_panels_and_trends(impact_csv, tmp_path):
    spec = FigureSpec(kind=FigureKind.IMPACT_SCATTER, csv_path=impact_csv,
                      out_path=str(tmp_path / "fig.png"))
    fig = build_figure(spec)
    assert len(fig.axes) == 2
    for ax, n_expected in zip(fig.axes, (4, 5)):  # one blank wrp cell
        gids = {line.get_gid() for line in ax.get_lines()}
        assert any(g and g.endswith("-trend") for g in gids)
        pts = ax.collections[0].get_offsets()
        assert len(pts) == n_expected
    # the WRD panel trend slope is negative for this fixture
    wrd_ax = fig.axes[1]
    trend = [l for l in wrd_ax.get_lines() if (l.get_gid() or "").endswith("-trend")][0]
    y = trend.get_ydata()
    assert y[0] > y[-1]


def test_render_is_pixel_stable(generations_csv, archive_csv, impact_csv, tmp_path):
    specs = [
        FigureSpec(FigureKind.FITNESS_CURVE, generations_csv,
                   str(tmp_path / "a.png"), baseline=0.78),
        FigureSpec(FigureKind.PARETO_SCATTER, archive_csv, str(tmp_path / "b.png")),
        FigureSpec(FigureKind.IMPACT_SCATTER, impact_csv, str(tmp_path / "c.png")),
    ]
    for spec in specs:
        first = open(render(spec), "rb").read()
        again = open(render(spec), "rb").read()
        assert first == again, f"{spec.kind}: output not pixel-stable"
        assert first[:8] == b"\x89PNG\r\n\x1a\n"


def test_schema_mismatch_names_the_column(tmp_path, archive_csv):
    bad = write_csv(tmp_path / "bad.csv", ["generation", "min_F"], [[1, 0.5]])
    with pytest.raises(SchemaError, match="avg_F"):
        build_figure(FigureSpec(FigureKind.FITNESS_CURVE, bad,
                                str(tmp_path / "x.png")))
    rc = main(["--kind", "fitness-curve", "--in", bad,
               "--out", str(tmp_path / "x.png")])
    assert rc == 2
    rc = main(["--kind", "pareto-scatter", "--in", archive_csv,
               "--out", str(tmp_path / "ok.png")])
    assert rc == 0


def test_cli_renders_real_pipeline_outputs(tmp_path):
    """End to end: a tiny primary-CLI run, then all three figures from its CSVs."""
    from metabalance.data import _path as data

    def mb(*argv):
        proc = subprocess.run([sys.executable, "-m", "metabalance.cli", *argv],
                              capture_output=True, text=True)
        assert proc.returncode == 0, proc.stderr
        return proc

    decks = [data("deck_hunter.json"), data("deck_paladin.json"),
             data("deck_warlock.json")]
    common = ["--pool", data("pool.json"), "--decks", *decks,
              "--agents", "aggro,control,control", "--seed", "3"]
    mb("evolve-single", *common, "--games", "4", "--generations", "3",
       "--population", "6", "--out", str(tmp_path / "ga"))
    mb("evolve-pareto", *common, "--games", "4", "--generations", "2",
       "--population", "6", "--out", str(tmp_path / "mo"))
    mb("nerf-sweep", "--pool", data("pool.json"),
       "--decks", data("deck_hunter.json"), data("deck_warlock.json"),
       "--agents", "aggro,control", "--target-deck", data("deck_paladin.json"),
       "--target-agent", "control", "--games", "8", "--seed", "3",
       "--out", str(tmp_path / "sweep"))

    for kind, src, extra in (
            ("fitness-curve", tmp_path / "ga" / "generations.csv", ["--baseline", "0.6"]),
            ("pareto-scatter", tmp_path / "mo" / "archive.csv", []),
            ("impact-scatter", tmp_path / "sweep" / "impact.csv", [])):
        out = tmp_path / f"{kind}.png"
        rc = main(["--kind", kind, "--in", str(src), "--out", str(out), *extra])
        assert rc == 0
        assert out.stat().st_size > 1000
