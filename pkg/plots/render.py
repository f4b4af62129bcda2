#!/usr/bin/env python3
"""Render publication-style figures from experiment result CSVs.

File-driven companion to the coverage simulator: input is a result table
with columns preset,system,sweep_value,mean,std_error,n_runs (as written by
`uavcover experiment`), output is a PNG. The simulator and its test suite
never depend on this tool.

Usage:
    python plots/render.py --in fig3.csv --preset fig3 --out fig3.png

Presets:
    fig3          covered users vs. clustering level, one line per system
    fig4          covered users per minute, one bar per system
    fig5          multi-UAV setups vs. clustering level, one line per setup
    anchor_ratio  covered users vs. anchor count, one line per system
"""

from __future__ import annotations

import argparse
import csv
import re
import sys
from dataclasses import dataclass, field

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402  (backend must be pinned first)

EXPECTED_COLUMNS = ["preset", "system", "sweep_value", "mean", "std_error",
                    "n_runs"]
PRESETS = ("fig3", "fig4", "fig5", "anchor_ratio")

X_LABELS = {
    "fig3": "user clustering (CoV of Voronoi cell areas)",
    "fig4": "system",
    "fig5": "user clustering (CoV of Voronoi cell areas)",
    "anchor_ratio": "anchors available",
}
Y_LABELS = {
    "fig3": "average covered users",
    "fig4": "average covered users per minute",
    "fig5": "average covered users",
    "anchor_ratio": "average covered users",
}
TITLES = {
    "fig3": "Coverage vs. user clustering",
    "fig4": "Service over a timed mission",
    "fig5": "Multi-UAV setups vs. user clustering",
    "anchor_ratio": "Coverage vs. anchor availability",
}

FIGSIZE = (6.4, 4.2)
DPI = 150


class RenderError(ValueError):
    """Bad input table or a preset/file mismatch."""


@dataclass(frozen=True)
class PlotStyle:
    error_bars: bool = True
    y_label: str | None = None


@dataclass(frozen=True)
class FigureSpec:
    input_csv: str
    preset: str
    output_image: str
    style: PlotStyle = field(default_factory=PlotStyle)


def load_rows(path: str) -> list[dict]:
    """Parse and validate a result CSV; raises RenderError on any defect."""
    with open(path, "r", newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise RenderError(f"{path}: empty file, nothing to plot")
        if reader.fieldnames != EXPECTED_COLUMNS:
            raise RenderError(f"{path}: expected columns {EXPECTED_COLUMNS}, "
                              f"found {reader.fieldnames}")
        rows = []
        for i, raw in enumerate(reader):
            try:
                rows.append({
                    "preset": raw["preset"],
                    "system": raw["system"],
                    "sweep_value": float(raw["sweep_value"]),
                    "mean": float(raw["mean"]),
                    "std_error": float(raw["std_error"]),
                    "n_runs": int(raw["n_runs"]),
                })
            except (TypeError, ValueError) as exc:
                raise RenderError(f"{path}: bad row {i + 2}: {exc}") from exc
    if not rows:
        raise RenderError(f"{path}: no data rows, nothing to plot")
    return rows


def _fig4_position(system: str) -> tuple:
    """Bar order: battery-limited, tethered, anchor counts rising, swap last."""
    m = re.match(r"uav_noswap_([\d.]+)$", system)
    if m:
        return (0, float(m.group(1)))
    if system == "tuav":
        return (1, 0.0)
    m = re.match(r"ituav_(\d+)$", system)
    if m:
        return (2, float(m.group(1)))
    if system == "uav_swap":
        return (3, 0.0)
    return (4, system)


def _series(rows: list[dict]) -> dict[str, list[dict]]:
    out: dict[str, list[dict]] = {}
    for row in rows:
        out.setdefault(row["system"], []).append(row)
    for series in out.values():
        series.sort(key=lambda r: r["sweep_value"])
    return out


def _render_lines(ax, rows: list[dict], style: PlotStyle) -> None:
    markers = ["o", "s", "^", "D", "v", "<", ">", "p"]
    for i, (system, series) in enumerate(sorted(_series(rows).items())):
        x = [r["sweep_value"] for r in series]
        y = [r["mean"] for r in series]
        err = [r["std_error"] for r in series] if style.error_bars else None
        ax.errorbar(x, y, yerr=err, label=system,
                    marker=markers[i % len(markers)], capsize=3)
    ax.legend()


def _render_bars(ax, rows: list[dict], style: PlotStyle) -> None:
    ordered = sorted(_series(rows).items(),
                     key=lambda kv: _fig4_position(kv[0]))
    labels = [system for system, _ in ordered]
    means = [series[0]["mean"] for _, series in ordered]
    errs = [series[0]["std_error"] for _, series in ordered] \
        if style.error_bars else None
    ax.bar(range(len(labels)), means, yerr=errs, capsize=3,
           color="tab:blue", edgecolor="black")
    ax.set_xticks(range(len(labels)))
    ax.set_xticklabels(labels, rotation=45, ha="right", fontsize=8)


def render(spec: FigureSpec):
    """Render one preset figure; returns the matplotlib Figure after saving."""
    if spec.preset not in PRESETS:
        raise RenderError(f"unknown preset {spec.preset!r}")
    rows = load_rows(spec.input_csv)
    found = {r["preset"] for r in rows}
    if found != {spec.preset}:
        raise RenderError(f"{spec.input_csv}: preset column has {sorted(found)}, "
                          f"expected only {spec.preset!r}")

    fig, ax = plt.subplots(figsize=FIGSIZE, dpi=DPI)
    if spec.preset == "fig4":
        _render_bars(ax, rows, spec.style)
    else:
        _render_lines(ax, rows, spec.style)
    ax.set_xlabel(X_LABELS[spec.preset])
    ax.set_ylabel(spec.style.y_label or Y_LABELS[spec.preset])
    ax.set_title(TITLES[spec.preset])
    ax.grid(True, alpha=0.3, linestyle=":")
    fig.tight_layout()
    fig.savefig(spec.output_image, format="png")
    return fig


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        description="Render a figure from an experiment result CSV")
    parser.add_argument("--in", dest="input_csv", required=True)
    parser.add_argument("--preset", required=True, choices=PRESETS)
    parser.add_argument("--out", dest="output_image", required=True)
    parser.add_argument("--no-error-bars", action="store_true")
    parser.add_argument("--y-label", default=None)
    args = parser.parse_args(argv)
    spec = FigureSpec(input_csv=args.input_csv, preset=args.preset,
                      output_image=args.output_image,
                      style=PlotStyle(error_bars=not args.no_error_bars,
                                      y_label=args.y_label))
    try:
        fig = render(spec)
    except (RenderError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    plt.close(fig)
    print(f"wrote {spec.output_image}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
