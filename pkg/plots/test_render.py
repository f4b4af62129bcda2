"""Figure tool tests, including the rendering acceptance check (A10).

The tool is exercised through its external surfaces only: the result-CSV
schema and the command line of the simulator package.
"""

import csv
import subprocess
import sys
from pathlib import Path

import pytest

from render import (EXPECTED_COLUMNS, FigureSpec, PlotStyle, RenderError,
                    load_rows, main, render)

PLOTS_DIR = Path(__file__).resolve().parent


def _write_table(path, preset, systems, sweeps, base=10.0):
    """A miniature result CSV in the documented schema."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(EXPECTED_COLUMNS)
        rows = []
        for system in systems:
            for j, sv in enumerate(sweeps):
                rows.append((preset, system, float(sv),
                             base + 3.0 * j + (len(system) * 3) % 7, 1.25, 200))
        rows.sort(key=lambda r: (r[0], r[1], r[2]))
        for r in rows:
            w.writerow(r)


FIG3_SYSTEMS = ("uav_swap", "tuav", "ituav_10")
FIG4_SYSTEMS = ("uav_noswap_30", "uav_noswap_60", "uav_swap", "tuav") + \
    tuple(f"ituav_{k}" for k in range(3, 11))
FIG5_SYSTEMS = ("tuav_x2", "tuav_x3", "ituav_1x3", "ituav_2x4")


def test_a10_renders_three_figures(tmp_path):
    """A10: the three study CSVs render with correct series and labels."""
    cases = [
        ("fig3", FIG3_SYSTEMS, (1.0, 6.0)),
        ("fig4", FIG4_SYSTEMS, (3.0,)),
        ("fig5", FIG5_SYSTEMS, (6.0,)),
    ]
    checks = []
    for preset, systems, sweeps in cases:
        csv_path = tmp_path / f"{preset}.csv"
        png_path = tmp_path / f"{preset}.png"
        _write_table(csv_path, preset, systems, sweeps)
        fig = render(FigureSpec(str(csv_path), preset, str(png_path)))
        ax = fig.axes[0]
        if preset == "fig4":
            n_series = len(ax.patches)
        else:
            n_series = len(ax.get_legend_handles_labels()[1])
        assert n_series == len(systems), (preset, n_series)
        assert ax.get_ylabel() != "" and ax.get_xlabel() != ""
        assert png_path.exists() and png_path.stat().st_size > 0
        checks.append(f"{preset}: {n_series} series")

    empty = tmp_path / "empty.csv"
    empty.write_text("")
    out = tmp_path / "empty.png"
    rc = main(["--in", str(empty), "--preset", "fig3", "--out", str(out)])
    assert rc != 0 and not out.exists()
    checks.append("empty CSV rejected")
    print(f"\nA10 figure rendering: PASS ({'; '.join(checks)})")


def test_fig4_bar_ordering(tmp_path):
    csv_path = tmp_path / "fig4.csv"
    _write_table(csv_path, "fig4", FIG4_SYSTEMS, (3.0,))
    fig = render(FigureSpec(str(csv_path), "fig4", str(tmp_path / "f.png")))
    labels = [t.get_text() for t in fig.axes[0].get_xticklabels()]
    assert labels == ["uav_noswap_30", "uav_noswap_60", "tuav"] + \
        [f"ituav_{k}" for k in range(3, 11)] + ["uav_swap"]


def test_rendering_is_deterministic_and_nondestructive(tmp_path):
    csv_path = tmp_path / "fig3.csv"
    _write_table(csv_path, "fig3", FIG3_SYSTEMS, (1.0, 3.0, 6.0))
    before = csv_path.read_bytes()
    p1, p2 = tmp_path / "a.png", tmp_path / "b.png"
    render(FigureSpec(str(csv_path), "fig3", str(p1)))
    render(FigureSpec(str(csv_path), "fig3", str(p2)))
    assert p1.read_bytes() == p2.read_bytes()
    assert csv_path.read_bytes() == before


def test_error_bars_can_be_disabled(tmp_path):
    csv_path = tmp_path / "fig3.csv"
    _write_table(csv_path, "fig3", FIG3_SYSTEMS, (1.0, 6.0))
    spec = FigureSpec(str(csv_path), "fig3", str(tmp_path / "f.png"),
                      style=PlotStyle(error_bars=False, y_label="users"))
    fig = render(spec)
    assert fig.axes[0].get_ylabel() == "users"


def test_preset_mismatch_is_rejected(tmp_path):
    csv_path = tmp_path / "fig4.csv"
    _write_table(csv_path, "fig4", FIG4_SYSTEMS, (3.0,))
    with pytest.raises(RenderError):
        render(FigureSpec(str(csv_path), "fig3", str(tmp_path / "x.png")))


def test_missing_columns_are_rejected(tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text("preset,system,mean\nfig3,tuav,4.0\n")
    with pytest.raises(RenderError):
        load_rows(str(bad))


def test_header_only_file_is_rejected(tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text(",".join(EXPECTED_COLUMNS) + "\n")
    with pytest.raises(RenderError):
        load_rows(str(bad))


def test_end_to_end_through_the_simulator_cli(tmp_path):
    """Real pipeline: experiment CSV from the simulator CLI, then render."""
    overrides = tmp_path / "ov.yaml"
    overrides.write_text("n_ues: 80\ncov: 1.0\n")
    table = tmp_path / "ratio.csv"
    run = subprocess.run(
        [sys.executable, "-m", "uavcover", "experiment", "--preset",
         "anchor_ratio", "--runs", "2", "--seed", "9", "--out", str(table),
         "--overrides", str(overrides)],
        capture_output=True, text=True, timeout=300)
    assert run.returncode == 0, run.stderr
    png = tmp_path / "ratio.png"
    run = subprocess.run(
        [sys.executable, str(PLOTS_DIR / "render.py"), "--in", str(table),
         "--preset", "anchor_ratio", "--out", str(png)],
        capture_output=True, text=True, timeout=120)
    assert run.returncode == 0, run.stderr
    assert png.exists() and png.stat().st_size > 0
