"""Seeded Monte-Carlo harness with the standard study presets.

Each preset sweeps one variable over a set of system disciplines and reports
the mean and standard error of a coverage metric over independent
replicates. Every replicate gets a fresh user population and fresh anchor
draw from its own seed, derived by hashing the master seed with the preset,
system, sweep index and replicate index, so runs are reproducible and safe
to execute in parallel.

Presets:
  fig3         snapshot covered-user count vs. clustering level (CoV)
  fig4         covered users per minute over a timed mission, per system
  fig5         snapshot covered count of multi-UAV setups vs. clustering
  anchor_ratio snapshot covered count vs. anchor count, against the
               free-UAV-with-swapping reference
"""

from __future__ import annotations

import csv
import hashlib
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import pointprocess
from .mission import MissionParams, run_mission, summarize
from .placement import place_free, place_itethered, place_multi, place_tethered
from .scenario import Anchor, Area, ChannelParams, Ituav, LinkBudget, \
    MultiItuav, MultiTuav, Scenario, SystemKind, Tuav, UavNoSwap, UavSwap, \
    parse_system, sample_anchors

PRESET_NAMES = ("fig3", "fig4", "fig5", "anchor_ratio")

RESULT_COLUMNS = ["preset", "system", "sweep_value", "mean", "std_error",
                  "n_runs"]

_DEFAULT_N_UES = 200
_DEFAULT_ANCHOR_HEIGHT_M = 50.0


@dataclass(frozen=True)
class ExperimentConfig:
    preset: str
    n_runs: int
    master_seed: int
    sweep: tuple
    systems: tuple[str, ...]
    overrides: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.preset not in PRESET_NAMES:
            raise ValueError(f"unknown preset {self.preset!r}")
        if self.n_runs < 1:
            raise ValueError("n_runs must be >= 1")
        if not self.sweep:
            raise ValueError("sweep must be non-empty")
        if not self.systems:
            raise ValueError("systems must be non-empty")
        object.__setattr__(self, "sweep", tuple(self.sweep))
        object.__setattr__(self, "systems", tuple(self.systems))


@dataclass(frozen=True)
class ResultRow:
    preset: str
    system: str
    sweep_value: float
    mean: float
    std_error: float
    n_runs: int


@dataclass(frozen=True)
class ResultTable:
    rows: tuple[ResultRow, ...]

    def mean_of(self, system: str, sweep_value: float) -> float:
        for r in self.rows:
            if r.system == system and r.sweep_value == sweep_value:
                return r.mean
        raise KeyError((system, sweep_value))

    def row_of(self, system: str, sweep_value: float) -> ResultRow:
        for r in self.rows:
            if r.system == system and r.sweep_value == sweep_value:
                return r
        raise KeyError((system, sweep_value))


def derive_seed(master_seed: int, *parts) -> int:
    """Stable 64-bit seed from the master seed and a label/index path."""
    h = hashlib.blake2b(digest_size=8)
    h.update(int(master_seed).to_bytes(8, "little", signed=True))
    for part in parts:
        h.update(b"\x1f")
        h.update(str(part).encode("utf-8"))
    return int.from_bytes(h.digest(), "little")


def default_config(preset: str, n_runs: Optional[int] = None,
                   master_seed: int = 0,
                   overrides: Optional[dict] = None) -> ExperimentConfig:
    """The standard sweep and system set of each preset."""
    overrides = dict(overrides or {})
    if preset == "fig3":
        return ExperimentConfig(preset, n_runs or 200, master_seed,
                                sweep=tuple(float(c) for c in range(1, 7)),
                                systems=("uav_swap", "tuav", "ituav_10"),
                                overrides=overrides)
    if preset == "fig4":
        systems = ("uav_noswap_30", "uav_noswap_60", "uav_swap", "tuav") + \
            tuple(f"ituav_{k}" for k in range(3, 11))
        return ExperimentConfig(preset, n_runs or 100, master_seed,
                                sweep=(float(overrides.get("cov", 3.0)),),
                                systems=systems, overrides=overrides)
    if preset == "fig5":
        return ExperimentConfig(preset, n_runs or 200, master_seed,
                                sweep=tuple(float(c) for c in range(1, 7)),
                                systems=("tuav_x2", "tuav_x3", "ituav_1x3",
                                         "ituav_2x4"),
                                overrides=overrides)
    if preset == "anchor_ratio":
        return ExperimentConfig(preset, n_runs or 200, master_seed,
                                sweep=(3.0, 5.0, 10.0),
                                systems=("ituav", "uav_swap"),
                                overrides=overrides)
    raise ValueError(f"unknown preset {preset!r}")


def _resolve_system(preset: str, label: str, sweep_value: float) -> SystemKind:
    kind = parse_system(label)
    if preset == "anchor_ratio" and isinstance(kind, Ituav):
        kind = Ituav(tether_m=kind.tether_m, min_incl_deg=kind.min_incl_deg,
                     n_anchors=int(sweep_value))
    return kind


def _anchors_needed(kind: SystemKind) -> int:
    if isinstance(kind, Tuav):
        return 1
    if isinstance(kind, Ituav):
        return kind.n_anchors
    if isinstance(kind, MultiTuav):
        return kind.k
    if isinstance(kind, MultiItuav):
        return kind.n_anchors
    return 0


@dataclass(frozen=True)
class _TaskContext:
    """Everything a replicate needs; plain data so it pickles cleanly."""

    preset: str
    area: Area
    channel: ChannelParams
    link: LinkBudget
    thomas: pointprocess.ThomasParams
    anchor_height_m: float
    mission: MissionParams


def _snapshot_count(kind: SystemKind, scenario: Scenario) -> int:
    ues, link, params = scenario.ues, scenario.link, scenario.channel
    anchors = list(scenario.anchors)
    if isinstance(kind, (UavSwap, UavNoSwap)):
        return len(place_free(ues, link, params).covered)
    if isinstance(kind, Tuav):
        return len(place_tethered(ues, anchors[0], kind.tether_m,
                                  kind.min_incl_deg, link, params).covered)
    if isinstance(kind, Ituav):
        return len(place_itethered(ues, anchors, kind.tether_m,
                                   kind.min_incl_deg, link, params).covered)
    if isinstance(kind, MultiTuav):
        plcs = place_multi(ues, kind.k, "tuav", anchors, kind.tether_m,
                           kind.min_incl_deg, link, params)
        return sum(len(p.covered) for p in plcs)
    if isinstance(kind, MultiItuav):
        plcs = place_multi(ues, kind.k, "ituav", anchors, kind.tether_m,
                           kind.min_incl_deg, link, params)
        return sum(len(p.covered) for p in plcs)
    raise ValueError(f"unsupported system kind: {kind!r}")


def run_replicate(ctx: _TaskContext, system: str, sweep_value: float,
                  seed: int) -> float:
    """One independent draw of the preset's metric; used by the pool workers."""
    rng = np.random.default_rng(seed)
    kind = _resolve_system(ctx.preset, system, sweep_value)
    ues = pointprocess.sample_thomas(ctx.thomas, ctx.area, rng)
    n_anchors = _anchors_needed(kind)
    anchors: list[Anchor] = []
    if n_anchors > 0:
        anchors = sample_anchors(n_anchors, ctx.area, ctx.anchor_height_m, rng)
    scenario = Scenario(area=ctx.area, ues=tuple(ues), anchors=tuple(anchors),
                        channel=ctx.channel, link=ctx.link, seed=seed)
    if ctx.preset == "fig4":
        trace = run_mission(scenario, kind, ctx.mission, rng)
        return summarize(trace).avg_covered_per_min
    return float(_snapshot_count(kind, scenario))


_CALIBRATION_CACHE: dict = {}


def _calibrated(cov: float, n_ues: int, area: Area,
                master_seed: int) -> pointprocess.ThomasParams:
    key = (round(cov, 9), n_ues, area.width_m, area.height_m, master_seed)
    if key not in _CALIBRATION_CACHE:
        rng = np.random.default_rng(derive_seed(master_seed, "calibration",
                                                round(cov, 9), n_ues))
        _CALIBRATION_CACHE[key] = pointprocess.calibrate_cov(
            cov, n_ues, area, rng)
    return _CALIBRATION_CACHE[key]


def _sweep_cov(cfg: ExperimentConfig, sweep_value: float) -> float:
    if cfg.preset in ("fig3", "fig5"):
        return float(sweep_value)
    return float(cfg.overrides.get("cov", 3.0))


def _build_context(cfg: ExperimentConfig, sweep_value: float) -> _TaskContext:
    ov = cfg.overrides
    area = Area(**ov.get("area", {}))
    channel = ChannelParams(**ov.get("channel", {}))
    link = LinkBudget(**ov.get("link", {}))
    n_ues = int(ov.get("n_ues", _DEFAULT_N_UES))
    thomas = _calibrated(_sweep_cov(cfg, sweep_value), n_ues, area,
                         cfg.master_seed)
    mission = MissionParams(**ov.get("mission", {}))
    return _TaskContext(preset=cfg.preset, area=area, channel=channel,
                        link=link, thomas=thomas,
                        anchor_height_m=float(ov.get("anchor_height_m",
                                                     _DEFAULT_ANCHOR_HEIGHT_M)),
                        mission=mission)


def run_experiment(cfg: ExperimentConfig, workers: int = 1) -> ResultTable:
    """All replicates of a preset, reduced to means and standard errors.

    With workers > 1 replicates run in separate processes; results are
    reduced in task order, so the table is identical either way.
    """
    contexts = {sv: _build_context(cfg, sv) for sv in cfg.sweep}
    tasks = []
    for system in cfg.systems:
        for sweep_idx, sv in enumerate(cfg.sweep):
            for rep in range(cfg.n_runs):
                seed = derive_seed(cfg.master_seed, cfg.preset, system,
                                   sweep_idx, rep)
                tasks.append((contexts[sv], system, float(sv), seed))

    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            values = list(pool.map(_run_task, tasks,
                                   chunksize=max(1, len(tasks) // (workers * 8))))
    else:
        values = [_run_task(t) for t in tasks]

    rows = []
    idx = 0
    for system in cfg.systems:
        for sv in cfg.sweep:
            vals = np.array(values[idx:idx + cfg.n_runs])
            idx += cfg.n_runs
            se = float(np.std(vals, ddof=1) / np.sqrt(len(vals))) \
                if len(vals) > 1 else 0.0
            rows.append(ResultRow(preset=cfg.preset, system=system,
                                  sweep_value=float(sv),
                                  mean=float(np.mean(vals)), std_error=se,
                                  n_runs=cfg.n_runs))
    rows.sort(key=lambda r: (r.preset, r.system, r.sweep_value))
    return ResultTable(rows=tuple(rows))


def _run_task(task) -> float:
    ctx, system, sv, seed = task
    return run_replicate(ctx, system, sv, seed)


def write_results(table: ResultTable, path: str) -> None:
    """Write the result table as CSV in stable row order."""
    if not table.rows:
        raise ValueError("result table is empty")
    rows = sorted(table.rows, key=lambda r: (r.preset, r.system,
                                             r.sweep_value))
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(RESULT_COLUMNS)
        for r in rows:
            w.writerow([r.preset, r.system, repr(r.sweep_value),
                        repr(r.mean), repr(r.std_error), r.n_runs])


def read_results(path: str) -> ResultTable:
    rows = []
    with open(path, "r", newline="", encoding="utf-8") as fh:
        r = csv.DictReader(fh)
        if r.fieldnames != RESULT_COLUMNS:
            raise ValueError(f"unexpected result columns: {r.fieldnames}")
        for row in r:
            rows.append(ResultRow(preset=row["preset"], system=row["system"],
                                  sweep_value=float(row["sweep_value"]),
                                  mean=float(row["mean"]),
                                  std_error=float(row["std_error"]),
                                  n_runs=int(row["n_runs"])))
    return ResultTable(rows=tuple(rows))
