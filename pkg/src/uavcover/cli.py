"""Command-line entry points: generate, channel, place, mission, experiment."""

from __future__ import annotations

import argparse
import csv
import sys
from typing import Optional

import numpy as np
import yaml

from . import experiments, pointprocess
from .channel import coverage_radius, optimal_altitude
from .mission import MissionParams, MobilityParams, run_mission, summarize, \
    write_trace
from .placement import place_free, place_itethered, place_multi, place_tethered
from .scenario import Area, Ituav, MultiItuav, MultiTuav, Scenario, Tuav, \
    UavNoSwap, UavSwap, load_scenario, parse_system, scenario_from_dict


def _load_or_default_scenario(args) -> Scenario:
    if args.scenario:
        return load_scenario(args.scenario, seed=args.seed)
    doc = {"seed": args.seed if args.seed is not None else 0}
    return scenario_from_dict(doc)


def cmd_generate(args) -> int:
    area = Area()
    rng = np.random.default_rng(args.seed)
    if args.cov == 1.0:
        from .scenario import sample_uniform_ues
        ues = sample_uniform_ues(args.n, area, rng)
    else:
        params = pointprocess.calibrate_cov(args.cov, args.n, area, rng)
        ues = pointprocess.sample_thomas(params, area, rng)
    with open(args.out, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["ue_id", "x_m", "y_m", "cluster_id"])
        for u in ues:
            w.writerow([u.id, repr(u.x_m), repr(u.y_m),
                        "" if u.cluster_id is None else u.cluster_id])
    est = pointprocess.estimate_cov(ues, area)
    print(f"wrote {len(ues)} UEs to {args.out} (estimated CoV {est.value:.3f})")
    return 0


def cmd_channel(args) -> int:
    sc = _load_or_default_scenario(args)
    w = csv.writer(sys.stdout)
    w.writerow(["altitude_m", "radius_m"])
    if args.altitude is not None:
        disk = coverage_radius(args.altitude, sc.link, sc.channel)
        w.writerow([repr(disk.altitude_m), repr(disk.radius_m)])
    best = optimal_altitude(sc.link, sc.channel)
    w.writerow([repr(best.altitude_m), repr(best.radius_m)])
    return 0


def cmd_place(args) -> int:
    sc = _load_or_default_scenario(args)
    kind = parse_system(args.system) if args.system else sc.system
    if kind is None:
        kind = UavSwap()
    anchors = sorted(sc.anchors, key=lambda a: a.id)
    if not anchors and not isinstance(kind, (UavSwap, UavNoSwap)):
        raise SystemExit("error: the scenario has no anchors, but "
                         f"{args.system!r} needs at least one")
    if isinstance(kind, (UavSwap, UavNoSwap)):
        placements = [place_free(sc.ues, sc.link, sc.channel)]
    elif isinstance(kind, Tuav):
        placements = [place_tethered(sc.ues, anchors[0], kind.tether_m,
                                     kind.min_incl_deg, sc.link, sc.channel)]
    elif isinstance(kind, Ituav):
        placements = [place_itethered(sc.ues, anchors[:kind.n_anchors],
                                      kind.tether_m, kind.min_incl_deg,
                                      sc.link, sc.channel)]
    elif isinstance(kind, MultiTuav):
        placements = place_multi(sc.ues, kind.k, "tuav", anchors[:kind.k],
                                 kind.tether_m, kind.min_incl_deg,
                                 sc.link, sc.channel)
    elif isinstance(kind, MultiItuav):
        placements = place_multi(sc.ues, kind.k, "ituav",
                                 anchors[:kind.n_anchors], kind.tether_m,
                                 kind.min_incl_deg, sc.link, sc.channel)
    else:
        raise ValueError(f"unsupported system {args.system!r}")

    out = open(args.out, "w", newline="", encoding="utf-8") if args.out \
        else sys.stdout
    try:
        w = csv.writer(out)
        w.writerow(["system", "uav_idx", "x_m", "y_m", "z_m", "anchor_id",
                    "covered_count"])
        for i, p in enumerate(placements):
            w.writerow([args.system or "uav", i, repr(p.pos.x_m),
                        repr(p.pos.y_m), repr(p.pos.z_m),
                        "" if p.anchor_id is None else p.anchor_id,
                        len(p.covered)])
    finally:
        if out is not sys.stdout:
            out.close()
    return 0


def cmd_mission(args) -> int:
    sc = _load_or_default_scenario(args)
    if args.battery_min is not None and args.system in ("uav", "uav_noswap"):
        kind = UavNoSwap(battery_min=args.battery_min)
    else:
        kind = parse_system(args.system)
    if args.anchors is not None and isinstance(kind, Ituav):
        kind = Ituav(tether_m=kind.tether_m, min_incl_deg=kind.min_incl_deg,
                     n_anchors=args.anchors)
    mp_kwargs = {"duration_min": args.duration_min}
    if args.battery_min is not None:
        mp_kwargs["battery_capacity_min"] = args.battery_min
    if args.drift_speed is not None and args.drift_speed > 0:
        mp_kwargs["mobility"] = MobilityParams(drift_speed_mps=args.drift_speed)
    mp = MissionParams(**mp_kwargs)
    rng = np.random.default_rng(sc.seed & 0xFFFFFFFFFFFFFFFF)
    trace = run_mission(sc, kind, mp, rng)
    if args.trace:
        write_trace(trace, args.trace)
    s = summarize(trace)
    print(f"avg covered per min: {s.avg_covered_per_min:.3f}, "
          f"uptime: {s.service_uptime_fraction:.3f}")
    return 0


def cmd_experiment(args) -> int:
    overrides = {}
    if args.overrides:
        with open(args.overrides, "r", encoding="utf-8") as fh:
            loaded = yaml.safe_load(fh) or {}
        if not isinstance(loaded, dict):
            raise ValueError("overrides file must be a mapping")
        overrides = loaded
    if "mission" in overrides and overrides["mission"].get("mobility"):
        overrides["mission"]["mobility"] = \
            MobilityParams(**overrides["mission"]["mobility"])
    cfg = experiments.default_config(args.preset, n_runs=args.runs,
                                     master_seed=args.seed or 0,
                                     overrides=overrides)
    table = experiments.run_experiment(cfg, workers=args.workers)
    experiments.write_results(table, args.out)
    print(f"wrote {len(table.rows)} rows to {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="uavcover",
                                description="UAV base-station coverage "
                                            "simulator and optimizer")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="sample a clustered UE population")
    g.add_argument("--cov", type=float, required=True,
                   help="target clustering level (1 = uniform)")
    g.add_argument("--n", type=int, default=200)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", required=True)
    g.set_defaults(func=cmd_generate)

    c = sub.add_parser("channel", help="coverage radius and optimal altitude")
    c.add_argument("--altitude", type=float, default=None)
    c.add_argument("--scenario", default=None)
    c.add_argument("--seed", type=int, default=None)
    c.set_defaults(func=cmd_channel)

    pl = sub.add_parser("place", help="solve a static placement")
    pl.add_argument("--system", default=None,
                    help="uav | tuav | ituav[_n] | tuav_xK | ituav_KxN")
    pl.add_argument("--scenario", default=None)
    pl.add_argument("--seed", type=int, default=None)
    pl.add_argument("--out", default=None)
    pl.set_defaults(func=cmd_place)

    m = sub.add_parser("mission", help="run a timed mission")
    m.add_argument("--system", required=True)
    m.add_argument("--battery-min", type=float, default=None)
    m.add_argument("--anchors", type=int, default=None)
    m.add_argument("--duration-min", type=float, default=100.0)
    m.add_argument("--drift-speed", type=float, default=None,
                   help="enable cluster mobility at this speed (m/s)")
    m.add_argument("--scenario", default=None)
    m.add_argument("--seed", type=int, default=None)
    m.add_argument("--trace", default=None, help="write the step trace CSV")
    m.set_defaults(func=cmd_mission)

    e = sub.add_parser("experiment", help="run a Monte-Carlo preset")
    e.add_argument("--preset", required=True, choices=experiments.PRESET_NAMES)
    e.add_argument("--runs", type=int, default=None)
    e.add_argument("--seed", type=int, default=0)
    e.add_argument("--out", required=True)
    e.add_argument("--overrides", default=None,
                   help="YAML file with scenario/mission overrides")
    e.add_argument("--workers", type=int, default=1)
    e.set_defaults(func=cmd_experiment)
    return p


def main(argv: Optional[list[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
