"""Discrete-time simulation of a timed service mission.

Each system discipline runs the same fixed-step loop with its own state
machine: free UAVs travel to their optimum and drain battery (with or
without replacement of depleted airframes), tethered UAVs serve continuously
on anchor power, and intermittently tethered UAVs migrate between anchors
when a periodic re-optimization finds a clearly better one. A UAV covers
nobody while traveling, attaching, detaching, or grounded.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Sequence

import numpy as np

from .channel import UavPosition, is_covered
from .placement import place_free, place_itethered, place_multi, place_tethered
from .scenario import Anchor, Area, Ituav, MultiItuav, MultiTuav, Scenario, \
    SystemKind, Tuav, UavNoSwap, UavSwap, Ue

_BATTERY_TOL_MIN = 1e-9


class Activity(Enum):
    SERVING = "serving"
    TRAVELING = "traveling"
    ATTACHING = "attaching"
    DETACHING = "detaching"
    GROUNDED = "grounded"


@dataclass(frozen=True)
class MobilityParams:
    """Rigid cluster drift: cluster centers random-walk, members follow."""

    drift_speed_mps: float = 1.0

    def __post_init__(self):
        if self.drift_speed_mps < 0:
            raise ValueError("drift_speed_mps must be >= 0")


@dataclass(frozen=True)
class MissionParams:
    duration_min: float = 100.0
    dt_s: float = 10.0
    uav_speed_mps: float = 15.0
    attach_delay_s: float = 30.0
    detach_delay_s: float = 10.0
    battery_capacity_min: float = 30.0
    recharge_rate: float = 2.0  # flight-minutes gained per tethered minute
    reattach_gain_threshold: float = 0.10
    reeval_interval_s: float = 60.0
    mobility: Optional[MobilityParams] = None

    def __post_init__(self):
        if self.duration_min <= 0:
            raise ValueError("duration_min must be > 0")
        if self.dt_s <= 0:
            raise ValueError("dt_s must be > 0")
        if self.uav_speed_mps < 0 or self.attach_delay_s < 0 \
                or self.detach_delay_s < 0:
            raise ValueError("speeds and delays must be >= 0")
        if self.battery_capacity_min <= 0:
            raise ValueError("battery_capacity_min must be > 0")
        if self.recharge_rate < 0:
            raise ValueError("recharge_rate must be >= 0")
        if not 0 <= self.reattach_gain_threshold < 1:
            raise ValueError("reattach_gain_threshold must be in [0, 1)")
        if self.reeval_interval_s <= 0:
            raise ValueError("reeval_interval_s must be > 0")


@dataclass(frozen=True)
class UavState:
    x_m: float
    y_m: float
    z_m: float
    battery_min: float
    activity: Activity
    attached_anchor: Optional[int]


@dataclass(frozen=True)
class TraceStep:
    t_s: float
    states: tuple[UavState, ...]
    covered_by_uav: tuple[int, ...]
    covered_count: int


@dataclass(frozen=True)
class Summary:
    avg_covered_per_min: float
    service_uptime_fraction: float


@dataclass(frozen=True)
class MissionTrace:
    steps: tuple[TraceStep, ...]
    dt_s: float

    @property
    def duration_s(self) -> float:
        return len(self.steps) * self.dt_s


def summarize(trace: MissionTrace) -> Summary:
    """Time-weighted mean covered count and fraction of steps with service."""
    if not trace.steps:
        raise ValueError("trace is empty")
    counts = np.array([s.covered_count for s in trace.steps], dtype=float)
    avg = float(counts.sum() * trace.dt_s / trace.duration_s)
    uptime = float(np.mean(counts > 0))
    return Summary(avg_covered_per_min=avg, service_uptime_fraction=uptime)


def step_mobility(ues: Sequence[Ue], mobility: MobilityParams, dt_s: float,
                  area: Area, rng: np.random.Generator) -> list[Ue]:
    """Advance user positions by one step of rigid cluster drift.

    Every cluster gets one displacement of drift_speed * dt in a uniformly
    random direction; unclustered users walk individually. Positions are
    folded back into the area by reflection.
    """
    step_len = mobility.drift_speed_mps * dt_s
    if step_len == 0:
        return list(ues)
    clusters = sorted({u.cluster_id for u in ues if u.cluster_id is not None})
    singles = sorted(u.id for u in ues if u.cluster_id is None)
    moves = {}
    for key in [("c", c) for c in clusters] + [("u", i) for i in singles]:
        ang = rng.uniform(0.0, 2.0 * math.pi)
        moves[key] = (step_len * math.cos(ang), step_len * math.sin(ang))

    def fold(v: float, hi: float) -> float:
        period = 2.0 * hi
        v = v % period
        return v if v <= hi else period - v

    out = []
    for u in ues:
        key = ("c", u.cluster_id) if u.cluster_id is not None else ("u", u.id)
        dx, dy = moves[key]
        out.append(Ue(id=u.id, x_m=fold(u.x_m + dx, area.width_m),
                      y_m=fold(u.y_m + dy, area.height_m),
                      cluster_id=u.cluster_id))
    return out


class _UavSim:
    """One UAV's mutable mission state.

    Phases: serve, travel, attach, detach, grounded, plus the transient
    serve_pending/travel_pending markers resolved at the next step boundary.
    """

    def __init__(self, pos: tuple[float, float, float], capacity_min: float,
                 mp: MissionParams, tethered_kind: bool, swap: bool,
                 unlimited_power: bool):
        self.x, self.y, self.z = pos
        self.capacity = capacity_min
        self.battery = capacity_min
        self.mp = mp
        self.tethered_kind = tethered_kind
        self.swap = swap
        self.unlimited_power = unlimited_power
        self.phase = "serve"
        self.anchor_id: Optional[int] = None
        self.serve_pos: Optional[UavPosition] = None
        self.covered: frozenset[int] = frozenset()
        self.timer_s = 0.0
        self.travel_from = pos
        self.travel_to = pos
        self.travel_total_s = 0.0
        self.travel_done_s = 0.0
        self.pending_anchor: Optional[Anchor] = None
        self.replan_on_serve = False

    def start_travel(self, target: tuple[float, float, float]):
        dist = math.dist((self.x, self.y, self.z), target)
        self.travel_from = (self.x, self.y, self.z)
        self.travel_to = target
        speed = self.mp.uav_speed_mps
        self.travel_total_s = dist / speed if speed > 0 else math.inf
        self.travel_done_s = 0.0
        self.anchor_id = None
        if dist == 0:
            self._arrive()
        else:
            self.phase = "travel"

    def _arrive(self):
        self.x, self.y, self.z = self.travel_to
        if self.tethered_kind:
            self.phase = "attach"
            self.timer_s = self.mp.attach_delay_s
            self.anchor_id = self.pending_anchor.id \
                if self.pending_anchor is not None else self.anchor_id
            if self.timer_s <= 0:
                self.phase = "serve_pending"
        else:
            self.enter_service()

    def begin_attach(self, anchor_id: int):
        self.phase = "attach"
        self.anchor_id = anchor_id
        self.timer_s = self.mp.attach_delay_s
        if self.timer_s <= 0:
            self.phase = "serve_pending"

    def begin_detach(self, target_anchor: Anchor):
        self.phase = "detach"
        self.anchor_id = None
        self.pending_anchor = target_anchor
        self.replan_on_serve = True
        self.timer_s = self.mp.detach_delay_s
        if self.timer_s <= 0:
            self.phase = "travel_pending"

    def enter_service(self):
        self.phase = "serve"
        if self.serve_pos is not None:
            self.x, self.y, self.z = (self.serve_pos.x_m, self.serve_pos.y_m,
                                      self.serve_pos.z_m)

    def ground(self):
        self.phase = "grounded"
        self.z = 0.0
        self.anchor_id = None
        self.battery = 0.0

    @property
    def draining(self) -> bool:
        if self.unlimited_power or self.phase == "grounded":
            return False
        if self.phase in ("travel", "detach"):
            return True
        return self.phase == "serve" and not self.tethered_kind

    @property
    def recharging(self) -> bool:
        # Power flows whenever the tether is connected: serving or attaching.
        return (not self.unlimited_power and self.tethered_kind
                and self.phase in ("serve", "attach"))

    def activity(self) -> Activity:
        return {"serve": Activity.SERVING, "travel": Activity.TRAVELING,
                "attach": Activity.ATTACHING, "detach": Activity.DETACHING,
                "grounded": Activity.GROUNDED}[self.phase]

    def state(self) -> UavState:
        anchor = self.anchor_id if self.phase in ("serve", "attach") else None
        return UavState(self.x, self.y, self.z, self.battery,
                        self.activity(), anchor)

    def check_battery(self):
        """Depletion handling at step start; swap systems never ground."""
        if self.battery > _BATTERY_TOL_MIN or not self.draining:
            return
        if self.swap:
            self.battery = self.capacity
        else:
            self.ground()

    def advance(self, dt_s: float):
        """Move battery, position and timers through one step."""
        if self.phase == "grounded":
            return
        if self.draining:
            self.battery = max(0.0, self.battery - dt_s / 60.0)
        elif self.recharging:
            self.battery = min(self.capacity,
                               self.battery + self.mp.recharge_rate * dt_s / 60.0)
        if self.phase == "travel":
            self.travel_done_s += dt_s
            frac = min(1.0, self.travel_done_s / self.travel_total_s)
            fx, fy, fz = self.travel_from
            tx, ty, tz = self.travel_to
            self.x = fx + frac * (tx - fx)
            self.y = fy + frac * (ty - fy)
            self.z = fz + frac * (tz - fz)
            if frac >= 1.0:
                self._arrive()
        elif self.phase in ("attach", "detach"):
            self.timer_s -= dt_s
            if self.timer_s <= 1e-9:
                self.phase = "serve_pending" if self.phase == "attach" \
                    else "travel_pending"


def _covered_now(uav: _UavSim, xy: np.ndarray, ids: np.ndarray, link, params
                 ) -> frozenset[int]:
    if uav.serve_pos is None or uav.serve_pos.z_m <= 0 or xy.shape[0] == 0:
        return frozenset()
    mask = np.atleast_1d(is_covered(uav.serve_pos, xy, link, params))
    return frozenset(int(i) for i in ids[mask])


def _nearest_anchor(anchors: Sequence[Anchor], point) -> Anchor:
    return min(anchors,
               key=lambda a: (math.hypot(a.x_m - point[0], a.y_m - point[1]),
                              a.id))


def run_mission(scenario: Scenario, system: SystemKind, mp: MissionParams,
                rng: np.random.Generator) -> MissionTrace:
    """Simulate one mission; deterministic given (scenario, system, mp, seed)."""
    ues = list(scenario.ues)
    if not ues:
        raise ValueError("scenario has no UEs")
    link, params, area = scenario.link, scenario.channel, scenario.area
    anchors_all = sorted(scenario.anchors, key=lambda a: a.id)
    anchor_by_id = {a.id: a for a in anchors_all}
    center = (area.center[0], area.center[1], 0.0)

    def pool_of(n: int) -> list[Anchor]:
        if len(anchors_all) < n:
            raise ValueError(f"system needs {n} anchors, scenario has "
                             f"{len(anchors_all)}")
        return anchors_all[:n]

    tether_m = getattr(system, "tether_m", 150.0)
    min_incl = getattr(system, "min_incl_deg", 0.0)
    uavs: list[_UavSim] = []
    ituav_pool: list[Anchor] = []

    if isinstance(system, (UavNoSwap, UavSwap)):
        cap = system.battery_min if isinstance(system, UavNoSwap) \
            else mp.battery_capacity_min
        plc = place_free(ues, link, params)
        u = _UavSim(center, cap, mp, tethered_kind=False,
                    swap=isinstance(system, UavSwap), unlimited_power=False)
        u.serve_pos, u.covered = plc.pos, plc.covered
        u.start_travel((plc.pos.x_m, plc.pos.y_m, plc.pos.z_m))
        uavs.append(u)
    elif isinstance(system, Tuav):
        anchor = pool_of(1)[0]
        plc = place_tethered(ues, anchor, system.tether_m,
                             system.min_incl_deg, link, params)
        u = _UavSim((plc.pos.x_m, plc.pos.y_m, plc.pos.z_m),
                    mp.battery_capacity_min, mp, tethered_kind=True,
                    swap=False, unlimited_power=True)
        u.serve_pos, u.covered, u.anchor_id = plc.pos, plc.covered, anchor.id
        u.phase = "serve"
        uavs.append(u)
    elif isinstance(system, Ituav):
        ituav_pool = pool_of(system.n_anchors)
        start = _nearest_anchor(ituav_pool, area.center)
        plc = place_itethered(ues, ituav_pool, system.tether_m,
                              system.min_incl_deg, link, params)
        u = _UavSim(start.top, mp.battery_capacity_min, mp,
                    tethered_kind=True, swap=False, unlimited_power=False)
        u.serve_pos, u.covered = plc.pos, plc.covered
        if plc.anchor_id == start.id:
            u.begin_attach(start.id)
        else:
            u.pending_anchor = anchor_by_id[plc.anchor_id]
            u.start_travel(u.pending_anchor.top)
        uavs.append(u)
    elif isinstance(system, (MultiTuav, MultiItuav)):
        if isinstance(system, MultiTuav):
            pool = pool_of(system.k)
            placements = place_multi(ues, system.k, "tuav", pool,
                                     system.tether_m, system.min_incl_deg,
                                     link, params)
        else:
            ituav_pool = pool_of(system.n_anchors)
            pool = ituav_pool
            placements = place_multi(ues, system.k, "ituav", pool,
                                     system.tether_m, system.min_incl_deg,
                                     link, params)
        for plc in placements:
            anchor = anchor_by_id[plc.anchor_id]
            u = _UavSim(anchor.top, mp.battery_capacity_min, mp,
                        tethered_kind=True, swap=False,
                        unlimited_power=isinstance(system, MultiTuav))
            u.serve_pos, u.covered = plc.pos, plc.covered
            if isinstance(system, MultiTuav):
                u.phase = "serve"
                u.anchor_id = anchor.id
                u.x, u.y, u.z = plc.pos.x_m, plc.pos.y_m, plc.pos.z_m
            else:
                u.begin_attach(anchor.id)
            uavs.append(u)
    else:
        raise ValueError(f"unsupported system kind: {system!r}")

    n_steps = max(1, int(round(mp.duration_min * 60.0 / mp.dt_s)))
    reeval_every = max(1, int(round(mp.reeval_interval_s / mp.dt_s)))
    mobile = mp.mobility is not None and mp.mobility.drift_speed_mps > 0
    steps: list[TraceStep] = []

    def ue_arrays():
        pts = np.array([[u.x_m, u.y_m] for u in ues]).reshape(-1, 2)
        return pts, np.array([u.id for u in ues], dtype=np.int64)

    xy, ids = ue_arrays()

    for i in range(n_steps):
        t = i * mp.dt_s
        if mobile and i > 0:
            ues = step_mobility(ues, mp.mobility, mp.dt_s, area, rng)
            xy, ids = ue_arrays()

        # Resolve transient phases queued by the previous step's advance().
        for u in uavs:
            if u.phase == "travel_pending":
                u.start_travel(u.pending_anchor.top)
            if u.phase == "serve_pending":
                if u.replan_on_serve and u.pending_anchor is not None:
                    plc = place_tethered(ues, u.pending_anchor, tether_m,
                                         min_incl, link, params)
                    u.serve_pos, u.covered = plc.pos, plc.covered
                u.pending_anchor = None
                u.replan_on_serve = False
                u.enter_service()

        # Re-optimization only ever changes anything when users move.
        if ituav_pool and mobile and i > 0 and i % reeval_every == 0:
            _reevaluate(uavs, ues, ituav_pool, tether_m, min_incl, link,
                        params, mp, xy, ids)

        for u in uavs:
            u.check_battery()

        states = tuple(u.state() for u in uavs)
        seen: set[int] = set()
        per_uav = []
        for u in uavs:
            if u.phase == "serve":
                cov = _covered_now(u, xy, ids, link, params) if mobile \
                    else u.covered
                own = set(cov) - seen
                seen |= own
                per_uav.append(len(own))
            else:
                per_uav.append(0)
        steps.append(TraceStep(t_s=t, states=states,
                               covered_by_uav=tuple(per_uav),
                               covered_count=len(seen)))

        for u in uavs:
            u.advance(mp.dt_s)

    return MissionTrace(steps=tuple(steps), dt_s=mp.dt_s)


def _reevaluate(uavs, ues, pool, tether_m, min_incl, link, params,
                mp: MissionParams, xy, ids):
    """Hysteresis rule: migrate only to a clearly better different anchor."""
    anchor_by_id = {a.id: a for a in pool}
    if len(uavs) == 1:
        u = uavs[0]
        if u.phase != "serve":
            return
        here = place_tethered(ues, anchor_by_id[u.anchor_id], tether_m,
                              min_incl, link, params)
        u.serve_pos, u.covered = here.pos, here.covered
        u.enter_service()
        best = place_itethered(ues, pool, tether_m, min_incl, link, params)
        if best.anchor_id != u.anchor_id and \
                len(best.covered) > (1.0 + mp.reattach_gain_threshold) \
                * len(here.covered):
            u.begin_detach(anchor_by_id[best.anchor_id])
        return
    # Multi-UAV: recompute the greedy joint assignment, then apply the same
    # rule per UAV; an anchor held or targeted by another UAV is off limits.
    placements = place_multi(ues, len(uavs), "ituav", pool, tether_m,
                             min_incl, link, params)
    taken = {u.anchor_id for u in uavs if u.anchor_id is not None}
    taken |= {u.pending_anchor.id for u in uavs
              if u.pending_anchor is not None}
    for u, newp in zip(uavs, placements):
        if u.phase != "serve" or newp.anchor_id is None:
            continue
        if newp.anchor_id == u.anchor_id or newp.anchor_id in taken:
            continue
        baseline = len(_covered_now(u, xy, ids, link, params))
        if len(newp.covered) > (1.0 + mp.reattach_gain_threshold) * baseline:
            taken.discard(u.anchor_id)
            taken.add(newp.anchor_id)
            u.begin_detach(anchor_by_id[newp.anchor_id])


# --- trace serialization -------------------------------------------------------

TRACE_COLUMNS = ["t_s", "uav_idx", "x_m", "y_m", "z_m", "battery_min",
                 "activity", "anchor_id", "covered_count"]


def write_trace(trace: MissionTrace, path: str) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(TRACE_COLUMNS)
        for step in trace.steps:
            for idx, (st, cov) in enumerate(zip(step.states,
                                                step.covered_by_uav)):
                w.writerow([repr(step.t_s), idx, repr(st.x_m), repr(st.y_m),
                            repr(st.z_m), repr(st.battery_min),
                            st.activity.value,
                            "" if st.attached_anchor is None
                            else st.attached_anchor, cov])


def read_trace(path: str) -> MissionTrace:
    by_t: dict[float, list] = {}
    with open(path, "r", newline="", encoding="utf-8") as fh:
        r = csv.DictReader(fh)
        if r.fieldnames != TRACE_COLUMNS:
            raise ValueError(f"unexpected trace columns: {r.fieldnames}")
        for row in r:
            t = float(row["t_s"])
            state = UavState(
                x_m=float(row["x_m"]), y_m=float(row["y_m"]),
                z_m=float(row["z_m"]), battery_min=float(row["battery_min"]),
                activity=Activity(row["activity"]),
                attached_anchor=None if row["anchor_id"] == ""
                else int(row["anchor_id"]))
            by_t.setdefault(t, []).append((int(row["uav_idx"]), state,
                                           int(row["covered_count"])))
    if not by_t:
        raise ValueError("trace file has no rows")
    times = sorted(by_t)
    if len(times) < 2:
        raise ValueError("trace too short to recover the step size")
    dt = times[1] - times[0]
    steps = []
    for t in times:
        rows = sorted(by_t[t], key=lambda r: r[0])
        steps.append(TraceStep(
            t_s=t,
            states=tuple(st for _, st, _ in rows),
            covered_by_uav=tuple(c for _, _, c in rows),
            covered_count=sum(c for _, _, c in rows)))
    return MissionTrace(steps=tuple(steps), dt_s=dt)
