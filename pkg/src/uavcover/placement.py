"""Coverage-maximizing placement solvers for the three UAV disciplines.

The single-disk problem (place a disk of fixed radius to cover the most
points) is solved exactly through the classic candidate-center construction:
some optimal disk has one or two points on its boundary, so it suffices to
evaluate every point and every center of a radius-circle through a pair of
points. The tether-constrained variant restricts centers to a feasible disk
and extends the candidate set accordingly. Altitude enters through the
coverage radius of the propagation model and is discretized over the
feasible band with one refinement pass. Brute-force grid oracles used by the
test suite live here as well.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .channel import UavPosition, coverage_radius, is_covered, optimal_altitude
from .scenario import Anchor, ChannelParams, LinkBudget, Ue

# Relative slack when counting boundary points, so candidate centers built
# from a point pair reliably count their defining points.
_COUNT_EPS = 1e-9

DEFAULT_ALTITUDE_LEVELS = 16
DEFAULT_REFINE_LEVELS = 8


@dataclass(frozen=True)
class HoverRegion:
    """Positions reachable while tethered to one anchor.

    Membership: within tether length of the anchor top and, for a positive
    minimum inclination, above the cone that keeps the tether clear of
    surroundings. With zero inclination this is the upper half-ball above
    anchor height.
    """

    anchor_top: tuple[float, float, float]
    tether_m: float
    min_incl_deg: float = 0.0

    def __post_init__(self):
        if self.tether_m <= 0:
            raise ValueError("tether_m must be > 0")
        if not 0 <= self.min_incl_deg < 90:
            raise ValueError("min_incl_deg must be in [0, 90)")

    @property
    def z_band(self) -> tuple[float, float]:
        z0 = self.anchor_top[2]
        return (z0, z0 + self.tether_m)

    def horizontal_range(self, z_m: float) -> float:
        """Radius of the feasible horizontal disk at altitude z, 0 if none."""
        dz = z_m - self.anchor_top[2]
        if dz < 0 or dz > self.tether_m:
            return 0.0
        rho = math.sqrt(max(self.tether_m ** 2 - dz ** 2, 0.0))
        if self.min_incl_deg > 0:
            rho = min(rho, dz / math.tan(math.radians(self.min_incl_deg)))
        return rho

    def contains(self, pos: UavPosition, tol_m: float = 1e-6) -> bool:
        ax, ay, az = self.anchor_top
        dz = pos.z_m - az
        if dz < -tol_m:
            return False
        rho = math.hypot(pos.x_m - ax, pos.y_m - ay)
        if math.hypot(rho, dz) > self.tether_m + tol_m:
            return False
        if self.min_incl_deg > 0:
            limit = max(dz, 0.0) / math.tan(math.radians(self.min_incl_deg))
            if rho > limit + tol_m:
                return False
        return True


@dataclass(frozen=True)
class Placement:
    """A chosen UAV position with the user ids it covers."""

    pos: UavPosition
    covered: frozenset[int]
    anchor_id: Optional[int] = None


def _as_points(points) -> np.ndarray:
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2 or pts.shape[0] == 0:
        raise ValueError("points must be a non-empty (n, 2) array")
    return pts


def _pair_circle_centers(pts: np.ndarray, radius: float) -> np.ndarray:
    """Centers of radius-circles through each pair closer than 2*radius."""
    n = pts.shape[0]
    if n < 2:
        return np.empty((0, 2))
    iu, ju = np.triu_indices(n, k=1)
    diff = pts[ju] - pts[iu]
    d = np.hypot(diff[:, 0], diff[:, 1])
    sel = (d > 0) & (d <= 2.0 * radius)
    if not np.any(sel):
        return np.empty((0, 2))
    diff, d = diff[sel], d[sel]
    mid = 0.5 * (pts[iu[sel]] + pts[ju[sel]])
    h = np.sqrt(np.maximum(radius * radius - 0.25 * d * d, 0.0))
    perp = np.column_stack([-diff[:, 1], diff[:, 0]]) / d[:, None]
    return np.vstack([mid + h[:, None] * perp, mid - h[:, None] * perp])


def _cover_counts(pts: np.ndarray, centers: np.ndarray, radius: float) -> np.ndarray:
    """Number of points within the (slightly inflated) radius of each center.

    Distances expand through a matrix product; the cancellation error this
    costs (< 1e-8 m^2 at km coordinates) is far below the counting slack.
    """
    r2 = (radius * (1.0 + _COUNT_EPS)) ** 2
    p_sq = (pts * pts).sum(axis=1)
    counts = np.empty(centers.shape[0], dtype=np.int64)
    chunk = max(1, (1 << 22) // max(pts.shape[0], 1))
    for s in range(0, centers.shape[0], chunk):
        blk = centers[s:s + chunk]
        d2 = ((blk * blk).sum(axis=1)[:, None] + p_sq[None, :]
              - 2.0 * (blk @ pts.T))
        counts[s:s + blk.shape[0]] = (d2 <= r2).sum(axis=1)
    return counts


def _lex_smallest(centers: np.ndarray) -> np.ndarray:
    order = np.lexsort((centers[:, 1], centers[:, 0]))
    return centers[order[0]]


def _pick_best(pts: np.ndarray, centers: np.ndarray, radius: float
               ) -> tuple[tuple[float, float], set[int]]:
    counts = _cover_counts(pts, centers, radius)
    best = counts.max()
    center = _lex_smallest(centers[counts == best])
    d2 = (pts[:, 0] - center[0]) ** 2 + (pts[:, 1] - center[1]) ** 2
    covered = set(np.nonzero(d2 <= (radius * (1.0 + _COUNT_EPS)) ** 2)[0])
    return (float(center[0]), float(center[1])), covered


def max_cover_disk(points, radius: float) -> tuple[tuple[float, float], set[int]]:
    """Disk center of the given radius covering the most points, exactly.

    Returns the center (ties broken toward the lexicographically smallest)
    and the set of covered point indices.
    """
    if radius <= 0:
        raise ValueError("radius must be > 0")
    pts = _as_points(points)
    candidates = np.vstack([pts, _pair_circle_centers(pts, radius)])
    return _pick_best(pts, candidates, radius)


def max_cover_disk_constrained(points, radius: float, center0, rho: float
                               ) -> tuple[tuple[float, float], set[int]]:
    """Best disk center restricted to the feasible disk (center0, rho).

    Candidates: the unconstrained candidates projected onto the feasible
    disk, the intersections of each point's radius-circle with the feasible
    boundary, and the feasible center itself.
    """
    if radius <= 0:
        raise ValueError("radius must be > 0")
    if rho < 0:
        raise ValueError("rho must be >= 0")
    pts = _as_points(points)
    c0 = np.asarray(center0, dtype=float)
    if rho == 0:
        return _pick_best(pts, c0[None, :], radius)
    cands = np.vstack([pts, _pair_circle_centers(pts, radius)])
    delta = cands - c0
    dist = np.hypot(delta[:, 0], delta[:, 1])
    far = dist > rho
    if np.any(far):
        cands = cands.copy()
        cands[far] = c0 + delta[far] * (rho / dist[far])[:, None]
    extra = [c0[None, :], cands]
    # Boundary crossings of each point's radius-circle with the feasible rim.
    dp = pts - c0
    d0 = np.hypot(dp[:, 0], dp[:, 1])
    sel = (d0 > 0) & (d0 >= abs(rho - radius)) & (d0 <= rho + radius)
    if np.any(sel):
        dp, d0 = dp[sel], d0[sel]
        a = (rho * rho - radius * radius + d0 * d0) / (2.0 * d0)
        h = np.sqrt(np.maximum(rho * rho - a * a, 0.0))
        u = dp / d0[:, None]
        base = c0 + a[:, None] * u
        perp = np.column_stack([-u[:, 1], u[:, 0]])
        extra.append(base + h[:, None] * perp)
        extra.append(base - h[:, None] * perp)
    return _pick_best(pts, np.vstack(extra), radius)


def _ue_points(ues: Sequence[Ue]) -> tuple[np.ndarray, np.ndarray]:
    ordered = sorted(ues, key=lambda u: u.id)
    xy = np.array([[u.x_m, u.y_m] for u in ordered], dtype=float).reshape(-1, 2)
    ids = np.array([u.id for u in ordered], dtype=np.int64)
    return xy, ids


def _covered_ids(pos: UavPosition, xy: np.ndarray, ids: np.ndarray,
                 link: LinkBudget, params: ChannelParams) -> frozenset[int]:
    if pos.z_m <= 0 or xy.shape[0] == 0:
        return frozenset()
    mask = is_covered(pos, xy, link, params)
    return frozenset(int(i) for i in ids[np.atleast_1d(mask)])


def place_free(ues: Sequence[Ue], link: LinkBudget,
               params: ChannelParams) -> Placement:
    """Unconstrained placement: best coverage-radius altitude, exact 2D center."""
    if not ues:
        raise ValueError("ues must be non-empty")
    xy, ids = _ue_points(ues)
    disk = optimal_altitude(link, params)
    if disk.radius_m <= 0:
        pos = UavPosition(float(xy[0, 0]), float(xy[0, 1]), disk.altitude_m)
        return Placement(pos, _covered_ids(pos, xy, ids, link, params), None)
    (cx, cy), _ = max_cover_disk(xy, disk.radius_m)
    pos = UavPosition(cx, cy, disk.altitude_m)
    return Placement(pos, _covered_ids(pos, xy, ids, link, params), None)


def place_tethered(ues: Sequence[Ue], anchor: Anchor, tether_m: float = 150.0,
                   min_incl_deg: float = 0.0, link: LinkBudget = None,
                   params: ChannelParams = None, *,
                   n_levels: int = DEFAULT_ALTITUDE_LEVELS,
                   refine_levels: int = DEFAULT_REFINE_LEVELS) -> Placement:
    """Best placement inside one anchor's hovering region.

    Altitudes are sampled on a uniform grid over the feasible band, the best
    level is refined once, and at each altitude the horizontal problem is the
    constrained max-cover disk.
    """
    if not ues:
        raise ValueError("ues must be non-empty")
    if link is None or params is None:
        raise ValueError("link and params are required")
    region = HoverRegion(anchor.top, tether_m, min_incl_deg)
    xy, ids = _ue_points(ues)
    c0 = np.array(anchor.xy)

    best_count = 0
    best_z = max(anchor.height_m, 0.0)
    best_center = (float(c0[0]), float(c0[1]))

    def scan(z_values):
        nonlocal best_count, best_z, best_center
        for z in z_values:
            if z <= 0:
                continue
            rho = region.horizontal_range(z)
            radius = coverage_radius(z, link, params).radius_m
            if radius <= 0:
                continue
            d2 = (xy[:, 0] - c0[0]) ** 2 + (xy[:, 1] - c0[1]) ** 2
            rel = np.nonzero(d2 <= (radius + rho) ** 2)[0]
            if rel.size <= best_count:
                continue
            center, cov = max_cover_disk_constrained(xy[rel], radius, c0, rho)
            if len(cov) > best_count:
                best_count, best_z, best_center = len(cov), float(z), center

    z_lo, z_hi = region.z_band
    coarse = np.linspace(z_lo, z_hi, n_levels)
    scan(coarse)
    if best_count > 0 and n_levels > 1 and refine_levels > 0:
        spacing = (z_hi - z_lo) / (n_levels - 1)
        scan(np.linspace(max(z_lo, best_z - spacing),
                         min(z_hi, best_z + spacing), refine_levels))

    pos = UavPosition(best_center[0], best_center[1], best_z)
    return Placement(pos, _covered_ids(pos, xy, ids, link, params), anchor.id)


def place_itethered(ues: Sequence[Ue], anchors: Sequence[Anchor],
                    tether_m: float = 150.0, min_incl_deg: float = 0.0,
                    link: LinkBudget = None, params: ChannelParams = None,
                    **kwargs) -> Placement:
    """Best anchor and placement over an anchor pool (ties to lowest id)."""
    if not ues:
        raise ValueError("ues must be non-empty")
    if not anchors:
        raise ValueError("anchors must be non-empty")
    if link is None or params is None:
        raise ValueError("link and params are required")
    xy, _ = _ue_points(ues)
    # Safe reach bound for pruning anchors that cannot beat the incumbent:
    # no altitude yields a larger radius than the unconstrained optimum.
    r_star = optimal_altitude(link, params).radius_m
    best: Optional[Placement] = None
    for anchor in sorted(anchors, key=lambda a: a.id):
        if best is not None:
            d2 = (xy[:, 0] - anchor.x_m) ** 2 + (xy[:, 1] - anchor.y_m) ** 2
            if np.count_nonzero(d2 <= (r_star + tether_m) ** 2) <= len(best.covered):
                continue
        p = place_tethered(ues, anchor, tether_m, min_incl_deg, link, params,
                           **kwargs)
        if best is None or len(p.covered) > len(best.covered):
            best = p
    return best


def place_multi(ues: Sequence[Ue], k: int, mode: str,
                anchors: Optional[Sequence[Anchor]] = None,
                tether_m: float = 150.0, min_incl_deg: float = 0.0,
                link: LinkBudget = None, params: ChannelParams = None
                ) -> list[Placement]:
    """Greedy sequential placement of k UAVs with disjoint covered sets.

    mode "uav": each UAV places freely on the users not yet covered.
    mode "tuav": UAV i is pinned to anchors[i].
    mode "ituav": each UAV claims the best remaining anchor from the pool.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    if not ues:
        raise ValueError("ues must be non-empty")
    if mode not in ("uav", "tuav", "ituav"):
        raise ValueError(f"unknown mode {mode!r}")
    if mode in ("tuav", "ituav"):
        if not anchors or len(anchors) < k:
            raise ValueError(f"mode {mode!r} needs at least k={k} anchors")
    if link is None or params is None:
        raise ValueError("link and params are required")

    remaining = sorted(ues, key=lambda u: u.id)
    pool = sorted(anchors, key=lambda a: a.id) if anchors else []
    fallback_xy = np.array([[u.x_m, u.y_m] for u in remaining]).mean(axis=0)
    placements: list[Placement] = []
    for i in range(k):
        if mode == "uav":
            if remaining:
                p = place_free(remaining, link, params)
            else:
                z = optimal_altitude(link, params).altitude_m
                p = Placement(UavPosition(float(fallback_xy[0]),
                                          float(fallback_xy[1]), z),
                              frozenset(), None)
        elif mode == "tuav":
            anchor = pool[i]
            if remaining:
                p = place_tethered(remaining, anchor, tether_m, min_incl_deg,
                                   link, params)
            else:
                p = Placement(UavPosition(*anchor.top), frozenset(), anchor.id)
        else:
            if remaining:
                p = place_itethered(remaining, pool, tether_m, min_incl_deg,
                                    link, params)
                pool = [a for a in pool if a.id != p.anchor_id]
            else:
                anchor = pool.pop(0)
                p = Placement(UavPosition(*anchor.top), frozenset(), anchor.id)
        placements.append(p)
        remaining = [u for u in remaining if u.id not in p.covered]
    return placements


# --- brute-force oracles ------------------------------------------------------

def grid_max_cover(points, radius: float, step: float = 1.0
                   ) -> tuple[tuple[float, float], int]:
    """Exhaustive grid search for the max-cover disk; test oracle.

    Centers are sampled on a step-spaced grid over the point bounding box
    inflated by the radius. Counts use the closed disk.
    """
    pts = _as_points(points)
    if radius <= 0 or step <= 0:
        raise ValueError("radius and step must be > 0")
    x0, y0 = pts.min(axis=0) - radius
    x1, y1 = pts.max(axis=0) + radius
    nx = int(math.floor((x1 - x0) / step)) + 1
    ny = int(math.floor((y1 - y0) / step)) + 1
    acc = np.zeros((nx, ny), dtype=np.int16)
    r2 = radius * radius
    for px, py in pts:
        ix0 = max(0, int(math.ceil((px - radius - x0) / step)))
        ix1 = min(nx - 1, int(math.floor((px + radius - x0) / step)))
        iy0 = max(0, int(math.ceil((py - radius - y0) / step)))
        iy1 = min(ny - 1, int(math.floor((py + radius - y0) / step)))
        if ix1 < ix0 or iy1 < iy0:
            continue
        gx = x0 + np.arange(ix0, ix1 + 1) * step
        gy = y0 + np.arange(iy0, iy1 + 1) * step
        mask = ((gx[:, None] - px) ** 2 + (gy[None, :] - py) ** 2) <= r2
        acc[ix0:ix1 + 1, iy0:iy1 + 1] += mask
    flat = int(np.argmax(acc))
    ix, iy = divmod(flat, ny)
    return (x0 + ix * step, y0 + iy * step), int(acc[ix, iy])


def grid_tethered_count(ues: Sequence[Ue], anchor: Anchor, tether_m: float,
                        min_incl_deg: float, link: LinkBudget,
                        params: ChannelParams, step: float = 5.0) -> int:
    """Best covered count over a 3D grid of the hovering region; test oracle.

    Every grid node is checked directly against the propagation model, so
    this is independent of the coverage-radius and candidate-center
    machinery.
    """
    region = HoverRegion(anchor.top, tether_m, min_incl_deg)
    xy, _ = _ue_points(ues)
    z_lo, z_hi = region.z_band
    best = 0
    for z in np.arange(z_lo, z_hi + 1e-9, step):
        if z <= 0:
            continue
        rho = region.horizontal_range(z)
        offs = np.arange(-rho, rho + 1e-9, step) if rho > 0 else np.array([0.0])
        ox, oy = np.meshgrid(offs, offs, indexing="ij")
        keep = ox ** 2 + oy ** 2 <= rho * rho + 1e-9
        nodes = np.column_stack([anchor.x_m + ox[keep], anchor.y_m + oy[keep]])
        if nodes.shape[0] == 0:
            nodes = np.array([[anchor.x_m, anchor.y_m]])
        dx = nodes[:, 0][:, None] - xy[None, :, 0]
        dy = nodes[:, 1][:, None] - xy[None, :, 1]
        r_h = np.hypot(dx, dy)
        d = np.hypot(r_h, z)
        theta = np.degrees(np.arctan2(z, r_h))
        p = 1.0 / (1.0 + params.a * np.exp(-params.b * (theta - params.a)))
        pl = (20.0 * np.log10(4.0 * np.pi * params.fc_hz * d / 299792458.0)
              + p * params.eta_los_db + (1.0 - p) * params.eta_nlos_db)
        count = int((pl <= link.threshold_db).sum(axis=1).max())
        best = max(best, count)
    return best
