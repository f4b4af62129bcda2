"""Air-to-ground propagation and the coverage geometry it induces.

The mean path loss combines free-space loss with an elevation-dependent mix
of the line-of-sight and non-line-of-sight excess losses:

    PL(d, theta) = FSPL(d) + P_los(theta) * eta_los + (1 - P_los(theta)) * eta_nlos
    FSPL(d)      = 20 log10(4 pi fc d / c)
    P_los(theta) = 1 / (1 + a exp(-b (theta - a)))

with d the 3D distance and theta the elevation angle in degrees. Coverage is
binary: a user is covered when the mean path loss stays within the link
budget. No fading or interference is modeled.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .scenario import ChannelParams, LinkBudget

SPEED_OF_LIGHT_M_S = 299792458.0

# Altitude search bracket: below 10 m is not a flying base station, above
# 5 km is outside small-UAV envelopes.
DEFAULT_Z_MIN_M = 10.0
DEFAULT_Z_MAX_M = 5000.0


@dataclass(frozen=True)
class UavPosition:
    """A UAV's 3D position; z is altitude above ground.

    z = 0 is permitted so parked or grounded states can be represented;
    channel evaluations require z > 0.
    """

    x_m: float
    y_m: float
    z_m: float

    def __post_init__(self):
        if self.z_m < 0:
            raise ValueError("z_m must be >= 0")

    @property
    def xy(self) -> tuple[float, float]:
        return (self.x_m, self.y_m)


@dataclass(frozen=True)
class CoverageDisk:
    """Horizontal disk within which the mean path loss meets the budget."""

    altitude_m: float
    radius_m: float


def prob_los(elevation_deg, params: ChannelParams):
    """Line-of-sight probability at the given elevation angle (degrees).

    Accepts scalars or arrays; strictly increasing in the angle, valid on
    (0, 90].
    """
    theta = np.asarray(elevation_deg, dtype=float)
    if np.any(theta <= 0) or np.any(theta > 90):
        raise ValueError("elevation_deg must be in (0, 90]")
    p = 1.0 / (1.0 + params.a * np.exp(-params.b * (theta - params.a)))
    return float(p) if np.isscalar(elevation_deg) else p


def free_space_path_loss_db(distance_m, fc_hz: float):
    """Free-space loss 20 log10(4 pi fc d / c) in dB; d must be > 0."""
    d = np.asarray(distance_m, dtype=float)
    if np.any(d <= 0):
        raise ValueError("distance_m must be > 0")
    fspl = 20.0 * np.log10(4.0 * np.pi * fc_hz * d / SPEED_OF_LIGHT_M_S)
    return float(fspl) if np.isscalar(distance_m) else fspl


def mean_path_loss(uav: UavPosition, ue_xy, params: ChannelParams):
    """Mean path loss in dB from a UAV to one or many ground positions.

    ue_xy is a length-2 sequence or an (n, 2) array; returns a scalar or an
    (n,) array accordingly.
    """
    if uav.z_m <= 0:
        raise ValueError("uav altitude must be > 0")
    xy = np.asarray(ue_xy, dtype=float)
    single = xy.ndim == 1
    xy = np.atleast_2d(xy)
    dx = xy[:, 0] - uav.x_m
    dy = xy[:, 1] - uav.y_m
    r = np.hypot(dx, dy)
    d = np.hypot(r, uav.z_m)
    theta = np.degrees(np.arctan2(uav.z_m, r))  # r = 0 gives 90 degrees
    p = 1.0 / (1.0 + params.a * np.exp(-params.b * (theta - params.a)))
    excess = p * params.eta_los_db + (1.0 - p) * params.eta_nlos_db
    pl = 20.0 * np.log10(4.0 * np.pi * params.fc_hz * d / SPEED_OF_LIGHT_M_S) + excess
    return float(pl[0]) if single else pl


def is_covered(uav: UavPosition, ue_xy, link: LinkBudget, params: ChannelParams):
    """True where the mean path loss is within the link budget (closed disk)."""
    pl = mean_path_loss(uav, ue_xy, params)
    covered = np.asarray(pl) <= link.threshold_db
    return bool(covered) if np.isscalar(pl) else covered


def _pl_at(z: float, r: float, params: ChannelParams) -> float:
    return mean_path_loss(UavPosition(0.0, 0.0, z), (r, 0.0), params)


@lru_cache(maxsize=16384)
def coverage_radius(altitude_m: float, link: LinkBudget,
                    params: ChannelParams) -> CoverageDisk:
    """Largest horizontal distance still covered from the given altitude.

    Bisection on the (monotone) path loss in horizontal distance; the
    returned radius is a certified-covered lower bound, accurate to 0.01 m.
    Returns radius 0 when even the overhead position misses the budget.
    """
    if altitude_m <= 0:
        raise ValueError("altitude_m must be > 0")
    th = link.threshold_db
    if _pl_at(altitude_m, 0.0, params) > th:
        return CoverageDisk(altitude_m, 0.0)
    # Upper bound from the pure line-of-sight budget: beyond d_up even the
    # most optimistic excess loss fails.
    k = 20.0 * math.log10(4.0 * math.pi * params.fc_hz / SPEED_OF_LIGHT_M_S)
    d_up = 10.0 ** ((th - params.eta_los_db - k) / 20.0)
    hi = math.sqrt(max(d_up * d_up - altitude_m * altitude_m, 0.0)) + 1.0
    while _pl_at(altitude_m, hi, params) <= th:  # guard, normally never loops
        hi *= 2.0
        if hi > 1e9:
            raise RuntimeError("coverage radius bracket failed to close")
    lo = 0.0
    while hi - lo > 0.01:
        mid = 0.5 * (lo + hi)
        if _pl_at(altitude_m, mid, params) <= th:
            lo = mid
        else:
            hi = mid
    return CoverageDisk(float(altitude_m), float(lo))


_SCAN_POINTS = 64


@lru_cache(maxsize=256)
def optimal_altitude(link: LinkBudget, params: ChannelParams,
                     z_min_m: float = DEFAULT_Z_MIN_M,
                     z_max_m: float = DEFAULT_Z_MAX_M) -> CoverageDisk:
    """Altitude in [z_min, z_max] maximizing the coverage radius.

    A log-spaced coarse scan brackets the peak (the curve is unimodal where
    positive but flat zero beyond the budget-limited ceiling), then
    golden-section search refines to 1 m.
    """
    invphi = (math.sqrt(5.0) - 1.0) / 2.0

    def radius(z: float) -> float:
        return coverage_radius(z, link, params).radius_m

    grid = np.geomspace(z_min_m, z_max_m, _SCAN_POINTS)
    values = [radius(z) for z in grid]
    k = int(np.argmax(values))
    a = grid[max(0, k - 1)]
    b = grid[min(len(grid) - 1, k + 1)]

    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = radius(c), radius(d)
    while b - a > 1.0:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = radius(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = radius(d)
    best_z = c if fc >= fd else d
    best = max([float(z_min_m), float(best_z), float(z_max_m)], key=radius)
    return coverage_radius(best, link, params)
