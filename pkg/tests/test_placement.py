"""Placement solvers against brute-force oracles and ordering properties."""

import math

import numpy as np
import pytest

from uavcover import (Anchor, HoverRegion, ThomasParams, Ue, grid_max_cover,
                      grid_tethered_count, is_covered, max_cover_disk,
                      max_cover_disk_constrained, optimal_altitude, place_free,
                      place_itethered, place_multi, place_tethered,
                      sample_anchors, sample_thomas)


def _random_ues(rng, n, lo=0.0, hi=3000.0):
    xy = rng.uniform(lo, hi, size=(n, 2))
    return [Ue(i, float(x), float(y)) for i, (x, y) in enumerate(xy)]


# --- max-cover disk ------------------------------------------------------------

def test_full_cover_when_points_are_tight(rng):
    pts = rng.uniform(480, 520, size=(15, 2))
    _, covered = max_cover_disk(pts, 100.0)
    assert covered == set(range(15))


def test_two_separated_clusters_takes_the_bigger(rng):
    small = rng.uniform(0, 50, size=(5, 2))
    big = rng.uniform(2000, 2050, size=(7, 2))
    _, covered = max_cover_disk(np.vstack([small, big]), 60.0)
    assert covered == set(range(5, 12))


def test_pair_candidate_catches_both_points():
    center, covered = max_cover_disk(np.array([[0.0, 0.0], [10.0, 0.0]]), 5.0)
    assert covered == {0, 1}
    assert center == pytest.approx((5.0, 0.0))


def test_disk_matches_grid_oracle(rng):
    for _ in range(10):
        pts = rng.uniform(0, 1000, size=(20, 2))
        _, covered = max_cover_disk(pts, 100.0)
        _, oracle = grid_max_cover(pts, 100.0, step=1.0)
        assert len(covered) >= oracle


def test_disk_input_validation():
    with pytest.raises(ValueError):
        max_cover_disk(np.empty((0, 2)), 10.0)
    with pytest.raises(ValueError):
        max_cover_disk(np.array([[0.0, 0.0]]), 0.0)


def test_disk_deterministic(rng):
    pts = rng.uniform(0, 500, size=(25, 2))
    assert max_cover_disk(pts, 80.0) == max_cover_disk(pts, 80.0)


# --- constrained max-cover ------------------------------------------------------

def test_constrained_pinned_center():
    pts = np.array([[0.0, 0.0], [50.0, 0.0], [500.0, 0.0]])
    center, covered = max_cover_disk_constrained(pts, 60.0, (10.0, 0.0), 0.0)
    assert center == (10.0, 0.0)
    assert covered == {0, 1}


def test_constrained_inactive_constraint(rng):
    pts = rng.uniform(400, 600, size=(20, 2))
    c_free, cov_free = max_cover_disk(pts, 50.0)
    _, cov_con = max_cover_disk_constrained(pts, 50.0, (500.0, 500.0), 400.0)
    assert len(cov_con) == len(cov_free)


def test_constrained_matches_restricted_grid_oracle(rng):
    for _ in range(10):
        pts = rng.uniform(0, 1000, size=(20, 2))
        c0 = rng.uniform(200, 800, size=2)
        rho = float(rng.uniform(0, 300))
        radius = float(rng.uniform(60, 250))
        center, covered = max_cover_disk_constrained(pts, radius, c0, rho)
        assert math.hypot(center[0] - c0[0], center[1] - c0[1]) <= rho + 1e-6
        xs = np.arange(c0[0] - rho, c0[0] + rho + 1e-9, 1.0)
        ys = np.arange(c0[1] - rho, c0[1] + rho + 1e-9, 1.0)
        gx, gy = np.meshgrid(xs, ys, indexing="ij")
        keep = (gx - c0[0]) ** 2 + (gy - c0[1]) ** 2 <= rho * rho
        nodes = np.column_stack([gx[keep], gy[keep]])
        if nodes.shape[0] == 0:
            nodes = np.asarray(c0, dtype=float)[None, :]
        d2 = ((nodes[:, 0][:, None] - pts[None, :, 0]) ** 2
              + (nodes[:, 1][:, None] - pts[None, :, 1]) ** 2)
        oracle = int((d2 <= radius * radius).sum(axis=1).max())
        assert len(covered) >= oracle


# --- hover region ----------------------------------------------------------------

def test_hover_region_geometry():
    region = HoverRegion((0.0, 0.0, 50.0), 150.0, 0.0)
    assert region.z_band == (50.0, 200.0)
    assert region.horizontal_range(50.0) == pytest.approx(150.0)
    assert region.horizontal_range(200.0) == pytest.approx(0.0)
    assert region.horizontal_range(49.0) == 0.0
    from uavcover import UavPosition
    assert region.contains(UavPosition(0.0, 0.0, 200.0))
    assert region.contains(UavPosition(150.0, 0.0, 50.0))
    assert not region.contains(UavPosition(151.0, 0.0, 50.0))
    assert not region.contains(UavPosition(0.0, 0.0, 49.0))


def test_hover_region_min_inclination():
    region = HoverRegion((0.0, 0.0, 50.0), 150.0, 45.0)
    # at 45 degrees the horizontal reach cannot exceed the height gain
    assert region.horizontal_range(100.0) == pytest.approx(50.0)
    from uavcover import UavPosition
    assert not region.contains(UavPosition(60.0, 0.0, 100.0))
    assert region.contains(UavPosition(49.0, 0.0, 100.0))


# --- single-UAV placements --------------------------------------------------------

def test_place_free_single_ue(link, params):
    plc = place_free([Ue(0, 1000.0, 1200.0)], link, params)
    assert plc.covered == {0}
    assert plc.anchor_id is None
    assert plc.pos.xy == pytest.approx((1000.0, 1200.0))


def test_place_free_dominates_random_probes(area, link, params, rng):
    ues = sample_thomas(ThomasParams(3, 200.0, 40), area, rng)
    plc = place_free(ues, link, params)
    xy = np.array([[u.x_m, u.y_m] for u in ues])
    from uavcover import UavPosition
    for _ in range(100):
        pos = UavPosition(float(rng.uniform(0, 3000)),
                          float(rng.uniform(0, 3000)),
                          float(rng.uniform(10, 2000)))
        count = int(np.sum(is_covered(pos, xy, link, params)))
        assert len(plc.covered) >= count


def test_place_tethered_cluster_at_anchor(link, params, area, rng):
    anchor = Anchor(0, 1500.0, 1500.0, 50.0)
    pts = rng.normal(1500.0, 30.0, size=(25, 2))
    ues = [Ue(i, float(x), float(y)) for i, (x, y) in enumerate(pts)]
    plc = place_tethered(ues, anchor, 150.0, 0.0, link, params)
    assert plc.covered == set(range(25))
    assert plc.anchor_id == 0


def test_place_tethered_out_of_reach(link, params):
    anchor = Anchor(0, 0.0, 0.0, 50.0)
    ues = [Ue(i, 2900.0 + i, 2900.0) for i in range(5)]
    plc = place_tethered(ues, anchor, 150.0, 0.0, link, params)
    assert plc.covered == frozenset()


def test_place_tethered_respects_hover_region(area, link, params):
    for seed in range(20):
        r = np.random.default_rng(800 + seed)
        ues = _random_ues(r, 25)
        anchor = sample_anchors(1, area, 50.0, r)[0]
        min_incl = float(r.choice([0.0, 10.0, 30.0]))
        plc = place_tethered(ues, anchor, 150.0, min_incl, link, params)
        region = HoverRegion(anchor.top, 150.0, min_incl)
        assert region.contains(plc.pos, tol_m=1e-6)
        xy = np.array([[u.x_m, u.y_m] for u in ues])
        ids = np.array([u.id for u in ues])
        mask = np.atleast_1d(is_covered(plc.pos, xy, link, params))
        assert plc.covered == frozenset(int(i) for i in ids[mask])


def test_place_tethered_beats_3d_grid_oracle(area, link, params):
    for seed in range(8):
        r = np.random.default_rng(900 + seed)
        ues = sample_thomas(ThomasParams(3, 250.0, 25), area, r)
        anchor = sample_anchors(1, area, 50.0, r)[0]
        plc = place_tethered(ues, anchor, 150.0, 0.0, link, params)
        oracle = grid_tethered_count(ues, anchor, 150.0, 0.0, link, params)
        assert len(plc.covered) >= oracle


def test_place_itethered_single_anchor_reduces(area, link, params, rng):
    ues = _random_ues(rng, 30)
    anchor = sample_anchors(1, area, 50.0, rng)[0]
    a = place_itethered(ues, [anchor], 150.0, 0.0, link, params)
    b = place_tethered(ues, anchor, 150.0, 0.0, link, params)
    assert a == b


def test_place_itethered_superset_dominance(area, link, params):
    for seed in range(20):
        r = np.random.default_rng(600 + seed)
        ues = sample_thomas(ThomasParams(4, 150.0, 60), area, r)
        anchors = sample_anchors(8, area, 50.0, r)
        small = place_itethered(ues, anchors[:3], 150.0, 0.0, link, params)
        full = place_itethered(ues, anchors, 150.0, 0.0, link, params)
        assert len(full.covered) >= len(small.covered)


def test_place_itethered_between_tethered_and_free(area, link, params):
    for seed in range(10):
        r = np.random.default_rng(1500 + seed)
        ues = sample_thomas(ThomasParams(4, 170.0, 60), area, r)
        anchors = sample_anchors(10, area, 50.0, r)
        free = place_free(ues, link, params)
        ite = place_itethered(ues, anchors, 150.0, 0.0, link, params)
        teth = place_tethered(ues, anchors[0], 150.0, 0.0, link, params)
        assert len(free.covered) >= len(ite.covered) >= len(teth.covered)


# --- multi-UAV greedy --------------------------------------------------------------

def test_place_multi_base_case(area, link, params, rng):
    ues = _random_ues(rng, 40)
    anchors = sample_anchors(5, area, 50.0, rng)
    (single,) = place_multi(ues, 1, "ituav", anchors, 150.0, 0.0, link, params)
    direct = place_itethered(ues, anchors, 150.0, 0.0, link, params)
    assert single == direct
    (free_one,) = place_multi(ues, 1, "uav", link=link, params=params)
    assert free_one == place_free(ues, link, params)


def test_place_multi_separable_clusters(link, params, rng):
    a = rng.normal(500.0, 40.0, size=(10, 2))
    b = rng.normal(2500.0, 40.0, size=(10, 2))
    ues = [Ue(i, float(x), float(y)) for i, (x, y) in enumerate(np.vstack([a, b]))]
    plcs = place_multi(ues, 2, "uav", link=link, params=params)
    assert set().union(*(p.covered for p in plcs)) == set(range(20))


def test_place_multi_monotone_and_disjoint(area, link, params):
    for seed in range(50):
        r = np.random.default_rng(7000 + seed)
        ues = sample_thomas(ThomasParams(4, 120.0, 50), area, r)
        anchors = sample_anchors(6, area, 50.0, r)
        totals = []
        for k in (1, 2, 3):
            plcs = place_multi(ues, k, "ituav", anchors, 150.0, 0.0, link,
                               params)
            sets = [p.covered for p in plcs]
            for i in range(len(sets)):
                for j in range(i + 1, len(sets)):
                    assert not (sets[i] & sets[j])
            totals.append(sum(len(s) for s in sets))
        assert totals[0] <= totals[1] <= totals[2]


def test_place_multi_anchor_pool_errors(area, link, params, rng):
    ues = _random_ues(rng, 10)
    anchors = sample_anchors(2, area, 50.0, rng)
    with pytest.raises(ValueError):
        place_multi(ues, 3, "ituav", anchors, 150.0, 0.0, link, params)
    with pytest.raises(ValueError):
        place_multi(ues, 3, "tuav", anchors, 150.0, 0.0, link, params)


def test_free_altitude_matches_channel_optimum(area, link, params, rng):
    ues = _random_ues(rng, 20)
    plc = place_free(ues, link, params)
    assert plc.pos.z_m == optimal_altitude(link, params).altitude_m
