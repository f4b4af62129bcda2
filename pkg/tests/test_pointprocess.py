"""Cluster process sampling and the cell-area clustering metric."""

import numpy as np
import pytest
from scipy.spatial.distance import cdist

from uavcover import (ThomasParams, Ue, calibrate_cov, estimate_cov,
                      sample_thomas)


def test_zero_sigma_single_parent_collapses(area, rng):
    ues = sample_thomas(ThomasParams(1, 0.0, 50), area, rng)
    xs = {u.x_m for u in ues}
    ys = {u.y_m for u in ues}
    assert len(xs) == 1 and len(ys) == 1
    assert all(u.cluster_id == 0 for u in ues)


def test_exact_count_and_inside_area(area):
    for seed in range(50):
        r = np.random.default_rng(seed)
        n = int(r.integers(1, 300))
        params = ThomasParams(max(1, n // 20), float(r.uniform(0, 500)), n)
        ues = sample_thomas(params, area, r)
        assert len(ues) == n
        assert all(area.contains(u.x_m, u.y_m) for u in ues)
        assert sorted(u.id for u in ues) == list(range(n))


def test_huge_sigma_scores_like_uniform(area):
    vals = []
    for seed in range(20):
        r = np.random.default_rng(1000 + seed)
        ues = sample_thomas(ThomasParams(4, 3000.0, 200), area, r)
        vals.append(estimate_cov(ues, area).value)
    assert abs(np.mean(vals) - 1.0) <= 0.1


def test_members_stay_near_their_parent(area, rng):
    sigma = 50.0
    ues = sample_thomas(ThomasParams(4, sigma, 200), area, rng)
    within = 0
    for cid in range(4):
        members = np.array([[u.x_m, u.y_m] for u in ues if u.cluster_id == cid])
        if len(members) == 0:
            continue
        centroid = members.mean(axis=0)
        d = np.hypot(*(members - centroid).T)
        within += int((d <= 3 * sigma).sum())
    assert within >= 0.95 * len(ues)


def test_symmetric_quadrants_have_zero_raw_cov(area):
    ues = [Ue(0, 750.0, 750.0), Ue(1, 2250.0, 750.0),
           Ue(2, 750.0, 2250.0), Ue(3, 2250.0, 2250.0)]
    est = estimate_cov(ues, area)
    assert est.raw_std_over_mean == pytest.approx(0.0, abs=1e-12)
    assert est.n_points == 4


def test_uniform_sample_scores_one(area):
    vals = []
    for seed in range(20):
        r = np.random.default_rng(7700 + seed)
        xy = r.uniform(0, 3000, size=(500, 2))
        ues = [Ue(i, float(x), float(y)) for i, (x, y) in enumerate(xy)]
        vals.append(estimate_cov(ues, area).value)
    assert abs(np.mean(vals) - 1.0) <= 0.1


def test_outlier_owns_a_huge_cell(area, rng):
    # 49 users in a tight knot, one far away; checked against a direct
    # nearest-neighbor assignment built independently of the estimator.
    knot = rng.normal(500.0, 10.0, size=(49, 2)).clip(0, 3000)
    pts = np.vstack([knot, [[2800.0, 2800.0]]])
    ues = [Ue(i, float(x), float(y)) for i, (x, y) in enumerate(pts)]
    est = estimate_cov(ues, area)
    assert est.value > 1.0

    res = 10.0
    centers_1d = (np.arange(300) + 0.5) * res
    gx, gy = np.meshgrid(centers_1d, centers_1d, indexing="ij")
    cells = np.column_stack([gx.ravel(), gy.ravel()])
    owner = np.argmin(cdist(cells, pts), axis=1)
    areas = np.bincount(owner, minlength=len(pts)) * res * res
    raw = areas.std() / areas.mean()
    assert est.raw_std_over_mean == pytest.approx(raw, rel=1e-9)


def test_relabeling_ids_does_not_change_estimate(area, rng):
    pts = rng.uniform(0, 3000, size=(60, 2))
    ues = [Ue(i, float(x), float(y)) for i, (x, y) in enumerate(pts)]
    perm = rng.permutation(60)
    relabeled = [Ue(int(perm[i]), u.x_m, u.y_m) for i, u in enumerate(ues)]
    a = estimate_cov(ues, area)
    b = estimate_cov(relabeled, area)
    assert a.value == pytest.approx(b.value, rel=1e-9)


def test_raw_cov_decreases_with_sigma(area):
    sigmas = [30.0, 100.0, 300.0, 1000.0]
    means = []
    for sigma in sigmas:
        vals = []
        for seed in range(50):
            r = np.random.default_rng(3000 + seed)
            ues = sample_thomas(ThomasParams(4, sigma, 150), area, r)
            vals.append(estimate_cov(ues, area).raw_std_over_mean)
        means.append(np.mean(vals))
    assert all(means[i] > means[i + 1] for i in range(len(means) - 1))


def test_grid_convergence(area):
    for seed in range(3):
        r = np.random.default_rng(4000 + seed)
        ues = sample_thomas(ThomasParams(4, 200.0, 150), area, r)
        c10 = estimate_cov(ues, area, resolution_m=10.0).value
        c5 = estimate_cov(ues, area, resolution_m=5.0).value
        assert abs(c10 - c5) / c5 < 0.05


def test_estimate_preconditions(area):
    with pytest.raises(ValueError):
        estimate_cov([Ue(0, 1.0, 1.0)], area)
    with pytest.raises(ValueError):
        estimate_cov([Ue(0, 1.0, 1.0), Ue(1, 2.0, 2.0)], area,
                     resolution_m=0.0)


def test_calibrate_rejects_subuniform_targets(area, rng):
    with pytest.raises(ValueError):
        calibrate_cov(0.5, 200, area, rng)


def test_calibrate_uniform_target(area):
    rng = np.random.default_rng(99)
    params = calibrate_cov(1.0, 200, area, rng, n_draws=24)
    r2 = np.random.default_rng(55)
    vals = [estimate_cov(sample_thomas(params, area, r2), area).value
            for _ in range(20)]
    assert abs(np.mean(vals) - 1.0) <= 0.1


def test_calibrate_clustered_target_closed_loop(area):
    rng = np.random.default_rng(99)
    params = calibrate_cov(3.0, 200, area, rng)
    r2 = np.random.default_rng(55)
    vals = [estimate_cov(sample_thomas(params, area, r2), area).value
            for _ in range(30)]
    assert np.mean(vals) == pytest.approx(3.0, abs=0.3)
