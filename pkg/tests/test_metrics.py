import math

import numpy as np
import pytest

from cadhist.metrics import (
    LN2,
    EdgeParams,
    chamfer_distance,
    classify_edge_points,
    coverage,
    edge_chamfer_distance,
    invalidity_ratio,
    jensen_shannon_divergence,
    minimum_matching_distance,
    nearest_indices,
    nearest_indices_bruteforce,
    normal_consistency,
)
from cadhist.sampling import PointCloud


def _oracle_chamfer(a, b):
    """Straight per-point scan, written independently of the library."""

    def one_way(src, dst):
        total = 0.0
        for p in src:
            d2 = np.linalg.norm(dst - p, axis=1) ** 2
            total += float(d2.min())
        return total / len(src)

    return one_way(a, b) + one_way(b, a)


def _random_cloud(rng, n, spread=1.0):
    points = rng.uniform(-spread, spread, size=(n, 3))
    normals = rng.normal(size=(n, 3))
    normals /= np.linalg.norm(normals, axis=1, keepdims=True)
    return PointCloud(points, normals)


def test_two_point_chamfer_is_two():
    a = np.array([[0.0, 0.0, 0.0]])
    b = np.array([[1.0, 0.0, 0.0]])
    assert chamfer_distance(a, b) == 2.0


def test_chamfer_hand_case():
    a = np.array([[0.0, 0.0, 0.0], [1.0, 0.0, 0.0]])
    b = np.array([[0.0, 0.0, 0.0]])
    # a->b: (0 + 1)/2, b->a: 0
    assert chamfer_distance(a, b) == 0.5


def test_chamfer_identity_is_exact_zero():
    rng = np.random.default_rng(0)
    pts = rng.uniform(-1, 1, size=(300, 3))
    assert chamfer_distance(pts, pts) == 0.0


def test_chamfer_is_symmetric():
    rng = np.random.default_rng(1)
    a = rng.uniform(-1, 1, size=(40, 3))
    b = rng.uniform(-1, 1, size=(55, 3))
    assert chamfer_distance(a, b) == chamfer_distance(b, a)


def test_chamfer_rejects_empty():
    with pytest.raises(ValueError):
        chamfer_distance(np.empty((0, 3)), np.array([[0.0, 0.0, 0.0]]))


def test_tree_indices_match_bruteforce():
    rng = np.random.default_rng(2)
    a = rng.uniform(-1, 1, size=(400, 3))
    b = rng.uniform(-1, 1, size=(350, 3))
    assert np.array_equal(nearest_indices(a, b), nearest_indices_bruteforce(a, b))


def test_chamfer_matches_oracle_on_random_pairs():
    rng = np.random.default_rng(3)
    for _ in range(5):
        a = rng.uniform(-2, 2, size=(rng.integers(20, 200), 3))
        b = rng.uniform(-2, 2, size=(rng.integers(20, 200), 3))
        assert abs(chamfer_distance(a, b) - _oracle_chamfer(a, b)) <= 1e-12


def test_normal_consistency_identity_is_one():
    cloud = _random_cloud(np.random.default_rng(4), 200)
    assert normal_consistency(cloud, cloud) == 1.0


def test_normal_consistency_opposed_is_minus_one():
    cloud = _random_cloud(np.random.default_rng(5), 100)
    flipped = PointCloud(cloud.points, -cloud.normals)
    assert normal_consistency(cloud, flipped) == -1.0


def test_normal_consistency_perpendicular_is_zero():
    points = np.random.default_rng(6).uniform(-1, 1, size=(50, 3))
    a = PointCloud(points, np.tile([0.0, 0.0, 1.0], (50, 1)))
    b = PointCloud(points, np.tile([1.0, 0.0, 0.0], (50, 1)))
    assert normal_consistency(a, b) == 0.0


def _two_plane_cloud(count=1600, band=0.02, seed=7):
    """Points on two perpendicular half-planes meeting along the x axis."""
    rng = np.random.default_rng(seed)
    half = count // 2
    xs_a = rng.uniform(-0.5, 0.5, half)
    ys_a = rng.uniform(0.0, band, half)
    plane_a = np.column_stack([xs_a, ys_a, np.zeros(half)])
    normals_a = np.tile([0.0, 0.0, 1.0], (half, 1))
    xs_b = rng.uniform(-0.5, 0.5, half)
    zs_b = rng.uniform(0.0, band, half)
    plane_b = np.column_stack([xs_b, np.zeros(half), zs_b])
    normals_b = np.tile([0.0, 1.0, 0.0], (half, 1))
    return PointCloud(
        np.vstack([plane_a, plane_b]), np.vstack([normals_a, normals_b])
    )


def _oracle_edge_indices(cloud, params):
    hits = set()
    n = len(cloud.points)
    for i in range(n):
        for j in range(i + 1, n):
            if np.linalg.norm(cloud.points[i] - cloud.points[j]) <= params.radius:
                dot = abs(float(np.dot(cloud.normals[i], cloud.normals[j])))
                if dot < params.normal_dot_threshold:
                    hits.add(i)
                    hits.add(j)
    return np.array(sorted(hits), dtype=np.int64)


def test_edge_classification_matches_pairwise_oracle():
    cloud = _two_plane_cloud(count=800)
    params = EdgeParams()
    got = classify_edge_points(cloud, params)
    assert np.array_equal(got, _oracle_edge_indices(cloud, params))
    assert len(got) > 0


def test_edge_points_hug_the_crease():
    cloud = _two_plane_cloud()
    idx = classify_edge_points(cloud)
    crease_distance = np.sqrt(
        cloud.points[idx][:, 1] ** 2 + cloud.points[idx][:, 2] ** 2
    )
    assert np.all(crease_distance <= 2 * EdgeParams().radius)


def test_flat_cloud_has_no_edges():
    rng = np.random.default_rng(8)
    points = np.column_stack(
        [rng.uniform(-0.5, 0.5, 300), rng.uniform(-0.5, 0.5, 300), np.zeros(300)]
    )
    cloud = PointCloud(points, np.tile([0.0, 0.0, 1.0], (300, 1)))
    assert len(classify_edge_points(cloud)) == 0


def test_edge_chamfer_none_without_edges():
    rng = np.random.default_rng(9)
    points = np.column_stack(
        [rng.uniform(-0.5, 0.5, 200), rng.uniform(-0.5, 0.5, 200), np.zeros(200)]
    )
    flat = PointCloud(points, np.tile([0.0, 0.0, 1.0], (200, 1)))
    creased = _two_plane_cloud()
    assert edge_chamfer_distance(flat, flat) is None
    assert edge_chamfer_distance(flat, creased) is None
    assert edge_chamfer_distance(creased, creased) == 0.0


def test_coverage_hand_matrix():
    matrix = np.array([[0.1, 0.2], [0.3, 0.4]])
    # both generated shapes sit closest to reference 0
    assert coverage(matrix) == 50.0
    assert coverage(np.array([[0.1, 0.4], [0.3, 0.2]])) == 100.0


def test_mmd_hand_matrix():
    matrix = np.array([[0.1, 0.2], [0.3, 0.4]])
    assert minimum_matching_distance(matrix) == pytest.approx(200.0)


def test_jsd_identical_sets_is_zero():
    rng = np.random.default_rng(10)
    sets = [rng.uniform(-0.5, 0.5, size=(500, 3)) for _ in range(3)]
    assert jensen_shannon_divergence(sets, [s.copy() for s in sets]) == 0.0


def test_jsd_disjoint_supports_saturates():
    left = [np.tile([-0.4, 0.0, 0.0], (100, 1))]
    right = [np.tile([0.4, 0.0, 0.0], (100, 1))]
    assert jensen_shannon_divergence(left, right) == pytest.approx(
        100.0 * LN2, abs=1e-9
    )


def test_jsd_half_overlap_hand_case():
    # With two occupied cells: p = (1, 0), q = (1/2, 1/2).
    a = np.tile([-0.25, -0.25, -0.25], (10, 1))
    b = np.tile([0.25, 0.25, 0.25], (5, 1))
    expected = 0.5 * math.log(4.0 / 3.0) + 0.5 * (
        0.5 * math.log(2.0 / 3.0) + 0.5 * math.log(2.0)
    )
    got = jensen_shannon_divergence([a], [np.vstack([a[:5], b])], resolution=2)
    assert got == pytest.approx(expected * 100.0, abs=1e-12)


def test_jsd_clamps_stray_points_to_boundary_cells():
    inside = [np.tile([0.499, 0.0, 0.0], (50, 1))]
    outside = [np.tile([0.500000001, 0.0, 0.0], (50, 1))]
    assert jensen_shannon_divergence(inside, outside) == 0.0


def test_invalidity_ratio_values():
    assert invalidity_ratio(2, 10) == 20.0
    assert invalidity_ratio(0, 7) == 0.0
    assert invalidity_ratio(7, 7) == 100.0
    with pytest.raises(ValueError):
        invalidity_ratio(1, 0)
    with pytest.raises(ValueError):
        invalidity_ratio(5, 4)
