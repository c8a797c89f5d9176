"""Geometric substrate tests: seeded streams, enclosing balls against an
exact subset-enumeration oracle, sampler laws, and cap-measure identities."""

import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from covercert.geom_core import (
    Ball,
    PointSet,
    RngStream,
    SphericalCap,
    as_points,
    ball_volume_log,
    cap_measure_bounds,
    cap_measure_exact,
    diameter,
    jung_radius,
    min_enclosing_ball,
    regular_simplex,
    sample_uniform_ball,
    sample_uniform_sphere,
    uniform_ball_points,
)


# ---------------------------------------------------------------------------
# RngStream


def test_rng_stream_reproducible():
    a = RngStream(123, 4).generator().random(16)
    b = RngStream(123, 4).generator().random(16)
    assert np.array_equal(a, b)


def test_rng_stream_distinct_streams_differ():
    a = RngStream(123, 0).generator().random(16)
    b = RngStream(123, 1).generator().random(16)
    c = RngStream(124, 0).generator().random(16)
    assert not np.array_equal(a, b)
    assert not np.array_equal(a, c)


def test_rng_stream_child_injective_small_grid():
    seen = {}
    for sid in range(8):
        for idx in range(64):
            key = RngStream(7, sid).child(idx).stream_id
            assert key not in seen, f"collision: {seen[key]} vs {(sid, idx)}"
            seen[key] = (sid, idx)


def test_rng_stream_validation():
    with pytest.raises(ValueError):
        RngStream(-1, 0)
    with pytest.raises(ValueError):
        RngStream(0, 0).child(-1)


# ---------------------------------------------------------------------------
# radii, diameters, simplices


def test_jung_radius_known_values():
    assert jung_radius(1) == pytest.approx(0.5, abs=1e-15)
    assert jung_radius(2) == pytest.approx(math.sqrt(1.0 / 3.0), abs=1e-15)
    assert jung_radius(3) == pytest.approx(math.sqrt(0.375), abs=1e-15)


def test_jung_radius_monotone_below_limit():
    vals = [jung_radius(n) for n in range(1, 200)]
    assert all(a < b for a, b in zip(vals, vals[1:]))
    assert all(v < 1.0 / math.sqrt(2.0) for v in vals)


def test_jung_radius_rejects_bad_dimension():
    with pytest.raises(ValueError):
        jung_radius(0)
    with pytest.raises(ValueError):
        jung_radius(2.5)


def _brute_diameter(pts: np.ndarray) -> float:
    best = 0.0
    for i in range(len(pts)):
        for j in range(i + 1, len(pts)):
            best = max(best, float(np.linalg.norm(pts[i] - pts[j])))
    return best


def test_diameter_matches_brute_force():
    gen = np.random.default_rng(5)
    for m, n in [(2, 1), (7, 2), (23, 3), (40, 5)]:
        pts = gen.normal(size=(m, n))
        ps = PointSet(n, pts)
        assert diameter(ps) == pytest.approx(_brute_diameter(pts), abs=1e-12)


def test_diameter_degenerate():
    assert diameter(PointSet(3, np.zeros((1, 3)))) == 0.0
    with pytest.raises(ValueError):
        diameter(PointSet(2, np.empty((0, 2))))


def test_regular_simplex_unit_edges_and_circumradius():
    for n in range(1, 11):
        ps = regular_simplex(n)
        pts = ps.points
        assert pts.shape == (n + 1, n)
        for i, j in itertools.combinations(range(n + 1), 2):
            assert np.linalg.norm(pts[i] - pts[j]) == pytest.approx(1.0, abs=1e-12)
        assert np.linalg.norm(pts.mean(axis=0)) < 1e-12
        radii = np.linalg.norm(pts, axis=1)
        assert radii.max() == pytest.approx(jung_radius(n), abs=1e-12)


# ---------------------------------------------------------------------------
# minimum enclosing ball


def _circumball_of_support(pts: np.ndarray):
    """Ball through all of pts with center in their affine hull; None when
    the points are affinely dependent."""
    q0 = pts[0]
    basis = pts[1:] - q0
    if len(basis) == 0:
        return q0.copy(), 0.0
    gram = basis @ basis.T
    rhs = 0.5 * np.einsum("ij,ij->i", basis, basis)
    try:
        coef = np.linalg.solve(gram, rhs)
    except np.linalg.LinAlgError:
        return None
    center = q0 + coef @ basis
    return center, float(np.linalg.norm(pts[0] - center))


def _brute_meb(pts: np.ndarray) -> float:
    """Exact optimal radius: the smallest circumball of some support subset
    of size <= n + 1 that encloses everything."""
    m, n = pts.shape
    best = math.inf
    for size in range(1, min(m, n + 1) + 1):
        for subset in itertools.combinations(range(m), size):
            out = _circumball_of_support(pts[list(subset)])
            if out is None:
                continue
            center, radius = out
            if radius < best and np.all(
                np.linalg.norm(pts - center, axis=1) <= radius + 1e-9
            ):
                best = radius
    return best


def test_meb_matches_subset_enumeration_oracle():
    gen = np.random.default_rng(11)
    for m, n in [(4, 2), (6, 2), (8, 3), (7, 4)]:
        for _ in range(6):
            pts = gen.normal(size=(m, n))
            ball = min_enclosing_ball(PointSet(n, pts), tol=1e-10)
            assert ball.radius == pytest.approx(_brute_meb(pts), abs=1e-7)


def test_meb_exact_small_configurations():
    # two points: midpoint ball
    ball = min_enclosing_ball(PointSet(2, np.array([[0.0, 0.0], [2.0, 0.0]])),
                              tol=1e-10)
    assert ball.radius == pytest.approx(1.0, abs=1e-9)
    assert np.allclose(ball.center, [1.0, 0.0], atol=1e-9)
    # equilateral triangle, side 1: circumradius 1/sqrt(3)
    tri = np.array([[0.0, 0.0], [1.0, 0.0], [0.5, math.sqrt(3.0) / 2.0]])
    ball = min_enclosing_ball(PointSet(2, tri), tol=1e-10)
    assert ball.radius == pytest.approx(1.0 / math.sqrt(3.0), abs=1e-9)
    # obtuse triangle: the longest edge's midpoint ball already encloses
    obtuse = np.array([[0.0, 0.0], [4.0, 0.0], [1.0, 0.5]])
    ball = min_enclosing_ball(PointSet(2, obtuse), tol=1e-10)
    assert ball.radius == pytest.approx(2.0, abs=1e-9)
    assert np.allclose(ball.center, [2.0, 0.0], atol=1e-8)


def test_meb_simplex_certified_tight():
    for n in range(1, 11):
        ball = min_enclosing_ball(regular_simplex(n), tol=1e-8)
        assert abs(ball.radius - jung_radius(n)) <= 1e-7


def test_meb_containment_is_exact():
    gen = np.random.default_rng(3)
    pts = gen.normal(size=(50, 4))
    ball = min_enclosing_ball(PointSet(4, pts), tol=1e-6)
    # the returned radius is the exact max distance, so no slack is needed
    assert np.all(ball.contains_points(pts, tol=0.0))


def test_meb_certifies_without_cap_warning():
    import warnings

    gen = np.random.default_rng(17)
    with warnings.catch_warnings():
        warnings.simplefilter("error", RuntimeWarning)
        for _ in range(50):
            pts = gen.normal(size=(16, 6))
            min_enclosing_ball(PointSet(6, pts), tol=1e-8)


def test_meb_isometry_invariance():
    gen = np.random.default_rng(9)
    pts = gen.normal(size=(12, 3))
    base = min_enclosing_ball(PointSet(3, pts), tol=1e-10)
    q, _ = np.linalg.qr(gen.normal(size=(3, 3)))
    shift = gen.normal(size=3)
    moved = min_enclosing_ball(PointSet(3, pts @ q.T + shift), tol=1e-10)
    assert moved.radius == pytest.approx(base.radius, abs=1e-9)
    assert np.allclose(moved.center, base.center @ q.T + shift, atol=1e-7)


def test_meb_degenerate_inputs():
    assert min_enclosing_ball(PointSet(2, np.array([[3.0, 4.0]]))).radius == 0.0
    dup = min_enclosing_ball(PointSet(2, np.tile([1.0, 2.0], (5, 1))))
    assert dup.radius <= 1e-12
    with pytest.raises(ValueError):
        min_enclosing_ball(PointSet(2, np.empty((0, 2))))
    with pytest.raises(ValueError):
        min_enclosing_ball(PointSet(1, np.array([[0.0], [1.0]])), tol=0.0)


# ---------------------------------------------------------------------------
# samplers


def test_sphere_sampler_unit_norms_and_determinism():
    ps = sample_uniform_sphere(5, RngStream(42, 0), 500)
    norms = np.linalg.norm(ps.points, axis=1)
    assert np.max(np.abs(norms - 1.0)) < 1e-12
    again = sample_uniform_sphere(5, RngStream(42, 0), 500)
    assert np.array_equal(ps.points, again.points)
    single = sample_uniform_sphere(5, RngStream(42, 0))
    assert single.shape == (5,)
    assert np.array_equal(single, ps.points[0])


def test_sphere_sampler_archimedes_law():
    # on S^2 the first coordinate is uniform on [-1, 1]
    ps = sample_uniform_sphere(3, RngStream(7, 0), 40000)
    x = ps.points[:, 0]
    assert abs(x.mean()) < 4.0 / math.sqrt(3.0 * 40000)  # sd of U[-1,1] is 1/sqrt 3
    frac = np.count_nonzero(x <= 0.5) / 40000
    assert abs(frac - 0.75) < 4.0 * math.sqrt(0.75 * 0.25 / 40000)


def test_ball_sampler_radial_law():
    n, total = 3, 40000
    ps = sample_uniform_ball(n, 2.0, total, RngStream(8, 0))
    norms = np.linalg.norm(ps.points, axis=1)
    assert norms.max() <= 2.0 + 1e-12
    # P(|x| <= t R) = t^n
    for t in (0.5, 0.8):
        expected = t**n
        frac = np.count_nonzero(norms <= t * 2.0) / total
        sigma = math.sqrt(expected * (1.0 - expected) / total)
        assert abs(frac - expected) < 4.0 * sigma


def test_ball_sampler_edge_cases():
    assert uniform_ball_points(np.random.default_rng(0), 3, 1.0, 0).shape == (0, 3)
    with pytest.raises(ValueError):
        sample_uniform_ball(3, 0.0, 5, RngStream(0, 0))
    with pytest.raises(ValueError):
        sample_uniform_ball(3, 1.0, -1, RngStream(0, 0))


# ---------------------------------------------------------------------------
# volumes and caps


def test_ball_volume_log_known_values():
    assert math.exp(ball_volume_log(1)) == pytest.approx(2.0, rel=1e-12)
    assert math.exp(ball_volume_log(2)) == pytest.approx(math.pi, rel=1e-12)
    assert math.exp(ball_volume_log(3)) == pytest.approx(4.0 * math.pi / 3.0, rel=1e-12)
    # radius scaling is an exact additive n log r in log space
    assert ball_volume_log(4, 2.0) == pytest.approx(
        ball_volume_log(4) + 4.0 * math.log(2.0), abs=1e-12
    )
    with pytest.raises(ValueError):
        ball_volume_log(3, 0.0)


def test_cap_measure_closed_forms():
    for alpha in (0.2, 0.7, 1.2, 1.5):
        assert cap_measure_exact(2, alpha) == pytest.approx(alpha / math.pi, abs=1e-12)
        assert cap_measure_exact(3, alpha) == pytest.approx(
            (1.0 - math.cos(alpha)) / 2.0, abs=1e-12
        )
    # the regularized beta is steep as alpha -> pi/2; allow for that
    near = math.pi / 2.0 - 1e-6
    assert cap_measure_exact(2, near) == pytest.approx(near / math.pi, abs=1e-9)
    assert cap_measure_exact(7, math.pi / 2.0) == pytest.approx(0.5, abs=1e-14)


def test_cap_measure_domain():
    with pytest.raises(ValueError):
        cap_measure_exact(1, 0.5)
    with pytest.raises(ValueError):
        cap_measure_exact(3, 0.0)
    with pytest.raises(ValueError):
        cap_measure_exact(3, math.pi)


@settings(max_examples=80, deadline=None)
@given(st.integers(min_value=2, max_value=200),
       st.floats(min_value=0.01, max_value=math.pi - 0.01))
def test_cap_measure_symmetry_property(n, alpha):
    total = cap_measure_exact(n, alpha) + cap_measure_exact(n, math.pi - alpha)
    assert abs(total - 1.0) <= 1e-12


@settings(max_examples=80, deadline=None)
@given(st.integers(min_value=2, max_value=120),
       st.floats(min_value=0.05, max_value=math.pi / 2.0 - 0.05))
def test_cap_sandwich_property(n, alpha):
    lo, hi = cap_measure_bounds(n, alpha)
    m = cap_measure_exact(n, alpha)
    assert lo < m < hi


def test_cap_bounds_domain():
    with pytest.raises(ValueError):
        cap_measure_bounds(3, math.pi / 2.0)
    with pytest.raises(ValueError):
        cap_measure_bounds(1, 0.3)


# ---------------------------------------------------------------------------
# small containers


def test_ball_contains_points_and_json():
    ball = Ball([1.0, 0.0], 2.0)
    hits = ball.contains_points(np.array([[1.0, 1.9], [1.0, 2.1], [3.0, 0.0]]))
    assert hits.tolist() == [True, False, True]
    back = Ball.from_json_dict(ball.to_json_dict())
    assert back.radius == ball.radius and np.array_equal(back.center, ball.center)
    with pytest.raises(ValueError):
        Ball([0.0, 0.0], -1.0)


def test_point_set_json_round_trip():
    ps = PointSet(3, np.arange(12.0).reshape(4, 3))
    back = PointSet.from_json_dict(ps.to_json_dict())
    assert back.dim == 3
    assert np.array_equal(back.points, ps.points)


def test_spherical_cap_validation_and_membership():
    cap = SphericalCap(np.array([1.0, 0.0]), 0.5)
    dirs = np.array([[1.0, 0.0],
                     [math.cos(0.49), math.sin(0.49)],
                     [math.cos(0.51), math.sin(0.51)]])
    assert cap.contains_directions(dirs).tolist() == [True, True, False]
    with pytest.raises(ValueError):
        SphericalCap(np.array([1.0, 1.0]), 0.5)
    with pytest.raises(ValueError):
        SphericalCap(np.array([1.0, 0.0]), 0.0)


def test_as_points_validation():
    assert as_points([1.0, 2.0]).shape == (1, 2)
    with pytest.raises(ValueError):
        as_points(np.ones((2, 3)), dim=2)
    with pytest.raises(ValueError):
        as_points(np.array([[np.inf, 0.0]]))
