"""Stress functional: pair values, totals, invariances, scaling."""

from __future__ import annotations

import math

import numpy as np
import pytest

from rggcross.geometry import ProjectionPlane, Window
from rggcross.sampling import RngStream, sample_poisson_process
from rggcross.stress import StressWeight, pair_stress, stress_total
from rggcross.theory import cube_stress_integrals

PLANE3 = ProjectionPlane.default(3)


def test_pair_parallel_to_plane_is_zero():
    assert pair_stress((0, 0, 0), (1, 1, 0), PLANE3) == 0.0


def test_pair_orthogonal_to_plane_is_one():
    assert pair_stress((0, 0, 0), (0, 0, 1), PLANE3) == 1.0


def test_pair_diagonal_value():
    got = pair_stress((0, 0, 0), (1, 0, 1), PLANE3)
    assert got == pytest.approx((1.0 - 1.0 / math.sqrt(2.0)) ** 2, rel=1e-14)


def test_pair_identical_points_rejected():
    with pytest.raises(ValueError):
        pair_stress((0.5, 0.5, 0.5), (0.5, 0.5, 0.5), PLANE3)


def test_total_trivial_configurations():
    assert stress_total(np.empty((0, 3)), PLANE3) == 0.0
    assert stress_total(np.array([[0.1, 0.2, 0.3]]), PLANE3) == 0.0
    flat = np.array([[0, 0, 0.4], [1, 0, 0.4], [0.3, 0.8, 0.4]])
    assert stress_total(flat, PLANE3) == 0.0


def test_total_three_point_example():
    pts = np.array([[0, 0, 0], [0, 0, 1], [1, 0, 1]], dtype=float)
    want = 1.0 + (1.0 - 1.0 / math.sqrt(2.0)) ** 2 + 0.0
    assert stress_total(pts, PLANE3) == pytest.approx(want, rel=1e-12)


def test_total_matches_pair_sum():
    gen = RngStream(8).generator()
    pts = gen.random((40, 3))
    want = sum(pair_stress(pts[i], pts[j], PLANE3)
               for i in range(40) for j in range(i + 1, 40))
    assert stress_total(pts, PLANE3) == pytest.approx(want, rel=1e-10)


def test_values_bounded_and_d1_le_d0():
    gen = RngStream(9).generator()
    for _ in range(200):
        v1, v2 = gen.random((2, 3))
        s = pair_stress(v1, v2, PLANE3)
        assert 0.0 <= s <= 1.0


def test_permutation_invariance():
    gen = RngStream(10).generator()
    pts = gen.random((300, 3))
    perm = gen.permutation(300)
    a = stress_total(pts, PLANE3)
    b = stress_total(pts[perm], PLANE3)
    assert b == pytest.approx(a, rel=1e-12)


def test_translation_invariance_along_plane():
    gen = RngStream(11).generator()
    pts = gen.random((200, 3))
    shifted = pts + np.array([0.37, -1.25, 0.0])
    assert stress_total(shifted, PLANE3) == \
        pytest.approx(stress_total(pts, PLANE3), rel=1e-12)


def test_unit_and_custom_weights():
    v1 = (0.0, 0.0, 0.0)
    v2 = (0.0, 0.0, 2.0)
    unit = StressWeight("unit", bound=16.0)
    assert pair_stress(v1, v2, PLANE3, unit) == pytest.approx(4.0)
    custom = StressWeight("custom", bound=16.0, func=lambda d0: 1.0 / d0)
    assert pair_stress(v1, v2, PLANE3, custom) == pytest.approx(2.0)
    with pytest.raises(ValueError):
        StressWeight("custom")
    with pytest.raises(ValueError):
        StressWeight("inverse_sq", bound=0.0)


def test_tilted_plane_distances():
    s = 1.0 / math.sqrt(2.0)
    plane = ProjectionPlane(np.array([[s, s, 0.0], [0.0, 0.0, 1.0]]))
    # displacement orthogonal to the plane: (1,-1,0)/sqrt(2)
    got = pair_stress((0, 0, 0), (1.0, -1.0, 0.0), plane)
    assert got == pytest.approx(1.0, abs=1e-12)


def test_variance_scaling_matches_profile_integral():
    """Var(stress)/t^3 approaches the integral of the squared first-order
    profile; at t=500 the residual is O(1/t), inside a 10% band."""
    t = 500.0
    w = Window("cube", 3)
    reps = 600
    vals = np.empty(reps)
    for k in range(reps):
        pts = sample_poisson_process(w, t, RngStream(414, k))
        vals[k] = stress_total(pts, PLANE3)
    ref = cube_stress_integrals(3, outer_grid=16, inner_points=65_536)[1]
    got = vals.var(ddof=1) / t ** 3
    assert abs(got - ref) / ref <= 0.10
