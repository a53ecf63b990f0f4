from __future__ import annotations

import math

import pytest

from groundbox.geometry import TWO_PI, Box2D
from groundbox.iou import (
    ConvexPolygon2D,
    bev_iou,
    clip_convex,
    clipped_iou_3d,
    iou_2d,
    iou_3d,
    monte_carlo_iou_3d,
    rotated_rect_iou,
)

from helpers import box3d_from_metric, random_overlapping_pair

# Unit square vs itself rotated 45 degrees about the shared center:
# the intersection is a regular octagon of area 2*(sqrt(2)-1).
OCTAGON_AREA = 2.0 * (math.sqrt(2.0) - 1.0)
OCTAGON_IOU = OCTAGON_AREA / (2.0 - OCTAGON_AREA)


def square(cx=0.0, cy=0.0, side=1.0, angle=0.0) -> ConvexPolygon2D:
    h = side / 2.0
    ca, sa = math.cos(angle), math.sin(angle)
    pts = [(h, h), (-h, h), (-h, -h), (h, -h)]
    return ConvexPolygon2D(tuple((cx + ca * u - sa * v, cy + sa * u + ca * v) for u, v in pts))


class TestIou2D:
    def test_identical(self):
        b = Box2D(3.0, 4.0, 10.0, 12.0)
        assert iou_2d(b, b) == 1.0

    def test_disjoint(self):
        assert iou_2d(Box2D(0, 0, 1, 1), Box2D(5, 5, 6, 6)) == 0.0

    def test_half_offset_square(self):
        value = iou_2d(Box2D(0, 0, 1, 1), Box2D(0.5, 0, 1.5, 1))
        assert value == pytest.approx(1.0 / 3.0, abs=1e-12)

    def test_zero_area_union(self):
        line = Box2D(0, 0, 0, 5)
        assert iou_2d(line, line) == 0.0

    def test_symmetry_exact(self, rng):
        def rand_box():
            x1, x2 = sorted(rng.uniform(0, 10) for _ in range(2))
            y1, y2 = sorted(rng.uniform(0, 10) for _ in range(2))
            return Box2D(x1, y1, x2, y2)

        for _ in range(300):
            a, b = rand_box(), rand_box()
            assert iou_2d(a, b) == iou_2d(b, a)


class TestClipConvex:
    def test_self_clip_preserves_area(self):
        p = square(2.0, 3.0, 4.0, 0.3)
        clipped = clip_convex(p, p)
        assert clipped.area == pytest.approx(p.area, abs=1e-12)

    def test_disjoint_squares_empty(self):
        assert clip_convex(square(0, 0, 1), square(10, 10, 1)).is_empty

    def test_rotated_square_octagon(self):
        inter = clip_convex(square(), square(angle=math.pi / 4.0))
        assert len(inter.vertices) == 8
        assert inter.area == pytest.approx(OCTAGON_AREA, abs=1e-9)

    def test_output_is_ccw(self):
        inter = clip_convex(square(0.3, 0.1, 1.2, 0.5), square(0, 0, 1.0, 0.0))
        assert inter.area > 0

    def test_empty_inputs(self):
        empty = ConvexPolygon2D()
        assert clip_convex(empty, square()).is_empty
        assert clip_convex(square(), empty).is_empty

    def test_polygon_validation(self):
        with pytest.raises(ValueError):
            ConvexPolygon2D(((0.0, 0.0), (1.0, 0.0)))
        with pytest.raises(ValueError):
            ConvexPolygon2D(((0.0, 0.0), (0.0, 1.0), (1.0, 0.0)))  # clockwise


class TestBevIou:
    def test_identical(self, vcam):
        b = box3d_from_metric(1.0, 0.2, 20.0, 2.0, 1.5, 4.0, 0.7)
        assert bev_iou(b, b, vcam) == 1.0

    def test_rotated_square_footprints(self, vcam):
        a = box3d_from_metric(0.0, 0.0, 20.0, 1.0, 1.0, 1.0, 0.0)
        b = box3d_from_metric(0.0, 0.0, 20.0, 1.0, 1.0, 1.0, math.pi / 4.0)
        assert bev_iou(a, b, vcam) == pytest.approx(OCTAGON_IOU, abs=1e-9)
        assert rotated_rect_iou((0, 0), (1, 1), 0.0, (0, 0), (1, 1), math.pi / 4.0) == pytest.approx(
            OCTAGON_IOU, abs=1e-12
        )

    def test_rigid_invariance(self, vcam, rng):
        for _ in range(100):
            x, z = rng.uniform(-3, 3), rng.uniform(10, 40)
            dx, dz = rng.uniform(-2, 2), rng.uniform(-4, 4)
            dyaw = rng.uniform(0, TWO_PI)
            a_dims = [rng.uniform(0.5, 4) for _ in range(3)]
            b_dims = [rng.uniform(0.5, 4) for _ in range(3)]
            yaw_a, yaw_b = rng.uniform(0, TWO_PI), rng.uniform(0, TWO_PI)
            off = [rng.uniform(-1.5, 1.5), rng.uniform(-1.5, 1.5)]

            base = bev_iou(
                box3d_from_metric(x, 0.0, z, *a_dims, yaw_a),
                box3d_from_metric(x + off[0], 0.0, z + off[1], *b_dims, yaw_b),
                vcam,
            )
            # Rotate the pair rigidly about (x, z) by dyaw, then translate.
            ca, sa = math.cos(dyaw), math.sin(dyaw)
            rx = ca * off[0] - sa * off[1]
            rz = sa * off[0] + ca * off[1]
            moved = bev_iou(
                box3d_from_metric(x + dx, 0.0, z + dz, *a_dims, yaw_a + dyaw),
                box3d_from_metric(x + dx + rx, 0.0, z + dz + rz, *b_dims, yaw_b + dyaw),
                vcam,
            )
            assert moved == pytest.approx(base, abs=1e-9)

    def test_symmetry_exact(self, vcam, rng):
        for _ in range(200):
            a, b = random_overlapping_pair(rng, yaw_only=True)
            assert bev_iou(a, b, vcam) == bev_iou(b, a, vcam)


class TestIou3D:
    def test_identical(self, vcam):
        b = box3d_from_metric(0.5, -0.2, 15.0, 2.0, 1.4, 4.5, 0.9, 0.2, 0.1)
        assert iou_3d(b, b, vcam) == 1.0

    def test_offset_unit_cubes(self, vcam):
        a = box3d_from_metric(0.0, 0.0, 10.0, 1.0, 1.0, 1.0)
        b = box3d_from_metric(0.5, 0.0, 10.0, 1.0, 1.0, 1.0)
        assert iou_3d(a, b, vcam) == pytest.approx(1.0 / 3.0, abs=1e-9)
        assert clipped_iou_3d(a, b, vcam) == pytest.approx(1.0 / 3.0, abs=1e-9)

    def test_disjoint(self, vcam):
        a = box3d_from_metric(0.0, 0.0, 10.0, 1.0, 1.0, 1.0)
        b = box3d_from_metric(5.0, 0.0, 10.0, 1.0, 1.0, 1.0)
        assert iou_3d(a, b, vcam) == 0.0

    def test_fast_path_matches_general_clipping(self, vcam, rng):
        for _ in range(150):
            a, b = random_overlapping_pair(rng, yaw_only=True)
            assert a.r2 == a.r3 == b.r2 == b.r3 == 0.0
            assert abs(iou_3d(a, b, vcam) - clipped_iou_3d(a, b, vcam)) < 1e-9

    def test_symmetry_exact(self, vcam, rng):
        for _ in range(150):
            a, b = random_overlapping_pair(rng)
            assert iou_3d(a, b, vcam) == iou_3d(b, a, vcam)

    def test_bounds(self, vcam, rng):
        for _ in range(300):
            a, b = random_overlapping_pair(rng)
            v = iou_3d(a, b, vcam)
            assert 0.0 <= v <= 1.0

    def test_nested_boxes(self, vcam):
        outer = box3d_from_metric(0.0, 0.0, 12.0, 4.0, 4.0, 4.0, 0.3, 0.2, 0.1)
        inner = box3d_from_metric(0.0, 0.0, 12.0, 2.0, 2.0, 2.0, 0.3, 0.2, 0.1)
        assert iou_3d(outer, inner, vcam) == pytest.approx(8.0 / 64.0, abs=1e-9)

    def test_agrees_with_monte_carlo(self, vcam, rng):
        for _ in range(25):
            a, b = random_overlapping_pair(rng)
            exact = iou_3d(a, b, vcam)
            estimate = monte_carlo_iou_3d(a, b, vcam, samples=200_000, seed=17)
            assert abs(exact - estimate) <= 0.03


class TestMonteCarlo:
    def test_identical_boxes(self, vcam):
        b = box3d_from_metric(0.0, 0.0, 10.0, 1.5, 1.0, 2.0, 0.4, 0.1, 0.9)
        assert monte_carlo_iou_3d(b, b, vcam, samples=10_000, seed=3) == 1.0

    def test_disjoint_exact_zero(self, vcam):
        a = box3d_from_metric(0.0, 0.0, 10.0, 1.0, 1.0, 1.0)
        b = box3d_from_metric(6.0, 0.0, 10.0, 1.0, 1.0, 1.0)
        assert monte_carlo_iou_3d(a, b, vcam, samples=50_000, seed=5) == 0.0

    def test_offset_cubes_near_third(self, vcam):
        a = box3d_from_metric(0.0, 0.0, 10.0, 1.0, 1.0, 1.0)
        b = box3d_from_metric(0.5, 0.0, 10.0, 1.0, 1.0, 1.0)
        est = monte_carlo_iou_3d(a, b, vcam, samples=1_000_000, seed=11)
        assert abs(est - 1.0 / 3.0) < 0.01

    def test_deterministic_given_seed(self, vcam, rng):
        a, b = random_overlapping_pair(rng)
        x = monte_carlo_iou_3d(a, b, vcam, samples=20_000, seed=42)
        y = monte_carlo_iou_3d(a, b, vcam, samples=20_000, seed=42)
        assert x == y

    def test_rejects_no_samples(self, vcam):
        a = box3d_from_metric(0.0, 0.0, 10.0, 1.0, 1.0, 1.0)
        with pytest.raises(ValueError):
            monte_carlo_iou_3d(a, a, vcam, samples=0, seed=1)
