import math
from itertools import combinations

import numpy as np
import pytest

from celldiv.geometry import (
    Atoms2D,
    AxisPlane,
    Box,
    ConstantRule,
    ConvexPolygon2,
    GeometryError,
    IntrinsicVolumeRule,
    LambdaRule,
    Line2,
    Mondrian,
    SplitRejected,
    SumOfSidesRule,
    intrinsic_volume,
    lambda_hit_rate,
    lifetime_rate,
    sample_dividing_hyperplane,
    split_cell,
    width,
)
from celldiv.streams import stream


def random_box(rng, d):
    lo = rng.uniform(-2.0, 2.0, size=d)
    sides = np.exp(rng.normal(0.0, 1.0, size=d))
    return Box(tuple(lo), tuple(lo + sides))


class TestBox:
    def test_basic(self):
        b = Box((0.0, -1.0), (2.0, 3.0))
        assert b.sides == (2.0, 4.0)
        assert b.volume() == 8.0
        assert b.sum_of_sides() == 6.0

    def test_degenerate_rejected(self):
        with pytest.raises(GeometryError):
            Box((0.0, 0.0), (1.0, 0.0))
        with pytest.raises(GeometryError):
            Box((0.0,), (math.inf,))

    def test_intersect(self):
        a = Box((0.0, 0.0), (2.0, 2.0))
        assert a.intersect(Box((1.0, 1.0), (3.0, 3.0))) == Box((1.0, 1.0), (2.0, 2.0))
        assert a.intersect(Box((2.0, 0.0), (3.0, 1.0))) is None


class TestPolygon:
    def test_validation(self):
        with pytest.raises(GeometryError):
            ConvexPolygon2(((0, 0), (1, 0)))
        with pytest.raises(GeometryError):  # clockwise
            ConvexPolygon2(((0, 0), (0, 1), (1, 0)))
        with pytest.raises(GeometryError):  # non-convex
            ConvexPolygon2(((0, 0), (2, 0), (1, 0.1), (0, 2)))

    def test_area_and_reference(self):
        tri = ConvexPolygon2(((0, 0), (1, 0), (0, 1)))
        assert tri.area() == 0.5
        assert tri.reference_point() == (0.0, 0.0)


class TestDistributions:
    def test_mondrian_validation(self):
        with pytest.raises(GeometryError):
            Mondrian((0.5, 0.6))
        with pytest.raises(GeometryError):
            Mondrian((1.0, -0.0))

    def test_atoms_need_two_directions(self):
        # +u and -u collapse onto one canonical atom
        with pytest.raises(GeometryError):
            Atoms2D(((0.0, 1.0), (0.0, -1.0)), (0.5, 0.5))

    def test_atoms_canonicalized(self):
        phi = Atoms2D(((0.0, -1.0), (2.0, 0.0)), (0.25, 0.75))
        assert all(u[1] > 0 or (u[1] == 0 and u[0] > 0) for u in phi.directions)
        assert all(abs(math.hypot(*u) - 1.0) < 1e-12 for u in phi.directions)


class TestHitRate:
    def test_unit_cube(self):
        # offset range per axis has length side_k, so the rate is sum p_k side_k
        assert lambda_hit_rate(Box((0, 0, 0), (1, 1, 1)), Mondrian((1 / 3, 1 / 3, 1 / 3))) == 1.0

    def test_rectangle(self):
        assert lambda_hit_rate(Box((0, 0), (2, 3)), Mondrian((0.5, 0.5))) == 2.5

    def test_scaling_homogeneity(self):
        rng = stream(101, 0)
        phi = Mondrian((0.2, 0.8))
        for _ in range(50):
            b = random_box(rng, 2)
            c = float(np.exp(rng.normal()))
            scaled = Box(tuple(c * v for v in b.lower), tuple(c * v for v in b.upper))
            assert lambda_hit_rate(scaled, phi) == pytest.approx(c * lambda_hit_rate(b, phi), rel=1e-12)

    def test_translation_invariance_and_monotone(self):
        rng = stream(101, 1)
        phi = Mondrian((0.4, 0.6))
        for _ in range(50):
            b = random_box(rng, 2)
            shift = rng.uniform(-5, 5, size=2)
            assert lambda_hit_rate(b.translate(shift), phi) == pytest.approx(
                lambda_hit_rate(b, phi), rel=1e-12
            )
            bigger = Box(tuple(v - 0.5 for v in b.lower), tuple(v + 0.5 for v in b.upper))
            assert lambda_hit_rate(bigger, phi) > lambda_hit_rate(b, phi)

    def test_polygon_widths(self):
        tri = ConvexPolygon2(((0, 0), (1, 0), (0, 1)))
        assert width(tri, (1.0, 0.0)) == 1.0
        assert width(tri, (0.0, 1.0)) == 1.0
        s = 1 / math.sqrt(2)
        assert width(tri, (s, s)) == pytest.approx(s)
        phi = Atoms2D(((1.0, 0.0), (0.0, 1.0)), (0.5, 0.5))
        assert lambda_hit_rate(tri, phi) == pytest.approx(1.0)

    def test_variant_mismatch(self):
        tri = ConvexPolygon2(((0, 0), (1, 0), (0, 1)))
        with pytest.raises(GeometryError):
            lambda_hit_rate(tri, Mondrian((0.5, 0.5)))


class TestIntrinsicVolume:
    def test_examples(self):
        b = Box((0, 0, 0), (1, 2, 3))
        assert intrinsic_volume(b, 2) == 11.0  # 1*2 + 1*3 + 2*3
        assert intrinsic_volume(b, 3) == 6.0
        assert intrinsic_volume(Box((0.0,), (2.5,)), 1) == 2.5

    def test_out_of_range(self):
        with pytest.raises(GeometryError):
            intrinsic_volume(Box((0, 0), (1, 1)), 3)
        with pytest.raises(GeometryError):
            intrinsic_volume(Box((0, 0), (1, 1)), 0)

    def test_brute_force_oracle(self):
        rng = stream(101, 2)
        for _ in range(200):
            d = int(rng.integers(1, 7))
            b = random_box(rng, d)
            n = int(rng.integers(1, d + 1))
            oracle = sum(math.prod(b.sides[k] for k in idx) for idx in combinations(range(d), n))
            assert intrinsic_volume(b, n) == oracle


class TestLifetimeRate:
    def test_named_values(self):
        b = Box((0, 0, 0), (1, 2, 3))
        assert lifetime_rate(SumOfSidesRule(), b) == 6.0
        assert lifetime_rate(IntrinsicVolumeRule(3), Box((0, 0, 0), (1, 1, 1))) == 1.0
        assert lifetime_rate(ConstantRule(2.5), b) == 2.5

    def test_lambda_equals_scaled_sum_for_uniform_weights(self):
        # with p_k = 1/d and d a power of two the identity is exact in floats
        rng = stream(101, 3)
        for d in (2, 4):
            phi = Mondrian((1.0 / d,) * d)
            for _ in range(25):
                b = random_box(rng, d)
                assert lifetime_rate(LambdaRule(), b, phi) == lifetime_rate(SumOfSidesRule(), b) / d

    def test_alpha_validation(self):
        with pytest.raises(GeometryError):
            IntrinsicVolumeRule(2, alpha=0.5)
        with pytest.warns(UserWarning):
            IntrinsicVolumeRule(2, alpha=0.5, allow_small_alpha=True)

    def test_rule_geometry_mismatch(self):
        tri = ConvexPolygon2(((0, 0), (1, 0), (0, 1)))
        with pytest.raises(GeometryError):
            lifetime_rate(SumOfSidesRule(), tri)
        with pytest.raises(GeometryError):
            lifetime_rate(IntrinsicVolumeRule(2), tri)


class TestDividingHyperplane:
    def test_axis_probability_weights(self):
        # axis chosen with probability p_k side_k / sum: for sides (2,3) the
        # second axis has probability 3/5
        rng = stream(101, 4)
        z = Box((0, 0), (2, 3))
        phi = Mondrian((0.5, 0.5))
        n = 100_000
        hits = sum(sample_dividing_hyperplane(z, phi, rng).axis == 1 for _ in range(n))
        sigma = math.sqrt(0.6 * 0.4 / n)
        assert abs(hits / n - 0.6) < 4 * sigma

    def test_extreme_aspect_prefers_long_axis(self):
        rng = stream(101, 5)
        z = Box((0, 0), (10.0, 1e-4))
        phi = Mondrian((0.5, 0.5))
        # P(axis 0) = 10 / 10.0001
        hits = sum(sample_dividing_hyperplane(z, phi, rng).axis == 0 for _ in range(20_000))
        assert hits >= 19_990

    def test_offset_uniform_and_interior(self):
        rng = stream(101, 6)
        z = Box((0, 0), (1, 1))
        phi = Mondrian((0.5, 0.5))
        offsets = [sample_dividing_hyperplane(z, phi, rng).offset for _ in range(5000)]
        assert all(0.0 < x < 1.0 for x in offsets)
        # crude uniformity check on quartiles
        qs = np.quantile(offsets, [0.25, 0.5, 0.75])
        assert np.allclose(qs, [0.25, 0.5, 0.75], atol=0.03)

    def test_polygon_line_hits_interior(self):
        rng = stream(101, 7)
        tri = ConvexPolygon2(((0, 0), (2, 0), (0, 2)))
        phi = Atoms2D(((1.0, 0.0), (0.5, 0.5)), (0.5, 0.5))
        for _ in range(200):
            h = sample_dividing_hyperplane(tri, phi, rng)
            a, b = split_cell(tri, h)  # must not raise
            assert a.area() > 0 and b.area() > 0


class TestSplitCell:
    def test_unit_square(self):
        lo, hi = split_cell(Box((0, 0), (1, 1)), AxisPlane(0, 0.25))
        assert lo.sides == (0.25, 1.0)
        assert hi.sides == (0.75, 1.0)

    def test_side_conservation(self):
        rng = stream(101, 8)
        for _ in range(200):
            z = random_box(rng, 3)
            k = int(rng.integers(0, 3))
            x = z.lower[k] + z.sides[k] * (0.05 + 0.9 * rng.random())
            a, b = split_cell(z, AxisPlane(k, x))
            for j in range(3):
                if j == k:
                    assert a.sides[j] + b.sides[j] == pytest.approx(z.sides[j], rel=1e-12)
                else:
                    assert a.sides[j] == z.sides[j] and b.sides[j] == z.sides[j]

    def test_triangle_vertical_split(self):
        tri = ConvexPolygon2(((0, 0), (1, 0), (0, 1)))
        left, right = split_cell(tri, Line2((1.0, 0.0), 0.5))
        assert left.area() == pytest.approx(0.375)
        assert right.area() == pytest.approx(0.125)

    def test_boundary_grazing_rejected(self):
        z = Box((0, 0), (1, 1))
        with pytest.raises(SplitRejected):
            split_cell(z, AxisPlane(0, 0.0))
        with pytest.raises(SplitRejected):
            split_cell(z, AxisPlane(0, 1.0 - 1e-16))
        tri = ConvexPolygon2(((0, 0), (1, 0), (0, 1)))
        with pytest.raises(SplitRejected):
            split_cell(tri, Line2((1.0, 0.0), 2.0))

    def test_polygon_volume_conservation(self):
        rng = stream(101, 9)
        phi = Atoms2D(((1.0, 0.0), (0.0, 1.0), (1.0, 1.0)), (0.4, 0.4, 0.2))
        cell = Box((0, 0), (1, 1)).to_polygon()
        for _ in range(300):
            h = sample_dividing_hyperplane(cell, phi, rng)
            a, b = split_cell(cell, h)
            assert a.area() + b.area() == pytest.approx(cell.area(), rel=1e-9)

    def test_box_by_line_promotes_to_polygons(self):
        a, b = split_cell(Box((0, 0), (1, 1)), Line2((math.sqrt(0.5), math.sqrt(0.5)), math.sqrt(0.5)))
        assert a.area() + b.area() == pytest.approx(1.0, rel=1e-12)
        assert a.area() == pytest.approx(0.5, rel=1e-9)
