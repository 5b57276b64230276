import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from morselink.core.config import settings as config
from morselink.core.errors import ErrorCode, MorseLinkError, NonTransverseError
from morselink.geometry import TWO_PI, builtin_model
from morselink.plchain import (
    Cell,
    PLChain,
    boundary_pl,
    bounding_chain,
    fiber_product,
    intersection_number,
    jitter_magnitude,
    jitter_moves,
    linking_number,
    linking_symmetry_residual,
    sign_bdry,
    sign_commute,
    sign_diag,
    sign_dualm,
    sign_linksym,
    sign_m,
    sign_prod,
    sign_su,
    sign_tm,
)
from morselink.plchain.intersection import locate_points

CIRCLE = builtin_model("CIRCLE-A")
TORUS = builtin_model("TORUS-C")
SPHERE = builtin_model("ROUND-SPHERE")


def loop(model, points):
    points = [np.asarray(p, dtype=float) for p in points]
    return PLChain.polyline(model.kind, points + [points[0]])


def circle_points(values, mults):
    return PLChain.points(CIRCLE.kind, [[v] for v in values], mults)


def meridian(y, count=8, reverse=False):
    xs = np.arange(count + 1) * (TWO_PI / count)
    vertices = np.stack([xs, np.full_like(xs, y)], axis=1)
    if reverse:
        vertices = vertices[::-1]
    return PLChain.polyline(TORUS.kind, vertices)


def longitude(x, count=8, offset=0.05):
    ys = offset + np.arange(count + 1) * (TWO_PI / count)
    return PLChain.polyline(TORUS.kind, np.stack([np.full_like(ys, x), ys], axis=1))


def latitude_loop(z, count=12, phase=0.1):
    r = math.sqrt(1 - z * z)
    angles = phase + np.arange(count) * (TWO_PI / count)
    return loop(SPHERE, [[r * math.cos(a), r * math.sin(a), z] for a in angles])


class TestSignRules:
    def test_examples(self):
        assert sign_commute(3, 1, 1) == 1
        assert sign_linksym(1, 0) == -1
        assert sign_dualm(2, 0) == 1

    def test_table_identities(self):
        for n in range(5):
            for p in range(n + 1):
                for q in range(p):
                    assert sign_m(n, p, q) == -sign_tm(n, p, q)
                if p >= 1:
                    assert sign_m(n, p, p - 1) == sign_dualm(n, p - 1)

    def test_all_rules_are_signs(self):
        for n in range(5):
            for a in range(n + 1):
                assert sign_bdry(n, a) in (1, -1)
                assert sign_diag(n, a) in (1, -1)
                assert sign_su(n, a) in (1, -1)
                for b in range(n + 1):
                    assert sign_commute(n, a, b) * sign_commute(n, b, a) == 1
                    assert sign_prod(n, a, n, b) in (1, -1)

    def test_out_of_range(self):
        with pytest.raises(MorseLinkError) as exc:
            sign_bdry(2, 3)
        assert exc.value.code is ErrorCode.INVALID_CONFIG
        with pytest.raises(MorseLinkError):
            sign_linksym(2, 2)


class TestBoundary:
    def test_segment(self):
        seg = PLChain.polyline(TORUS.kind, [[1.0, 1.0], [2.0, 1.5]])
        expected = PLChain.points(TORUS.kind, [[2.0, 1.5], [1.0, 1.0]], [1, -1])
        assert boundary_pl(seg).equals(expected)

    def test_closed_loop_has_empty_boundary(self):
        assert boundary_pl(loop(TORUS, [[1, 1], [2, 1], [2, 2], [1, 2]])).is_empty()
        assert boundary_pl(meridian(1.0)).is_empty()

    def test_triangle_boundary_orientation(self):
        tri = PLChain(2, TORUS.kind, (Cell(np.array([[0.5, 0.5], [1.5, 0.5], [0.5, 1.5]])),))
        expected = loop(TORUS, [[0.5, 0.5], [1.5, 0.5], [0.5, 1.5]])
        assert boundary_pl(tri).equals(expected)

    def test_boundary_of_boundary(self):
        square = PLChain(2, TORUS.kind, (
            Cell(np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0]])),
            Cell(np.array([[0.0, 0.0], [1.0, 1.0], [0.0, 1.0]])),
        ))
        edge = boundary_pl(square)
        assert len(edge.normalized().cells) == 4
        assert boundary_pl(edge).is_empty()

    def test_annulus_has_two_opposite_loops(self):
        cells = []
        xs = np.arange(9) * (TWO_PI / 8)
        for i in range(8):
            a, b = xs[i], xs[i + 1]
            cells.append(Cell(np.array([[a, 1.0], [b, 1.0], [b, 2.0]])))
            cells.append(Cell(np.array([[a, 1.0], [b, 2.0], [a, 2.0]])))
        annulus = PLChain(2, TORUS.kind, tuple(cells))
        assert boundary_pl(annulus).equals(meridian(1.0) + meridian(2.0, reverse=True))

    def test_lattice_translates_cancel(self):
        cell = np.array([[0.2, 0.3], [0.9, 0.3]])
        chain = PLChain(1, TORUS.kind, (Cell(cell), Cell(cell + TWO_PI, -1)))
        assert chain.is_empty()

    def test_wrapped_closed_edges_cancel(self):
        c = np.array([1.0, 1.0])
        d = np.array([TWO_PI, 0.0])
        chain = PLChain(1, TORUS.kind, (Cell(np.array([c, c - d])), Cell(np.array([c, c + d]))))
        assert chain.is_empty()


class TestIntersection:
    def test_axes_cross_positively(self):
        a = PLChain.polyline(TORUS.kind, [[0.9, 1.0], [1.1, 1.0]])
        b = PLChain.polyline(TORUS.kind, [[1.0, 0.9], [1.0, 1.1]])
        assert intersection_number(a, b, TORUS) == 1
        assert intersection_number(b, a, TORUS) == -1
        assert intersection_number(-a, b, TORUS) == -1

    def test_disjoint(self):
        a = PLChain.polyline(TORUS.kind, [[0.9, 1.0], [1.1, 1.0]])
        b = PLChain.polyline(TORUS.kind, [[3.0, 0.9], [3.0, 1.1]])
        assert intersection_number(a, b, TORUS) == 0

    def test_meridian_longitude(self):
        assert intersection_number(meridian(1.0), longitude(1.0), TORUS) == 1
        assert intersection_number(longitude(1.0), meridian(1.0), TORUS) == -1

    def test_crossing_across_the_seam(self):
        a = PLChain.polyline(TORUS.kind, [[TWO_PI - 0.1, 1.0], [TWO_PI + 0.1, 1.0]])
        b = PLChain.polyline(TORUS.kind, [[0.03, 0.9], [0.03, 1.1]])
        assert intersection_number(a, b, TORUS) == 1

    def test_point_in_circle_arc(self):
        arc = PLChain.polyline(CIRCLE.kind, [[1.0], [2.0]])
        assert intersection_number(circle_points([1.5], [2]), arc, CIRCLE) == 2
        assert intersection_number(arc, circle_points([2.5], [1]), CIRCLE) == 0

    def test_point_on_boundary_is_nontransverse(self):
        arc = PLChain.polyline(CIRCLE.kind, [[1.0], [2.0]])
        with pytest.raises(NonTransverseError):
            locate_points(CIRCLE, np.array([[2.0]]), np.array([c.vertices for c in arc.cells]))
        # 扰动后恢复为确定的计数
        assert intersection_number(circle_points([2.0], [1]), arc, CIRCLE) in (0, 1)

    def test_sphere_point_in_triangle(self):
        tri = PLChain(2, SPHERE.kind, (Cell(np.array([
            [1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0],
        ])),))
        inside = np.array([1.0, 1.0, 1.0]) / math.sqrt(3)
        assert intersection_number(PLChain.points(SPHERE.kind, [inside]), tri, SPHERE) == 1
        assert intersection_number(PLChain.points(SPHERE.kind, [-inside]), tri, SPHERE) == 0

    def test_fiber_product_sign(self):
        a = PLChain.polyline(TORUS.kind, [[0.9, 1.0], [1.1, 1.0]])
        b = PLChain.polyline(TORUS.kind, [[1.0, 0.9], [1.0, 1.1]])
        product = fiber_product(a, b, TORUS).normalized()
        assert len(product.cells) == 1
        assert product.cells[0].multiplicity == -1
        assert np.allclose(product.cells[0].vertices[0], [1.0, 1.0])


class TestBoundingChain:
    def test_two_points_on_circle(self):
        b = circle_points([1.0, 2.5], [1, -1])
        x = bounding_chain(b, CIRCLE)
        assert boundary_pl(x).equals(b)

    def test_unbalanced_points(self):
        with pytest.raises(MorseLinkError) as exc:
            bounding_chain(circle_points([1.0, 2.5], [1, 1]), CIRCLE)
        assert exc.value.code is ErrorCode.NOT_NULL_HOMOLOGOUS

    def test_meridian_is_not_null_homologous(self):
        with pytest.raises(MorseLinkError) as exc:
            bounding_chain(meridian(1.0), TORUS)
        assert exc.value.code is ErrorCode.NOT_NULL_HOMOLOGOUS

    def test_small_torus_loop(self):
        b = loop(TORUS, [[1.0, 1.0], [1.7, 1.2], [1.4, 1.9], [0.8, 1.6]])
        assert boundary_pl(bounding_chain(b, TORUS)).equals(b)

    def test_opposite_meridians(self):
        b = meridian(1.0) + meridian(2.0, reverse=True)
        assert boundary_pl(bounding_chain(b, TORUS)).equals(b)

    def test_small_sphere_loop(self):
        b = latitude_loop(0.9)
        assert boundary_pl(bounding_chain(b, SPHERE)).equals(b)

    def test_torus_points(self):
        b = PLChain.points(TORUS.kind, [[0.5, 0.5], [5.9, 4.0]], [1, -1])
        assert boundary_pl(bounding_chain(b, TORUS)).equals(b)


class TestLinking:
    def test_interleaved_circle_points(self):
        # CIRCLE-A：b_+ 在 m1、m2 附近，b_- 在 M1、M2 附近，交错排列
        b_plus = circle_points([1.5, 4.4], [1, -1])
        b_minus = circle_points([0.2, 3.6], [1, -1])
        assert linking_number(b_minus, b_plus, CIRCLE) == 1
        assert linking_number(b_plus, b_minus, CIRCLE) == sign_linksym(1, 0) * 1

    def test_non_interleaved(self):
        b_plus = circle_points([1.5, 4.4], [1, -1])
        b_minus = circle_points([2.0, 3.0], [1, -1])
        assert linking_number(b_minus, b_plus, CIRCLE) == 0

    def test_empty(self):
        assert linking_number(PLChain.empty(0, CIRCLE.kind), circle_points([1.0, 2.0], [1, -1]), CIRCLE) == 0

    def test_carriers_intersect(self):
        with pytest.raises(MorseLinkError) as exc:
            linking_number(circle_points([1.0, 3.0], [1, -1]), circle_points([1.0, 2.0], [1, -1]), CIRCLE)
        assert exc.value.code is ErrorCode.CARRIERS_INTERSECT

    def test_sphere_point_and_loop(self):
        b_plus = PLChain.points(SPHERE.kind, [[0.0, 0.0, 1.0], [0.0, 0.0, -1.0]], [1, -1])
        value = linking_number(latitude_loop(0.2), b_plus, SPHERE, check_refined=True)
        assert abs(value) == 1
        assert linking_symmetry_residual(b_plus, latitude_loop(0.2), SPHERE) == 0

    def test_jitter_grows_past_transversality_tolerance(self):
        x = np.array([1.0, 2.0])
        steps = [float(np.linalg.norm(move(x) - x)) for _, move in jitter_moves(TORUS, seed=0, retries=4)]
        assert steps[0] == 0.0
        assert steps[1:] == pytest.approx([jitter_magnitude(TORUS, k) for k in range(1, 5)])
        assert steps[-1] > 10 * config.TRANSVERSALITY_EPS

    @settings(max_examples=200, deadline=None)
    @given(st.lists(st.floats(0.05, TWO_PI - 0.05), min_size=4, max_size=4, unique=True))
    def test_circle_symmetry(self, values):
        values = sorted(values)
        if min(np.diff(values)) < 1e-3:
            return
        f = circle_points([values[0], values[2]], [1, -1])
        g = circle_points([values[1], values[3]], [1, -1])
        assert linking_symmetry_residual(f, g, CIRCLE) == 0
        assert abs(linking_number(g, f, CIRCLE)) == 1

    @settings(max_examples=50, deadline=None)
    @given(st.floats(0.3, 5.9), st.floats(0.3, 5.9), st.floats(0.3, 5.9))
    def test_torus_symmetry(self, x, y0, y1):
        if abs(y0 - y1) < 0.3:
            return
        f = PLChain.points(TORUS.kind, [[x + 0.013, y0], [x + 0.013, y1]], [1, -1])
        g = loop(TORUS, [[x - 0.2, y0 - 0.2], [x + 0.2, y0 - 0.2], [x + 0.2, y0 + 0.2], [x - 0.2, y0 + 0.2]])
        assert linking_symmetry_residual(f, g, TORUS) == 0
