import math

import numpy as np
import pytest

from services.geometry.core.exceptions import AnchorError, ArgumentError, DegeneratePlaneError, SamplingError
from services.geometry.curves import Arc, Segment
from services.geometry.grading import (
    LagrangianPlane,
    alpha_hor,
    alpha_total,
    alpha_vert,
    canonical_short_path,
    degree,
    degree_details,
    degree_split,
    bigon_relation,
    grade,
    grade_near,
    unwrap_lift,
    zeta,
)
from services.geometry.lagrangians import FiberedLagrangian, find_intersections, make_fiber
from services.geometry.models import PointY, TangentVec

SQRT2 = math.sqrt(2.0)


def _lagrangian(model, curve, fiber, name, **params):
    return FiberedLagrangian(model, curve, make_fiber(model, fiber, curve.point(0.0), **params), name=name, warm=False)


@pytest.fixture
def trivial_pair(trivial):
    L0 = _lagrangian(trivial, Segment(0.0, 1.0, (-1.0, 1.0)), "point", "L0")
    L1 = _lagrangian(trivial, Segment(0.0, np.exp(1j * math.pi / 3), (-1.0, 1.0)), "point", "L1")
    (p,) = find_intersections(L0, L1)
    return grade(L0, 0.0, 0.0), grade(L1, 0.0, 1.0 / 3.0), p


@pytest.fixture
def conic_pair(conic):
    L0 = _lagrangian(conic, Segment(2.0, 3.0, (-1.0, 1.0)), "circle", "L0")
    L1 = _lagrangian(conic, Segment(2.0, 2.0 + 1j, (-1.0, 1.0)), "real_ray", "L1")
    (p,) = find_intersections(L0, L1)
    return grade(L0, 0.5, 0.0), grade(L1, 0.0, 0.5), p


@pytest.fixture
def conic_bigon(conic):
    """Arcs through c = ±1 enclosing the critical value 0."""
    L0 = _lagrangian(conic, Arc(-1j, SQRT2, math.pi / 4, 3 * math.pi / 4), "real_ray", "L0")
    L1 = _lagrangian(conic, Arc(1j, SQRT2, -math.pi / 4, -3 * math.pi / 4), "circle", "L1")
    points = find_intersections(L0, L1)
    return grade(L0, 0.0, 0.75), grade(L1, 0.5, -0.75), points


class TestLifts:
    def test_unwrap_counts_turns(self):
        samples = np.exp(2j * math.pi * 0.1 * np.arange(21))
        np.testing.assert_allclose(unwrap_lift(samples, 0.0), 0.1 * np.arange(21), atol=1e-12)
        np.testing.assert_allclose(unwrap_lift(samples, 3.0)[-1], 5.0)

    def test_unwrap_rejects_coarse_sampling(self):
        with pytest.raises(SamplingError):
            unwrap_lift([1.0, np.exp(2j * math.pi * 0.4)], 0.0)

    def test_zeta_joins_the_two_lines(self):
        theta = 1.1
        assert zeta(theta, 0.0) == pytest.approx(1.0)
        end = complex(zeta(theta, 1.0))
        assert end.imag < 0
        assert np.mod(np.angle(end), math.pi) == pytest.approx(theta)


class TestGrading:
    def test_anchor_must_match_phase(self, trivial):
        L = _lagrangian(trivial, Segment(0.0, 1j), "point", "L")
        with pytest.raises(AnchorError):
            grade(L, 0.0, 0.0)
        assert grade(L, 0.0, 0.5).base_lift(0.7) == pytest.approx(0.5)

    def test_base_lift_follows_a_circle(self, trivial, unit_circle):
        # γ̇² turns twice around a full circle
        Lg = grade(_lagrangian(trivial, unit_circle, "point", "L"), 0.0, 0.5)
        assert Lg.base_lift(1.0) == pytest.approx(2.5, abs=1e-9)

    def test_grade_near_snaps_to_closest_lift(self, conic_pair):
        L1 = conic_pair[1].lagrangian
        Lg = grade_near(L1, 2.1, 0.4)
        assert Lg.fiber_anchor == pytest.approx(2.0)
        assert Lg.base_anchor == pytest.approx(0.5)

    def test_phase_splits_into_vertical_and_base(self, circle_over_segment):
        Lg = grade(circle_over_segment, 0.5, 0.5)
        for t, s in [(0.3, 0.2), (0.8, 4.0)]:
            assert abs(Lg.phase(t, s) - Lg.vertical_phase(t, s) * Lg.base_phase(t)) < 1e-8
            assert abs(np.exp(2j * math.pi * Lg.lift(t, s)) - Lg.phase(t, s)) < 1e-6

    def test_shifted_keeps_the_lagrangian(self, conic_pair):
        Lg = conic_pair[0]
        moved = Lg.shifted(fiber=1, base=-2)
        assert moved.lagrangian is Lg.lagrangian
        assert moved.fiber_anchor == Lg.fiber_anchor + 1
        assert moved.base_anchor == Lg.base_anchor - 2


class TestDegrees:
    def test_trivial_lines(self, trivial_pair):
        L0g, L1g, p = trivial_pair
        assert degree(L0g, L1g, p) == 1
        assert degree_split(L0g, L1g, p) == (0, 1, 1)

    def test_reversed_pair_is_dual(self, trivial_pair):
        L0g, L1g, p = trivial_pair
        (q,) = find_intersections(L1g.lagrangian, L0g.lagrangian)
        assert degree(L1g, L0g, q) == 1 - degree(L0g, L1g, p)

    def test_anchor_shifts(self, trivial_pair):
        L0g, L1g, p = trivial_pair
        assert degree(L0g, L1g.shifted(base=1), p) == 2
        assert degree(L0g.shifted(base=1), L1g, p) == 0

    def test_conic_degree_splits(self, conic_pair):
        L0g, L1g, p = conic_pair
        record = degree_details(L0g, L1g, p)
        assert (record.fiber_degree, record.base_degree, record.degree) == (0, 1, 1)
        assert record.residual < 1e-6
        assert record.theta_vertical == pytest.approx(math.pi / 2)
        assert record.theta_horizontal == pytest.approx(math.pi / 2)

    def test_conic_fiber_anchor_shift(self, conic_pair):
        L0g, L1g, p = conic_pair
        assert degree_split(L0g, L1g.shifted(fiber=1), p) == (1, 1, 2)

    def test_ray_against_circle(self, conic):
        """ray (fiber 0, base 0) を L₀、circle (1/2, 1/2) を L₁ とする順序"""
        L0 = _lagrangian(conic, Segment(2.0, 3.0, (-1.0, 1.0)), "real_ray", "L0")
        L1 = _lagrangian(conic, Segment(2.0, 2.0 + 1j, (-1.0, 1.0)), "circle", "L1")
        (p,) = find_intersections(L0, L1)
        assert degree_split(grade(L0, 0.0, 0.0), grade(L1, 0.5, 0.5), p) == (1, 1, 2)

    def test_reversed_conic_pair(self, conic_pair):
        L0g, L1g, _ = conic_pair
        (q,) = find_intersections(L1g.lagrangian, L0g.lagrangian)
        assert degree_split(L1g, L0g, q) == (1, 0, 1)

    def test_common_rotation_keeps_the_split(self, conic, conic_pair):
        """底曲線を共通角で回転しても (fiber, base, total) は不変"""
        expected = degree_split(*conic_pair)
        rng = np.random.default_rng(11)
        for phi in rng.uniform(0.0, 2.0 * math.pi, size=20):
            L0 = _lagrangian(conic, Segment(2.0, 3.0, (-1.0, 1.0)).rotated(phi), "circle", "L0")
            L1 = _lagrangian(conic, Segment(2.0, 2.0 + 1j, (-1.0, 1.0)).rotated(phi), "real_ray", "L1")
            (p,) = find_intersections(L0, L1)
            L0g = grade_near(L0, 0.5, phi / math.pi)
            L1g = grade_near(L1, 0.0, 0.5 + phi / math.pi)
            assert degree_split(L0g, L1g, p) == expected, phi


class TestBigon:
    def test_trivial_bigon_shifts_by_one(self, trivial):
        L0 = _lagrangian(trivial, Arc(-1j, SQRT2, math.pi / 4, 3 * math.pi / 4), "point", "L0")
        L1 = _lagrangian(trivial, Arc(1j, SQRT2, -math.pi / 4, -3 * math.pi / 4), "point", "L1")
        points = find_intersections(L0, L1)
        assert len(points) == 2
        record = bigon_relation(grade(L0, 0.0, 0.75), grade(L1, 0.0, -0.75), points)
        assert record.lhs == 1
        assert record.difference == 0
        assert record.monodromy_displacement < 1e-9

    def test_conic_bigon_around_critical_value(self, conic_bigon):
        L0g, L1g, points = conic_bigon
        assert len(points) == 2
        record = bigon_relation(L0g, L1g, points)
        assert record.difference == 0
        # (1, 1) ↦ (−1, −1) once around c = 0
        assert record.monodromy_displacement == pytest.approx(2.0 * SQRT2, abs=1e-5)

    def test_pulled_back_corner_follows_the_loop(self, conic_bigon):
        """p′₋ は与えたループに沿って引き戻される"""
        L0g, L1g, points = conic_bigon
        around = bigon_relation(L0g, L1g, points)
        c = around.c_plus
        (corner,) = [q for q in points if abs(q.base_value - c) < 1e-9]
        small = Arc(1.3 * c, 0.3, np.angle(-c), np.angle(-c) + 2.0 * math.pi)
        contractible = bigon_relation(L0g, L1g, points, loop=small)

        np.testing.assert_allclose(around.pulled_back_point.coords, -corner.point.coords, atol=1e-6)
        np.testing.assert_allclose(contractible.pulled_back_point.coords, corner.point.coords, atol=1e-6)
        assert contractible.monodromy_displacement < 1e-6
        assert contractible.lhs == around.lhs
        for record in (around, contractible):
            assert record.rhs == record.fiber_degree_plus - record.fiber_degree_pulled_back + 1

    def test_loop_must_be_based_at_c_plus(self, conic_bigon):
        L0g, L1g, points = conic_bigon
        with pytest.raises(ArgumentError):
            bigon_relation(L0g, L1g, points, loop=Arc(5.0, 1.0, 0.0, 2.0 * math.pi))
        with pytest.raises(ArgumentError):
            bigon_relation(L0g, L1g, points, loop=Segment(1.0, 2.0))


class TestPhases:
    """α の各成分 (conic, 点 (1, 1))"""

    @pytest.fixture
    def p(self):
        return PointY([1.0, 1.0])

    def _plane(self, p, *vectors):
        return LagrangianPlane(p, tuple(TangentVec(p, np.asarray(v, dtype=complex)) for v in vectors))

    def test_total_phase_of_rotated_planes(self, conic, p):
        assert alpha_total(conic, self._plane(p, [1, 0], [0, 1])) == pytest.approx(1.0)
        assert alpha_total(conic, self._plane(p, [1j, 0], [0, 1j])) == pytest.approx(1.0)
        theta = 0.3
        rotated = self._plane(p, [np.exp(1j * theta), 0], [0, 1])
        assert alpha_total(conic, rotated) == pytest.approx(np.exp(2j * theta))

    def test_total_phase_ignores_the_basis(self, conic):
        """実基底の取り替え (20 回) で α_Θ は変わらない"""
        rng = np.random.default_rng(7)
        q = PointY([0.4 - 1.1j, 2.0 + 0.3j])
        for _ in range(20):
            # columns of a unitary matrix span a Lagrangian plane
            u, _ = np.linalg.qr(rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2)))
            change = rng.normal(size=(2, 2))
            while abs(np.linalg.det(change)) < 0.1:
                change = rng.normal(size=(2, 2))
            plane = self._plane(q, *u.T)
            moved = self._plane(q, *(u @ change).T)
            assert alpha_total(conic, moved) == pytest.approx(alpha_total(conic, plane), abs=1e-10)

    def test_plane_must_be_lagrangian(self, p):
        with pytest.raises(ArgumentError):
            self._plane(p, [1, 0], [1j, 0])
        with pytest.raises(DegeneratePlaneError):
            self._plane(p, [1, 0], [2, 0])

    def test_vertical_phase(self, conic, p):
        # 円ファイバーの接ベクトル i·(1, −1) の留数は i
        v = [TangentVec(p, np.array([1j, -1j]))]
        assert alpha_vert(conic, p, v) == pytest.approx(-1.0)
        assert alpha_vert(conic, p, v, probe=np.array([1.0, 0.0])) == pytest.approx(-1.0)
        assert alpha_vert(conic, p, [TangentVec(p, np.array([1.0, -1.0]))]) == pytest.approx(1.0)

    def test_horizontal_phase(self, conic, p):
        assert alpha_hor(conic, p, TangentVec(p, np.array([1.0, 0.0]))) == pytest.approx(1.0)
        assert alpha_hor(conic, p, TangentVec(p, np.array([1j, 0.0]))) == pytest.approx(-1.0)
        with pytest.raises(DegeneratePlaneError):
            alpha_hor(conic, p, TangentVec(p, np.array([1.0, -1.0])))


class TestShortPath:
    def test_endpoints(self, conic, conic_pair):
        L0g, L1g, p = conic_pair
        path = canonical_short_path(p, L0g.lagrangian, L1g.lagrangian)
        z = p.point.coords
        from services.geometry.lagrangians import tangent_frame

        frame0 = tangent_frame(L0g.lagrangian, *p.params0)
        frame1 = tangent_frame(L1g.lagrangian, *p.params1)
        start, end = path.plane(0.0), path.plane(1.0)
        np.testing.assert_allclose(start.basis[0].components, frame0[0].components)
        np.testing.assert_allclose(start.basis[1].components, frame0[1].components)

        # τ = 1 で各因子が L1 の直線に重なる
        vertical = conic.residue_form(z, end.basis[0].components) / conic.residue_form(z, frame1[0].components)
        horizontal = complex(conic.dv(z, end.basis[1].components)) / complex(conic.dv(z, frame1[1].components))
        assert abs(vertical.imag) < 1e-8 * abs(vertical)
        assert abs(horizontal.imag) < 1e-8 * abs(horizontal)

    def test_planes_stay_lagrangian(self, conic_pair):
        L0g, L1g, p = conic_pair
        path = canonical_short_path(p, L0g.lagrangian, L1g.lagrangian)
        for tau in np.linspace(0.0, 1.0, 9):
            assert len(path.plane(float(tau)).basis) == 2
