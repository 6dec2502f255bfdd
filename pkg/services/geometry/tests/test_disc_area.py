import math

import pytest

from services.geometry.config import overridden
from services.geometry.core.exceptions import ArgumentError, HypothesisError
from services.geometry.disc_area import (
    area_difference_check,
    constant_disc,
    deform_disc,
    disc_area,
    fiber_annulus,
    fiber_deviation,
    fiber_triangle,
    polar_disc,
    triangle_split_check,
)
from services.geometry.isotopy import make_isotopy


class TestAreas:
    @pytest.mark.parametrize("radius", [0.5, 1.0, 2.0])
    def test_polar_disc(self, radius):
        disc = polar_disc(radius)
        assert disc_area(disc) == pytest.approx(math.pi * radius**2, abs=1e-9)
        assert disc.boundary_deviation() < 1e-9

    def test_fiber_annulus(self):
        # z₁-annulus plus its image under z₂ = 1/z₁
        assert disc_area(fiber_annulus(1.0, 1.0, 2.0)) == pytest.approx(3.75 * math.pi, abs=1e-6)

    def test_constant_disc(self, conic):
        disc = constant_disc(conic, [2.0, 1.0])
        assert disc_area(disc) == 0.0
        assert fiber_deviation(disc, 2.0) == 0.0

    def test_annulus_radii(self):
        with pytest.raises(ArgumentError):
            fiber_annulus(1.0, 2.0, 1.0)

    def test_columns(self):
        columns = polar_disc(1.0).to_columns(cells=2)
        assert list(columns) == ["piece", "a", "b", "arc", "z1_re", "z1_im"]
        assert len(columns["a"]) == 9
        assert "circle" in columns["arc"]


class TestAreaDifference:
    def test_identity_isotopy_keeps_the_disc(self):
        disc = polar_disc(1.0)
        L = disc.arcs[0].target
        iso = make_isotopy(L, L.curve, L.curve.domain)
        assert deform_disc(disc, iso, 0) is disc
        report = area_difference_check(disc, iso, 0)
        assert report.residual < 1e-12
        assert report.boundary_term == 0.0

    def test_contraction_matches_potential(self):
        disc = polar_disc(1.0)
        iso = make_isotopy(disc.arcs[0].target, 0.3, (0.3, 0.6), bump_width=0.25)
        with overridden({"COLLAR_SAMPLES": 129}):
            report = area_difference_check(disc, iso, 0)
        # pulling part of the circle inwards loses area
        assert report.area_u_prime < report.area_u
        assert report.residual < 1e-5

    def test_isotopy_of_another_lagrangian(self):
        disc = polar_disc(1.0)
        other = polar_disc(2.0).arcs[0].target
        with pytest.raises(ArgumentError):
            deform_disc(disc, make_isotopy(other, 0.0, (0.3, 0.6)), 0)
        with pytest.raises(ArgumentError):
            deform_disc(disc, make_isotopy(other, 0.0, (0.3, 0.6)), 3)


@pytest.mark.slow
class TestTriangle:
    def test_split_identity(self):
        setup = fiber_triangle()
        report = triangle_split_check(setup.u, setup.isotopy, setup.u_fiber, 0, complex(-setup.epsilon))
        assert report.residual < 1e-5
        assert report.metadata["fiber_deviation"] < 1e-8
        assert disc_area(setup.u_reparametrized) == pytest.approx(report.area_u, abs=1e-5)

    def test_split_needs_a_fiber_disc(self):
        setup = fiber_triangle()
        with pytest.raises(HypothesisError):
            triangle_split_check(setup.u, setup.isotopy, setup.u, 0, complex(-setup.epsilon))


def test_overridden_restores_settings():
    from services.geometry.config import config

    before = config.COLLAR_SAMPLES
    with overridden({"COLLAR_SAMPLES": 9}) as settings:
        assert config.COLLAR_SAMPLES == 9
        assert settings.COLLAR_SAMPLES == 9
    assert config.COLLAR_SAMPLES == before
    with pytest.raises(KeyError):
        with overridden({"NOT_A_SETTING": 1}):
            pass
