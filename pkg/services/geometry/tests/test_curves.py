import math

import numpy as np
import pytest

from services.geometry.core.exceptions import ArgumentError
from services.geometry.curves import Arc, Composite, ConstantPath, Reparametrized, Segment, ushape


def test_segment_basepoint_is_start():
    path = Segment(2.0, 3.0, domain=(-1.0, 1.0))
    assert path.point(0.0) == pytest.approx(2.0)
    assert path.point(-1.0) == pytest.approx(1.0)
    assert path.derivative(0.5) == pytest.approx(1.0)


def test_arc_point_and_derivative(unit_circle):
    assert unit_circle.point(0.25) == pytest.approx(1j)
    assert unit_circle.derivative(0.0) == pytest.approx(2.0j * math.pi)
    assert unit_circle.is_closed()


def test_invalid_paths():
    with pytest.raises(ArgumentError):
        Segment(1.0, 1.0)
    with pytest.raises(ArgumentError):
        Arc(0.0, -1.0, 0.0, 1.0)
    with pytest.raises(ArgumentError):
        ConstantPath(0.0, domain=(1.0, 1.0))


def test_composite_joins_and_breakpoints():
    path = Composite([Segment(0.0, 1.0), Segment(1.0, 1.0 + 1j)], origin=0.5)
    assert path.domain == (-0.5, 1.5)
    assert path.breakpoints == (0.5,)
    assert path.point(0.0) == pytest.approx(0.5)
    assert path.point(1.0) == pytest.approx(1.0 + 0.5j)
    with pytest.raises(ArgumentError):
        path.piece_for(0.0, 1.0)


def test_composite_rejects_gaps():
    with pytest.raises(ArgumentError):
        Composite([Segment(0.0, 1.0), Segment(2.0, 3.0)])


def test_nodes_contain_breakpoints():
    path = Composite([Segment(0.0, 1.0), Segment(1.0, 1.0 + 1j)])
    nodes = path.nodes(0.3)
    assert 1.0 in nodes
    assert nodes[0] == 0.0 and nodes[-1] == 2.0
    assert np.max(np.diff(nodes)) <= 0.3 + 1e-12


def test_reparametrized_reversal(unit_circle):
    half = Reparametrized(unit_circle, 0.5, 0.0)
    assert half.point(0.0) == pytest.approx(-1.0)
    assert half.point(1.0) == pytest.approx(1.0)
    assert half.derivative(0.0) == pytest.approx(-0.5 * unit_circle.derivative(0.5))


def test_rotated_and_project():
    path = Segment(0.0, 2.0).rotated(math.pi / 2)
    assert path.point(0.5) == pytest.approx(1j)
    assert path.project(0.3 + 1.2j) == pytest.approx(0.6, abs=1e-9)


def test_ushape_is_c1_with_apex_at_origin():
    path = ushape(-math.pi / 3, math.pi / 3, 1.0, 3.0)
    assert path.point(0.0) == pytest.approx(1.0)
    for b in path.breakpoints:
        left = path.derivative(b - 1e-9)
        right = path.derivative(b)
        assert abs(np.angle(right / left)) < 1e-6
    with pytest.raises(ArgumentError):
        ushape(0.5, 1.0, 1.0, 3.0)
