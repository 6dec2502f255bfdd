import math

import pytest

from services.geometry.curves import Arc, Segment
from services.geometry.fibration import TransportOptions
from services.geometry.lagrangians import FiberedLagrangian, make_fiber
from services.geometry.models import make_model


@pytest.fixture
def conic():
    return make_model("conic")


@pytest.fixture
def trivial():
    return make_model("trivial_line")


@pytest.fixture
def options():
    return TransportOptions.from_config()


@pytest.fixture
def unit_circle():
    return Arc(0.0, 1.0, 0.0, 2.0 * math.pi)


@pytest.fixture
def circle_over_segment(conic, options):
    """Circle-fibered Lagrangian over the vertical segment 1.5 → 1.5 + 2i."""
    curve = Segment(1.5, 1.5 + 2j)
    return FiberedLagrangian(conic, curve, make_fiber(conic, "circle", 1.5), options, name="C", warm=False)
