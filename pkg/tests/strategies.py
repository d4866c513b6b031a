"""Hypothesis strategies for shapes."""

import numpy as np
from hypothesis import assume
from hypothesis import strategies as st

from rvegen.geom import CylinderInc, SphereInc

coord = st.floats(-2.0, 2.0, allow_nan=False)
radius = st.floats(0.05, 1.0, allow_nan=False)
point = st.tuples(coord, coord, coord).map(np.array)


@st.composite
def unit_vectors(draw):
    v = np.array(draw(st.tuples(coord, coord, coord)))
    n = np.linalg.norm(v)
    assume(n > 1e-3)
    return v / n


@st.composite
def spheres(draw):
    return SphereInc(draw(point), draw(radius))


@st.composite
def cylinders(draw):
    u = draw(unit_vectors())
    return CylinderInc(draw(point), draw(radius), u * draw(st.floats(0.05, 1.5)))


shapes = st.one_of(spheres(), cylinders())


@st.composite
def close_pairs(draw, first=shapes, second=shapes):
    """Two shapes whose centers are within the sum of bounding radii."""
    a = draw(first)
    b = draw(second)
    d = draw(unit_vectors()) * draw(st.floats(0.0, 1.0)) * (a.bounding_radius + b.bounding_radius)
    return a, b.translated(a.center + d - b.center)
