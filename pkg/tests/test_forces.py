import numpy as np
import pytest
from hypothesis import given

from rvegen.forces import accumulate, force_for_contact
from rvegen.geom import CylinderInc, SphereInc
from rvegen.intersect import ContactKind as K, contacts
from strategies import close_pairs, cylinders, spheres

CENTER_RELATIVE = {K.SS, K.SC1, K.SC2, K.SC3, K.SC4, K.CC1}
DISK_RELATIVE = {K.CD2, K.CD3}


def _pair_forces(a, b):
    shapes = [a, b]
    for c in contacts(a, b):
        yield c, force_for_contact(c, shapes[c.a], shapes[c.b])


def test_sphere_sphere_pushes_apart():
    a, b = SphereInc((0, 0, 0), 1), SphereInc((1.5, 0, 0), 1)
    (c, (fa, fb)), = _pair_forces(a, b)
    assert np.allclose(fa.force, (-0.5, 0, 0), atol=1e-12)
    assert np.allclose(fb.force, (0.5, 0, 0), atol=1e-12)


def test_crossed_cylinders_force_at_midpoint():
    c1 = CylinderInc((0, 0, 0), 0.5, (0, 0, 1))
    c2 = CylinderInc((0.8, 0, 0), 0.5, (0, 1, 0))
    (c, (f1, f2)), = _pair_forces(c1, c2)
    assert f1.on_object == 0
    assert np.allclose(f1.force, (-0.2, 0, 0), atol=1e-9)
    assert np.allclose(f1.application_point, (0.4, 0, 0), atol=1e-9)


def test_lateral_sphere_cylinder_magnitude():
    s = SphereInc((2, 0, 0), 1.0)
    cyl = CylinderInc((0, 0, 0), 1.5, (0, 0, 2))
    (c, (fs, fc)), = _pair_forces(s, cyl)
    assert c.kind is K.SC2
    assert np.linalg.norm(fc.force) == pytest.approx(1.5, abs=1e-9)
    assert fc.force[0] < 0  # the cylinder is pushed away from the sphere


def test_energy_sums_squared_norms():
    shapes = [SphereInc((0, 0, 0), 1), SphereInc((1.5, 0, 0), 1)]
    fs = accumulate(shapes, contacts(*shapes))
    assert fs.potential_energy == pytest.approx(0.25)
    assert accumulate(shapes, []).potential_energy == 0.0
    c1 = CylinderInc((5, 0, 0), 0.5, (0, 0, 1))
    c2 = CylinderInc((5.8, 0, 0), 0.5, (0, 1, 0))
    shapes += [c1, c2]
    found = contacts(shapes[0], shapes[1])
    for c in contacts(c1, c2):
        c.a, c.b = c.a + 2, c.b + 2
        found.append(c)
    assert accumulate(shapes, found).potential_energy == pytest.approx(0.29)


def test_mismatched_participants_are_rejected():
    a, b = SphereInc((0, 0, 0), 1), SphereInc((1.5, 0, 0), 1)
    (c,) = contacts(a, b)
    with pytest.raises(ValueError):
        force_for_contact(c, a, CylinderInc((0, 0, 0), 1, (0, 0, 1)))


@given(close_pairs())
def test_action_equals_reaction(pair):
    for _, (fa, fb) in _pair_forces(*pair):
        assert np.array_equal(fa.force, -fb.force)
        assert np.array_equal(fa.application_point, fb.application_point)
        assert np.all(np.isfinite(fa.force))


@given(close_pairs())
def test_net_force_on_an_isolated_pair_vanishes(pair):
    fs = accumulate(list(pair), contacts(*pair))
    assert np.allclose(fs.force.sum(axis=0), 0, atol=1e-12)


@given(close_pairs())
def test_forces_are_repulsive(pair):
    shapes = list(pair)
    for c, (fa, fb) in _pair_forces(*pair):
        law = fb if c.flip else fa
        other = fa if c.flip else fb
        if c.kind in CENTER_RELATIVE:
            sep = shapes[law.on_object].center - shapes[other.on_object].center
        elif c.kind in DISK_RELATIVE:
            sep = shapes[law.on_object].center - c.points["p_d"]
        else:
            continue
        assert np.dot(law.force, sep) >= -1e-12 * (1 + np.linalg.norm(law.force))


@given(close_pairs(spheres(), cylinders()))
def test_sphere_torque_is_zero(pair):
    fs = accumulate(list(pair), contacts(*pair))
    assert np.array_equal(fs.torque[0], np.zeros(3))
