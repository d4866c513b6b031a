"""Linear-elastic repulsive contact forces and their per-inclusion sums.

Every contact carries a force law that acts on one participant (the
cylinder for sphere/cylinder and cylinder/disk contacts, the owner of the
relevant disk for disk/disk contacts); the other participant receives the
opposite force at the same application point.

Potential energy is the sum of squared force norms, one term per contact,
computed before any global force rescaling.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numba import njit

from . import _vec as V
from .geom import CylinderInc, SphereInc, as_tuple
from .intersect import (
    FLIP,
    KIND,
    P0,
    P1,
    P2,
    P3,
    S0,
    S1,
    S2,
    Contact,
    ContactKind,
    _get,
)

EPS = V.EPS

_SS, _SC1, _SC2, _SC3, _SC4 = 0, 1, 2, 3, 4
_CC1, _CD1, _CD2, _CD3, _D1, _D2 = 5, 6, 7, 8, 9, 10


@njit(cache=True, inline="always")
def _unit_or_random(v, key, slot):
    n = V.norm(v)
    if n > EPS:
        return V.scale(v, 1.0 / n)
    return V.random_unit(V.mix_key(key, slot))


@njit(cache=True)
def k_force(rec, pa, ra, la, pb, rb, lb, key):
    """Force on participant A, its application point, and the energy term.

    ``pa``/``pb`` are the participant centers exactly as the contact was
    detected (B already carries its periodic shift); ``la``/``lb`` are the
    half-axes (ignored for spheres). ``key`` seeds the random direction used
    when a force direction is undefined.
    """
    kind = int(rec[KIND])
    flip = rec[FLIP] > 0.5
    # participant the law acts on ("law") and the other one
    if flip:
        pl, rl, ll, po = pb, rb, lb, pa
        ro = ra
    else:
        pl, rl, ll, po = pa, ra, la, pb
        ro = rb
    F = (0.0, 0.0, 0.0)
    pt = pl
    if kind == _SS:
        u = _unit_or_random(V.sub(pa, pb), key, 0)
        depth = rec[S1]
        F = V.scale(u, depth)
        pt = V.add(pb, V.scale(u, rb - 0.5 * depth))
    elif kind == _SC1:
        # law on the cylinder (B), the sphere is A
        ln = V.norm(ll)
        u = _unit_or_random(V.sub(pl, po), key, 1)
        F = V.scale(u, 2.0 * ln)
        pt = pl
    elif kind == _SC2 or kind == _SC3 or kind == _SC4:
        X = rec[S0]
        L = rec[S1]
        rho_s = rec[S2]
        ln = V.norm(ll)
        lh = V.scale(ll, 1.0 / ln)
        if L > EPS:
            rh = _get(rec, P0)
        else:
            rh = V.random_perpendicular(V.mix_key(key, 2), lh)
        foot = V.add(pl, V.scale(lh, X))
        if kind == _SC2:
            delta = math.sqrt(max(0.0, (ro + rl) ** 2 - L * L))
            F = V.scale(rh, -delta)
            pt = V.sub(po, V.scale(rh, ro - delta))
        elif kind == _SC3:
            sgn = 1.0 if X > 0.0 else -1.0
            F = V.scale(lh, -(ln + ro - abs(X)) * sgn)
            pt = V.add(foot, V.scale(rh, L))
        else:
            F = V.scale(rh, -(rho_s + rl - L))
            pt = V.add(foot, V.scale(rh, rl))
    elif kind == _CC1:
        rho = rec[S0]
        p1 = _get(rec, P0)
        p2 = _get(rec, P1)
        d = V.sub(p1, p2)
        if rho > EPS:
            u = V.scale(d, 1.0 / V.norm(d))
        else:
            u = V.scale(_get(rec, P2), V.random_sign(V.mix_key(key, 3)))
        F = V.scale(u, ra + rb - rho)
        pt = V.scale(V.add(p1, p2), 0.5)
    elif kind == _CD1 or kind == _CD2:
        dbp = rec[S1]
        b = _get(rec, P1)
        ptc = _get(rec, P2)
        ln = V.norm(ll)
        lh = V.scale(ll, 1.0 / ln)
        if dbp > EPS:
            w = V.scale(V.sub(b, ptc), 1.0 / dbp)
        else:
            w = V.random_perpendicular(V.mix_key(key, 4), lh)
        if kind == _CD1:
            F = V.scale(w, rl - dbp)
        else:
            F = V.scale(w, -(2.0 * rl - dbp))
        pt = ptc
    elif kind == _CD3:
        a = _get(rec, P0)
        pd = _get(rec, P3)
        u = _unit_or_random(V.sub(pl, pd), key, 5)
        F = V.scale(u, 2.0 * rl)
        pt = a
    elif kind == _D1:
        # disk 1 belongs to A; its normal is stored in P1
        pt = _get(rec, P0)
        F = V.scale(_get(rec, P1), -(rb - rec[S2]))
    elif kind == _D2:
        pt = _get(rec, P0)
        F = V.scale(_get(rec, P2), -(ra - rec[S1]))
    energy = V.dot(F, F)
    if flip:
        F = V.scale(F, -1.0)
    return F, pt, energy


@njit(cache=True)
def k_accumulate(recs, n, ia, ib, cena, cenb, rad, ax, is_cyl, key, force, torque):
    """Add all contact forces into per-inclusion ``force``/``torque`` arrays.

    Contacts are processed in record order, so the reduction is
    deterministic. Returns the potential energy.
    """
    energy = 0.0
    for k in range(n):
        a = ia[k]
        b = ib[k]
        pa = (cena[k, 0], cena[k, 1], cena[k, 2])
        pb = (cenb[k, 0], cenb[k, 1], cenb[k, 2])
        la = (ax[a, 0], ax[a, 1], ax[a, 2])
        lb = (ax[b, 0], ax[b, 1], ax[b, 2])
        F, pt, e = k_force(recs[k], pa, rad[a], la, pb, rad[b], lb, V.mix_key(key, k))
        energy += e
        for c in range(3):
            force[a, c] += F[c]
            force[b, c] -= F[c]
        if is_cyl[a]:
            t = V.cross(V.sub(pt, pa), F)
            for c in range(3):
                torque[a, c] += t[c]
        if is_cyl[b]:
            t = V.cross(V.sub(pt, pb), F)
            for c in range(3):
                torque[b, c] -= t[c]
    return energy


# --- Python API -------------------------------------------------------------


@dataclass
class AppliedForce:
    force: np.ndarray
    application_point: np.ndarray
    on_object: int


@dataclass
class ForceSet:
    entries: list = field(default_factory=list)
    potential_energy: float = 0.0
    force: np.ndarray | None = None
    torque: np.ndarray | None = None


def _params(shape):
    if isinstance(shape, SphereInc):
        return as_tuple(shape.center), shape.radius, (0.0, 0.0, 0.0)
    if isinstance(shape, CylinderInc):
        return as_tuple(shape.center), shape.radius, as_tuple(shape.half_axis)
    raise TypeError(f"unsupported shape {type(shape).__name__}")


def _check_participants(contact: Contact, shape_a, shape_b):
    kind = contact.kind
    cyl_a = isinstance(shape_a, CylinderInc)
    cyl_b = isinstance(shape_b, CylinderInc)
    if kind == ContactKind.SS:
        ok = not cyl_a and not cyl_b
    elif kind in (ContactKind.SC1, ContactKind.SC2, ContactKind.SC3, ContactKind.SC4):
        ok = not cyl_a and cyl_b
    else:
        ok = cyl_a and cyl_b
    if not ok:
        raise ValueError(
            f"contact {kind.name} does not match participants "
            f"{type(shape_a).__name__}, {type(shape_b).__name__}"
        )


def force_for_contact(
    contact: Contact, shape_a, shape_b, key: int = 0
) -> tuple[AppliedForce, AppliedForce]:
    """Action and reaction for one contact.

    ``shape_a``/``shape_b`` are the contact's participants A and B as they
    were passed to the detection routine; ``contact.shift`` is applied to B.
    """
    if contact.record is None:
        raise ValueError("contact has no record")
    _check_participants(contact, shape_a, shape_b)
    pa, ra, la = _params(shape_a)
    pb, rb, lb = _params(shape_b)
    pb = as_tuple(np.asarray(pb) + np.asarray(contact.shift, dtype=float))
    F, pt, _ = k_force(contact.record, pa, ra, la, pb, rb, lb, np.uint64(key))
    F = np.array(F)
    pt = np.array(pt)
    if not (np.all(np.isfinite(F)) and np.all(np.isfinite(pt))):
        raise RuntimeError(f"non-finite force for contact {contact.kind.name}")
    return (
        AppliedForce(F, pt, contact.a),
        AppliedForce(-F, pt.copy(), contact.b),
    )


def accumulate(shapes, contacts, key: int = 0) -> ForceSet:
    """Per-inclusion force and torque sums for ``contacts`` over ``shapes``.

    ``contact.a``/``contact.b`` index into ``shapes``. Torques are taken
    about each cylinder's center (including its periodic shift for B);
    spheres get zero torque.
    """
    n = len(shapes)
    force = np.zeros((n, 3))
    torque = np.zeros((n, 3))
    out = ForceSet(force=force, torque=torque)
    for k, c in enumerate(contacts):
        sa, sb = shapes[c.a], shapes[c.b]
        fa, fb = force_for_contact(c, sa, sb, key=int(V.mix_key(key, k)))
        out.entries += [fa, fb]
        out.potential_energy += float(fa.force @ fa.force)
        force[c.a] += fa.force
        force[c.b] += fb.force
        if isinstance(sa, CylinderInc):
            torque[c.a] += np.cross(fa.application_point - sa.center, fa.force)
        if isinstance(sb, CylinderInc):
            cb = sb.center + np.asarray(c.shift, dtype=float)
            torque[c.b] += np.cross(fb.application_point - cb, fb.force)
    return out
