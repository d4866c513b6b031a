"""Algebraic intersection tests for spheres, flat-capped cylinders and disks.

Every test both detects and classifies an intersection. The classification
selects the contact force law used by the relaxation dynamics, so the
kernels record the intermediate scalars and points the force laws need.

Kernels are compiled with numba and write fixed-width float64 records into
a caller-supplied ``out`` array; the Python functions below wrap them into
:class:`Contact` objects.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np
from numba import njit

from . import _vec as V
from .geom import CylinderInc, Disk, SphereInc, as_tuple

EPS = V.EPS


class ContactKind(enum.IntEnum):
    SS = 0
    SC1 = 1
    SC2 = 2
    SC3 = 3
    SC4 = 4
    CC1 = 5
    CD1 = 6
    CD2 = 7
    CD3 = 8
    D1 = 9
    D2 = 10


# record layout ---------------------------------------------------------------
KIND, FLIP, LABEL_A, LABEL_B = 0, 1, 2, 3
S0, S1, S2, S3 = 4, 5, 6, 7
P0, P1, P2, P3 = 8, 11, 14, 17
REC = 20
MAX_CC = 9  # one CC1 plus four cylinder-disk and four disk-disk contacts

_SS, _SC1, _SC2, _SC3, _SC4 = 0, 1, 2, 3, 4
_CC1, _CD1, _CD2, _CD3, _D1, _D2 = 5, 6, 7, 8, 9, 10


@njit(cache=True, inline="always")
def _put(out, row, col, v):
    out[row, col] = v[0]
    out[row, col + 1] = v[1]
    out[row, col + 2] = v[2]


@njit(cache=True, inline="always")
def _get(rec, col):
    return (rec[col], rec[col + 1], rec[col + 2])


@njit(cache=True, inline="always")
def _clear(out, row):
    for k in range(REC):
        out[row, k] = 0.0


# --- sphere / sphere --------------------------------------------------------


@njit(cache=True)
def k_sphere_sphere(p1, r1, p2, r2, out, row):
    d = V.norm(V.sub(p1, p2))
    if d >= r1 + r2:
        return 0
    _clear(out, row)
    out[row, KIND] = _SS
    out[row, S0] = d
    out[row, S1] = r1 + r2 - d
    return 1


# --- sphere / cylinder ------------------------------------------------------


@njit(cache=True)
def k_sphere_cylinder(ps, rs, pc, rc, lc, out, row):
    """Sphere against cylinder; the sphere is participant A."""
    ln = V.norm(lc)
    lh = V.scale(lc, 1.0 / ln)
    d = V.sub(ps, pc)
    X = V.dot(d, lh)
    radial = V.sub(d, V.scale(lh, X))
    L = V.norm(radial)
    ax = abs(X)
    kind = -1
    rho_s = 0.0
    if ax > ln + rs:
        if V.norm(d) < rs:
            kind = _SC1
        else:
            return 0
    elif (ax + ln) ** 2 + (L + rc) ** 2 < rs * rs:
        # whole cylinder inside the sphere
        kind = _SC1
    elif ax < ln:
        if L < rs + rc:
            kind = _SC2
        else:
            return 0
    else:
        rho_s = math.sqrt(max(0.0, rs * rs - (ax - ln) ** 2))
        if L < rho_s + rc:
            kind = _SC3 if L < rc else _SC4
        else:
            return 0
    _clear(out, row)
    out[row, KIND] = kind
    out[row, FLIP] = 1.0
    out[row, S0] = X
    out[row, S1] = L
    out[row, S2] = rho_s
    out[row, S3] = ln
    if L > EPS:
        _put(out, row, P0, V.scale(radial, 1.0 / L))
    return 1


# --- disk / disk ------------------------------------------------------------


@njit(cache=True)
def k_disk_disk(p1, r1, n1, p2, r2, n2, out, row, la, lb):
    """Two disks in non-parallel planes; disk 1 belongs to participant A."""
    n = V.cross(n1, n2)
    nn = V.norm(n)
    if nn < EPS:
        return 0
    v = V.cross(n, n1)
    t = V.dot(V.sub(p2, p1), n2) / V.dot(v, n2)
    pt = V.add(p1, V.scale(v, t))
    d1 = V.norm(V.sub(pt, p1))
    d2 = V.norm(V.sub(pt, p2))
    if not (d1 < r1 and d2 < r2):
        # The foot of disk 1's center can miss disk 2 while the two chords
        # on the common line still overlap; test the chords directly.
        if d1 >= r1:
            return 0
        v2 = V.cross(n, n2)
        t2 = V.dot(V.sub(p1, p2), n1) / V.dot(v2, n1)
        q2 = V.add(p2, V.scale(v2, t2))
        e2 = V.norm(V.sub(q2, p2))
        if e2 >= r2:
            return 0
        nh = V.scale(n, 1.0 / nn)
        h1 = math.sqrt(r1 * r1 - d1 * d1)
        h2 = math.sqrt(r2 * r2 - e2 * e2)
        s2 = V.dot(V.sub(q2, pt), nh)
        lo = max(-h1, s2 - h2)
        hi = min(h1, s2 + h2)
        if hi <= lo:
            return 0
        pt = V.add(pt, V.scale(nh, 0.5 * (lo + hi)))
        t = V.dot(V.sub(pt, p1), v) / V.dot(v, v)
        d1 = V.norm(V.sub(pt, p1))
        d2 = V.norm(V.sub(pt, p2))
    _clear(out, row)
    if r1 * r1 - d1 * d1 > r2 * r2 - d2 * d2:
        out[row, KIND] = _D1
    else:
        out[row, KIND] = _D2
        out[row, FLIP] = 1.0
    out[row, LABEL_A] = la
    out[row, LABEL_B] = lb
    out[row, S0] = t
    out[row, S1] = d1
    out[row, S2] = d2
    _put(out, row, P0, pt)
    _put(out, row, P1, n1)
    _put(out, row, P2, n2)
    _put(out, row, P3, v)
    return 1


# --- cylinder / disk --------------------------------------------------------


@njit(cache=True)
def _rim_radial_min(pc, lh, pd, rd, nd):
    """Point of the disk rim closest to the cylinder axis (radial metric)."""
    e1 = V.any_perpendicular(nd)
    e2 = V.cross(nd, e1)
    A = V.sub(pd, pc)
    al = V.dot(A, e1)
    be = V.dot(A, e2)
    mu = V.dot(A, lh)
    l1 = V.dot(e1, lh)
    l2 = V.dot(e2, lh)
    best = 0.0
    fbest = 1e300
    n = 32
    for k in range(n):
        phi = 2.0 * math.pi * k / n
        c = math.cos(phi)
        s = math.sin(phi)
        ax = mu + rd * (l1 * c + l2 * s)
        f = 2.0 * rd * (al * c + be * s) - ax * ax
        if f < fbest:
            fbest = f
            best = phi
    phi = best
    for _ in range(8):
        c = math.cos(phi)
        s = math.sin(phi)
        ax = mu + rd * (l1 * c + l2 * s)
        dax = rd * (-l1 * s + l2 * c)
        g = 2.0 * rd * (-al * s + be * c) - 2.0 * ax * dax
        h = 2.0 * rd * (-al * c - be * s) - 2.0 * dax * dax + 2.0 * ax * rd * (l1 * c + l2 * s)
        if h <= 0.0:
            break
        step = g / h
        phi -= step
        if abs(step) < 1e-14:
            break
    m = V.add(pd, V.scale(V.add(V.scale(e1, math.cos(phi)), V.scale(e2, math.sin(phi))), rd))
    return m


@njit(cache=True)
def k_cylinder_disk(pc, rc, lc, pd, rd, nd, out, row, flip, la, lb):
    """Disk against the lateral face of a cylinder.

    ``flip`` is 0 when the cylinder is participant A of the enclosing pair
    and 1 when it is participant B; ``la``/``lb`` are base labels.
    """
    ln = V.norm(lc)
    lh = V.scale(lc, 1.0 / ln)
    cos_t = V.dot(nd, lh)
    if abs(cos_t) < EPS:
        # disk plane parallel to the axis: use the in-plane trace of the axis
        hgt = V.dot(V.sub(pc, pd), nd)
        if abs(hgt) >= rc:
            return 0
        t = V.dot(V.sub(pd, pc), lc) / (ln * ln)
        a = V.sub(V.add(pc, V.scale(lc, t)), V.scale(nd, hgt))
        radial_a = abs(hgt)
    else:
        t = V.dot(nd, V.sub(pd, pc)) / V.dot(nd, lc)
        a = V.add(pc, V.scale(lc, t))
        radial_a = 0.0
    ad = V.sub(a, pd)
    dpa = V.norm(ad)
    if dpa > EPS:
        u = V.scale(ad, 1.0 / dpa)
    else:
        w = V.sub(lh, V.scale(nd, cos_t))
        wn = V.norm(w)
        if wn > EPS:
            u = V.scale(w, 1.0 / wn)
        else:
            u = V.any_perpendicular(nd)
    ptc = V.add(pd, V.scale(u, rd))
    X = V.dot(V.sub(ptc, pc), lh)
    b = V.add(pc, V.scale(lh, X))
    dbp = V.norm(V.sub(b, ptc))
    kind = -1
    if abs(X) < ln:
        if dpa > rd and dbp < rc:
            kind = _CD1
        elif dpa < rd and dbp < rc:
            kind = _CD2
    if kind < 0 and dpa < rd and abs(t) <= 1.0 and radial_a < rc:
        kind = _CD3
    if kind < 0:
        # A tilted disk can cut the cylinder away from the rim point nearest
        # to ``a``; retry with the rim point nearest to the axis.
        ax_d = V.dot(V.sub(pd, pc), lh)
        rad_d = V.norm(V.sub(V.sub(pd, pc), V.scale(lh, ax_d)))
        if rad_d - rd >= rc or abs(ax_d) - rd >= ln:
            return 0
        m = _rim_radial_min(pc, lh, pd, rd, nd)
        Xm = V.dot(V.sub(m, pc), lh)
        bm = V.add(pc, V.scale(lh, Xm))
        dm = V.norm(V.sub(bm, m))
        if abs(Xm) < ln and dm < rc:
            kind = _CD1
            ptc = m
            X = Xm
            b = bm
            dbp = dm
        else:
            return 0
    _clear(out, row)
    out[row, KIND] = kind
    out[row, FLIP] = flip
    out[row, LABEL_A] = la
    out[row, LABEL_B] = lb
    out[row, S0] = dpa
    out[row, S1] = dbp
    out[row, S2] = X
    out[row, S3] = t
    _put(out, row, P0, a)
    _put(out, row, P1, b)
    _put(out, row, P2, ptc)
    _put(out, row, P3, pd)
    return 1


# --- cylinder / cylinder ----------------------------------------------------


@njit(cache=True)
def _cc_disks(p1, r1, l1, p2, r2, l2, out, start, first_only, with_dd):
    u1 = V.scale(l1, 1.0 / V.norm(l1))
    u2 = V.scale(l2, 1.0 / V.norm(l2))
    mu1 = V.scale(u1, -1.0)
    mu2 = V.scale(u2, -1.0)
    t1 = V.add(p1, l1)
    b1 = V.sub(p1, l1)
    t2 = V.add(p2, l2)
    b2 = V.sub(p2, l2)
    k = start
    k += k_cylinder_disk(p1, r1, l1, t2, r2, u2, out, k, 0.0, 0.0, 1.0)
    if first_only and k > start:
        return k
    k += k_cylinder_disk(p1, r1, l1, b2, r2, mu2, out, k, 0.0, 0.0, -1.0)
    if first_only and k > start:
        return k
    k += k_cylinder_disk(p2, r2, l2, t1, r1, u1, out, k, 1.0, 1.0, 0.0)
    if first_only and k > start:
        return k
    k += k_cylinder_disk(p2, r2, l2, b1, r1, mu1, out, k, 1.0, -1.0, 0.0)
    if first_only and k > start:
        return k
    if with_dd:
        k += k_disk_disk(t1, r1, u1, t2, r2, u2, out, k, 1.0, 1.0)
        if first_only and k > start:
            return k
        k += k_disk_disk(t1, r1, u1, b2, r2, mu2, out, k, 1.0, -1.0)
        if first_only and k > start:
            return k
        k += k_disk_disk(b1, r1, mu1, t2, r2, u2, out, k, -1.0, 1.0)
        if first_only and k > start:
            return k
        k += k_disk_disk(b1, r1, mu1, b2, r2, mu2, out, k, -1.0, -1.0)
    return k


@njit(cache=True)
def k_cylinder_cylinder(p1, r1, l1, p2, r2, l2, out, first_only):
    """All contacts between two cylinders; returns the number of rows written.

    With ``first_only`` the search stops at the first contact found.
    """
    n1n = V.norm(l1)
    n2n = V.norm(l2)
    u1 = V.scale(l1, 1.0 / n1n)
    u2 = V.scale(l2, 1.0 / n2n)
    c = V.cross(l1, l2)
    if V.norm(V.cross(u1, u2)) < EPS:
        d = V.sub(p2, p1)
        s = V.dot(d, u1)
        rv = V.sub(d, V.scale(u1, s))
        rho = V.norm(rv)
        if rho >= r1 + r2:
            return 0
        lo = max(-n1n, s - n2n)
        hi = min(n1n, s + n2n)
        if hi <= lo:
            return 0
        mid = 0.5 * (lo + hi)
        pt1 = V.add(p1, V.scale(u1, mid))
        pt2 = V.add(pt1, rv)
        _clear(out, 0)
        out[0, KIND] = _CC1
        out[0, S0] = rho
        out[0, S1] = mid / n1n
        out[0, S2] = (mid - s) * V.dot(u1, u2) / n2n
        _put(out, 0, P0, pt1)
        _put(out, 0, P1, pt2)
        if rho > EPS:
            _put(out, 0, P2, V.scale(rv, -1.0 / rho))
        else:
            _put(out, 0, P2, V.any_perpendicular(u1))
        if first_only:
            return 1
        return _cc_disks(p1, r1, l1, p2, r2, l2, out, 1, False, False)
    nvec = V.scale(c, 1.0 / V.norm(c))
    rho = abs(V.dot(V.sub(p1, p2), nvec))
    if rho >= r1 + r2:
        return 0
    nn1 = V.cross(nvec, l1)
    nn2 = V.cross(nvec, l2)
    t1 = V.dot(V.sub(p2, p1), nn2) / V.dot(l1, nn2)
    t2 = V.dot(V.sub(p1, p2), nn1) / V.dot(l2, nn1)
    if abs(t1) <= 1.0 and abs(t2) <= 1.0:
        _clear(out, 0)
        out[0, KIND] = _CC1
        out[0, S0] = rho
        out[0, S1] = t1
        out[0, S2] = t2
        _put(out, 0, P0, V.add(p1, V.scale(l1, t1)))
        _put(out, 0, P1, V.add(p2, V.scale(l2, t2)))
        _put(out, 0, P2, nvec)
        return 1
    return _cc_disks(p1, r1, l1, p2, r2, l2, out, 0, first_only, True)


# --- Python API -------------------------------------------------------------

_SCALAR_NAMES = {
    ContactKind.SS: ("distance", "depth"),
    ContactKind.SC1: ("X", "L", "section_radius", "half_length"),
    ContactKind.SC2: ("X", "L", "section_radius", "half_length"),
    ContactKind.SC3: ("X", "L", "section_radius", "half_length"),
    ContactKind.SC4: ("X", "L", "section_radius", "half_length"),
    ContactKind.CC1: ("rho", "t1", "t2"),
    ContactKind.CD1: ("dist_center_axis_point", "dist_rim_axis", "X", "t"),
    ContactKind.CD2: ("dist_center_axis_point", "dist_rim_axis", "X", "t"),
    ContactKind.CD3: ("dist_center_axis_point", "dist_rim_axis", "X", "t"),
    ContactKind.D1: ("t", "dist1", "dist2"),
    ContactKind.D2: ("t", "dist1", "dist2"),
}

_POINT_NAMES = {
    ContactKind.SS: (),
    ContactKind.SC1: ("radial_dir",),
    ContactKind.SC2: ("radial_dir",),
    ContactKind.SC3: ("radial_dir",),
    ContactKind.SC4: ("radial_dir",),
    ContactKind.CC1: ("pt1", "pt2", "n"),
    ContactKind.CD1: ("a", "b", "pt_c", "p_d"),
    ContactKind.CD2: ("a", "b", "pt_c", "p_d"),
    ContactKind.CD3: ("a", "b", "pt_c", "p_d"),
    ContactKind.D1: ("pt", "n1", "n2", "v"),
    ContactKind.D2: ("pt", "n1", "n2", "v"),
}


@dataclass(eq=False)
class Contact:
    """A classified intersection between participants ``a`` and ``b``.

    ``flip`` tells which participant the tabulated force law acts on
    (False: ``a``, True: ``b``); the other one receives the reaction.
    ``shift`` is the lattice translation applied to ``b``.
    """

    kind: ContactKind
    scalars: dict
    points: dict
    a: int = 0
    b: int = 1
    flip: bool = False
    label_a: int = 0
    label_b: int = 0
    shift: tuple = (0, 0, 0)
    record: np.ndarray = field(default=None, repr=False)

    @classmethod
    def from_record(cls, rec, a=0, b=1, shift=(0, 0, 0)) -> Contact:
        kind = ContactKind(int(rec[KIND]))
        scalars = {
            name: float(rec[S0 + i]) for i, name in enumerate(_SCALAR_NAMES[kind])
        }
        points = {
            name: np.array(rec[P0 + 3 * i : P0 + 3 * i + 3])
            for i, name in enumerate(_POINT_NAMES[kind])
        }
        return cls(
            kind=kind,
            scalars=scalars,
            points=points,
            a=a,
            b=b,
            flip=bool(rec[FLIP]),
            label_a=int(rec[LABEL_A]),
            label_b=int(rec[LABEL_B]),
            shift=tuple(int(s) for s in shift),
            record=np.array(rec, dtype=float),
        )


def _scratch(rows=MAX_CC):
    return np.zeros((rows, REC))


def sphere_sphere(s1: SphereInc, s2: SphereInc) -> Contact | None:
    out = _scratch(1)
    if k_sphere_sphere(as_tuple(s1.center), s1.radius, as_tuple(s2.center), s2.radius, out, 0):
        return Contact.from_record(out[0])
    return None


def sphere_cylinder(s: SphereInc, c: CylinderInc) -> Contact | None:
    out = _scratch(1)
    if k_sphere_cylinder(
        as_tuple(s.center), s.radius, as_tuple(c.center), c.radius, as_tuple(c.half_axis), out, 0
    ):
        return Contact.from_record(out[0])
    return None


def disk_disk(d1: Disk, d2: Disk) -> Contact | None:
    out = _scratch(1)
    hit = k_disk_disk(
        as_tuple(d1.center), d1.radius, as_tuple(d1.normal),
        as_tuple(d2.center), d2.radius, as_tuple(d2.normal),
        out, 0, 0.0, 0.0,
    )
    return Contact.from_record(out[0]) if hit else None


def cylinder_disk(c: CylinderInc, d: Disk) -> Contact | None:
    out = _scratch(1)
    hit = k_cylinder_disk(
        as_tuple(c.center), c.radius, as_tuple(c.half_axis),
        as_tuple(d.center), d.radius, as_tuple(d.normal),
        out, 0, 0.0, 0.0, 0.0,
    )
    return Contact.from_record(out[0]) if hit else None


def cylinder_cylinder(c1: CylinderInc, c2: CylinderInc) -> list[Contact]:
    out = _scratch()
    n = k_cylinder_cylinder(
        as_tuple(c1.center), c1.radius, as_tuple(c1.half_axis),
        as_tuple(c2.center), c2.radius, as_tuple(c2.half_axis),
        out, False,
    )
    return [Contact.from_record(out[i]) for i in range(n)]


def contacts(x, y) -> list[Contact]:
    """Dispatch on shape types; always returns a list (possibly empty)."""
    if isinstance(x, SphereInc) and isinstance(y, SphereInc):
        c = sphere_sphere(x, y)
        return [c] if c else []
    if isinstance(x, SphereInc) and isinstance(y, CylinderInc):
        c = sphere_cylinder(x, y)
        return [c] if c else []
    if isinstance(x, CylinderInc) and isinstance(y, SphereInc):
        c = sphere_cylinder(y, x)
        if c is None:
            return []
        c.a, c.b = 1, 0
        return [c]
    if isinstance(x, CylinderInc) and isinstance(y, CylinderInc):
        return cylinder_cylinder(x, y)
    raise TypeError(f"unsupported shapes {type(x).__name__}, {type(y).__name__}")


def any_intersection(x, y) -> bool:
    """Detection only; stops at the first contact found."""
    if isinstance(x, CylinderInc) and isinstance(y, CylinderInc):
        out = _scratch()
        return k_cylinder_cylinder(
            as_tuple(x.center), x.radius, as_tuple(x.half_axis),
            as_tuple(y.center), y.radius, as_tuple(y.half_axis),
            out, True,
        ) > 0
    return bool(contacts(x, y))
