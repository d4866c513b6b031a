"""Unit-cube periodic domain: boundary attributes, images and pair sweeps.

An inclusion whose bounding sphere crosses a face of the cell is also
present, translated by a lattice vector, on the opposite side. Contacts are
searched over the 27 neighbouring lattice shifts filtered by bounding
spheres, which is conservative and cannot miss a contact.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np
from numba import njit

from . import _vec as V
from .geom import CylinderInc, SphereInc, as_tuple
from .intersect import (
    MAX_CC,
    REC,
    Contact,
    k_cylinder_cylinder,
    k_sphere_cylinder,
    k_sphere_sphere,
)

SHIFTS = np.array(list(itertools.product((-1, 0, 1), repeat=3)), dtype=np.float64)
_ZERO = 13  # index of (0, 0, 0) in SHIFTS


@dataclass(frozen=True)
class Domain:
    edge: float = 1.0

    def __post_init__(self):
        if self.edge != 1.0:
            raise ValueError("only the unit cell (edge 1) is supported; rescale inputs")


@dataclass(frozen=True)
class BoundaryAttr:
    """Lattice shifts whose translate of the inclusion meets the unit cell."""

    shift_set: frozenset

    def __len__(self):
        return len(self.shift_set)

    @property
    def crosses_boundary(self) -> bool:
        return len(self.shift_set) > 1


def bounding_radius(inc) -> float:
    return float(inc.bounding_radius)


def wrap(p) -> np.ndarray:
    """Map a point into [0, 1)^3."""
    p = np.asarray(p, dtype=float) % 1.0
    # x % 1.0 can round up to exactly 1.0 for tiny negative x
    p[p >= 1.0] = 0.0
    return p


def wrapped(inc):
    """The same inclusion with its center mapped into [0, 1)^3."""
    c = wrap(inc.center)
    if isinstance(inc, SphereInc):
        return SphereInc(c, inc.radius)
    return CylinderInc(c, inc.radius, inc.half_axis)


def boundary_attr(inc, domain: Domain | None = None) -> BoundaryAttr:
    """Shifts ``s`` such that the bounding sphere of ``inc`` moved by ``s``
    touches [0, 1]^3. Always contains (0, 0, 0) for centers in the cell."""
    R = bounding_radius(inc)
    c = np.asarray(inc.center, dtype=float)
    out = set()
    for s in SHIFTS:
        q = c + s
        gap = np.maximum(0.0, np.maximum(-q, q - 1.0))
        if float(gap @ gap) <= R * R:
            out.add(tuple(int(x) for x in s))
    out.add((0, 0, 0))
    return BoundaryAttr(frozenset(out))


def candidate_shifts(attr_a: BoundaryAttr, attr_b: BoundaryAttr) -> list[tuple]:
    """Relative translations of b worth testing against a.

    If an image of ``b`` meets an image of ``a`` then some translate of the
    intersection meets the cell, so both translates lie in the respective
    shift sets; the relative shift is then a difference of members.
    """
    rel = {
        tuple(sb[k] - sa[k] for k in range(3))
        for sa in attr_a.shift_set
        for sb in attr_b.shift_set
    }
    return sorted(s for s in rel if max(abs(x) for x in s) <= 1)


def _is_positive(s) -> bool:
    for x in s:
        if x != 0:
            return x > 0
    return False


def periodic_contacts(a, b, attrs=None, ia: int = 0, ib: int = 1) -> list[Contact]:
    """All contacts between ``a`` and the periodic images of ``b``.

    Passing the same object twice (``a is b`` or ``ia == ib``) checks the
    inclusion against its own images. ``attrs`` optionally supplies the
    precomputed boundary attributes of ``(a, b)``.
    """
    from .intersect import contacts

    attr_a, attr_b = attrs if attrs is not None else (boundary_attr(a), boundary_attr(b))
    self_pair = a is b or ia == ib
    found = []
    for s in candidate_shifts(attr_a, attr_b):
        if self_pair and not _is_positive(s):
            continue
        sv = np.asarray(s, dtype=float)
        bb = b.translated(sv)
        if np.linalg.norm(bb.center - a.center) >= a.bounding_radius + b.bounding_radius:
            continue
        for c in contacts(a, bb):
            # contacts() indexes its two arguments as 0 and 1
            if c.a == 0:
                c.a, c.b, c.shift = ia, ib, s
            else:
                c.a, c.b, c.shift = ib, ia, tuple(-x for x in s)
            found.append(c)
    return found


# --- packed representation and jitted sweeps --------------------------------


@dataclass
class Packed:
    """Struct-of-arrays view of a set of inclusions (spheres first)."""

    is_cyl: np.ndarray
    pos: np.ndarray
    rad: np.ndarray
    ax: np.ndarray
    bound: np.ndarray

    @property
    def n(self) -> int:
        return len(self.rad)


def pack(shapes) -> Packed:
    n = len(shapes)
    is_cyl = np.zeros(n, dtype=np.bool_)
    pos = np.zeros((n, 3))
    rad = np.zeros(n)
    ax = np.zeros((n, 3))
    for i, s in enumerate(shapes):
        pos[i] = s.center
        rad[i] = s.radius
        if isinstance(s, CylinderInc):
            is_cyl[i] = True
            ax[i] = s.half_axis
    bound = np.sqrt(rad**2 + np.sum(ax**2, axis=1))
    return Packed(is_cyl, pos, rad, ax, bound)


@njit(cache=True)
def k_pair(ci, pi, ri, li, cj, pj, rj, lj, scratch, first_only):
    """Contacts between two inclusions; returns (count, swapped).

    When ``swapped`` is true the records treat the second inclusion as
    participant A (sphere/cylinder pairs put the sphere first).
    """
    if not ci and not cj:
        return k_sphere_sphere(pi, ri, pj, rj, scratch, 0), False
    if not ci and cj:
        return k_sphere_cylinder(pi, ri, pj, rj, lj, scratch, 0), False
    if ci and not cj:
        return k_sphere_cylinder(pj, rj, pi, ri, li, scratch, 0), True
    return k_cylinder_cylinder(pi, ri, li, pj, rj, lj, scratch, first_only), False


@njit(cache=True)
def k_sweep(is_cyl, pos, rad, ax, bound, shifts, recs, ia, ib, cena, cenb, shift_out):
    """Every periodic contact of a population.

    Writes up to ``len(recs)`` contacts and returns the total number found;
    if that exceeds the capacity the caller must retry with larger buffers.
    Pairs are visited in (i, j, shift) order so output order is fixed.
    """
    n = rad.shape[0]
    cap = recs.shape[0]
    scratch = np.zeros((MAX_CC, REC))
    count = 0
    for i in range(n):
        pi = (pos[i, 0], pos[i, 1], pos[i, 2])
        li = (ax[i, 0], ax[i, 1], ax[i, 2])
        for j in range(i, n):
            lj = (ax[j, 0], ax[j, 1], ax[j, 2])
            reach = bound[i] + bound[j]
            for si in range(shifts.shape[0]):
                s = (shifts[si, 0], shifts[si, 1], shifts[si, 2])
                if j == i:
                    # each self-image pair once: lexicographically positive shift
                    if s[0] < 0.0 or (s[0] == 0.0 and (s[1] < 0.0 or (s[1] == 0.0 and s[2] <= 0.0))):
                        continue
                pj = (pos[j, 0] + s[0], pos[j, 1] + s[1], pos[j, 2] + s[2])
                if V.norm(V.sub(pj, pi)) >= reach:
                    continue
                m, swapped = k_pair(is_cyl[i], pi, rad[i], li, is_cyl[j], pj, rad[j], lj, scratch, False)
                for r in range(m):
                    if count < cap:
                        recs[count, :] = scratch[r, :]
                        if swapped:
                            # sphere j is A; express the shift on B = i
                            ia[count] = j
                            ib[count] = i
                            for c in range(3):
                                cena[count, c] = pos[j, c]
                                cenb[count, c] = pos[i, c] - s[c]
                                shift_out[count, c] = -s[c]
                        else:
                            ia[count] = i
                            ib[count] = j
                            for c in range(3):
                                cena[count, c] = pi[c]
                                cenb[count, c] = pj[c]
                                shift_out[count, c] = s[c]
                    count += 1
    return count


@njit(cache=True)
def k_candidate_hits(c_cyl, pc, rc, lc, bc, is_cyl, pos, rad, ax, bound, m, shifts):
    """True if a candidate meets any of the first ``m`` inclusions or its own
    periodic images. Stops at the first contact."""
    scratch = np.zeros((MAX_CC, REC))
    for j in range(m):
        lj = (ax[j, 0], ax[j, 1], ax[j, 2])
        reach = bc + bound[j]
        for si in range(shifts.shape[0]):
            pj = (pos[j, 0] + shifts[si, 0], pos[j, 1] + shifts[si, 1], pos[j, 2] + shifts[si, 2])
            if V.norm(V.sub(pj, pc)) >= reach:
                continue
            k, _ = k_pair(c_cyl, pc, rc, lc, is_cyl[j], pj, rad[j], lj, scratch, True)
            if k > 0:
                return True
    if 2.0 * bc > 1.0:
        for si in range(shifts.shape[0]):
            if si == _ZERO:
                continue
            pj = (pc[0] + shifts[si, 0], pc[1] + shifts[si, 1], pc[2] + shifts[si, 2])
            k, _ = k_pair(c_cyl, pc, rc, lc, c_cyl, pj, rc, lc, scratch, True)
            if k > 0:
                return True
    return False


@dataclass
class SweepResult:
    """Contacts of a whole population in packed form."""

    n: int
    recs: np.ndarray
    ia: np.ndarray
    ib: np.ndarray
    cena: np.ndarray
    cenb: np.ndarray
    shift: np.ndarray

    def contacts(self) -> list[Contact]:
        return [
            Contact.from_record(
                self.recs[k], a=int(self.ia[k]), b=int(self.ib[k]), shift=self.shift[k]
            )
            for k in range(self.n)
        ]


def sweep_packed(p: Packed, capacity: int = 64) -> SweepResult:
    cap = max(1, capacity)
    while True:
        recs = np.zeros((cap, REC))
        ia = np.zeros(cap, dtype=np.int64)
        ib = np.zeros(cap, dtype=np.int64)
        cena = np.zeros((cap, 3))
        cenb = np.zeros((cap, 3))
        sh = np.zeros((cap, 3))
        n = k_sweep(p.is_cyl, p.pos, p.rad, p.ax, p.bound, SHIFTS, recs, ia, ib, cena, cenb, sh)
        if n <= cap:
            return SweepResult(n, recs[:n], ia[:n], ib[:n], cena[:n], cenb[:n], sh[:n])
        cap = n


def all_contacts(shapes) -> list[Contact]:
    """Full periodic O(n^2) contact sweep; ``a``/``b`` index ``shapes``."""
    if len(shapes) == 0:
        return []
    return sweep_packed(pack(shapes)).contacts()


def candidate_hits(shape, packed: Packed, m: int | None = None) -> bool:
    """Detection-only test of one inclusion against a packed population."""
    m = packed.n if m is None else m
    is_cyl = isinstance(shape, CylinderInc)
    lc = as_tuple(shape.half_axis) if is_cyl else (0.0, 0.0, 0.0)
    return bool(
        k_candidate_hits(
            is_cyl, as_tuple(shape.center), shape.radius, lc, shape.bounding_radius,
            packed.is_cyl, packed.pos, packed.rad, packed.ax, packed.bound, m, SHIFTS,
        )
    )
