"""Point-membership tests and Monte-Carlo overlap volume estimates.

These share no code with :mod:`rvegen.intersect`; they exist to check the
algebraic predicates independently.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit

from .geom import CylinderInc, SphereInc, as_tuple

SPHERE, CYLINDER = 0, 1


@njit(cache=True, inline="always")
def _next(state):
    state = (state + np.uint64(0x9E3779B97F4A7C15))
    z = (state ^ (state >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
    z = z ^ (z >> np.uint64(31))
    return state, (float(z >> np.uint64(11)) + 0.5) * (1.0 / 9007199254740992.0)


@njit(cache=True)
def inside(kind, c, r, l, x, y, z):
    """Closed membership test; ``l`` is ignored for spheres."""
    dx = x - c[0]
    dy = y - c[1]
    dz = z - c[2]
    if kind == SPHERE:
        return dx * dx + dy * dy + dz * dz <= r * r
    ln2 = l[0] * l[0] + l[1] * l[1] + l[2] * l[2]
    t = dx * l[0] + dy * l[1] + dz * l[2]
    if t * t > ln2 * ln2:
        return False
    # |d x l|^2 / |l|^2 avoids the cancellation of |d|^2 - t^2 / |l|^2
    cx = dy * l[2] - dz * l[1]
    cy = dz * l[0] - dx * l[2]
    cz = dx * l[1] - dy * l[0]
    return cx * cx + cy * cy + cz * cz <= r * r * ln2


@njit(cache=True)
def half_extent(kind, r, l):
    if kind == SPHERE:
        return (r, r, r)
    ln = math.sqrt(l[0] * l[0] + l[1] * l[1] + l[2] * l[2])
    e0 = abs(l[0]) + r * math.sqrt(max(0.0, 1.0 - (l[0] / ln) ** 2))
    e1 = abs(l[1]) + r * math.sqrt(max(0.0, 1.0 - (l[1] / ln) ** 2))
    e2 = abs(l[2]) + r * math.sqrt(max(0.0, 1.0 - (l[2] / ln) ** 2))
    return (e0, e1, e2)


@njit(cache=True)
def k_overlap(ka, ca, ra, la, kb, cb, rb, lb, n, seed):
    """Returns (estimate, standard error) of vol(A ∩ B)."""
    h = half_extent(ka, ra, la)
    vbox = 8.0 * h[0] * h[1] * h[2]
    state = np.uint64(seed) * np.uint64(0xD1B54A32D192ED03) + np.uint64(1)
    hits = 0
    for _ in range(n):
        state, u0 = _next(state)
        state, u1 = _next(state)
        state, u2 = _next(state)
        x = ca[0] + h[0] * (2.0 * u0 - 1.0)
        y = ca[1] + h[1] * (2.0 * u1 - 1.0)
        z = ca[2] + h[2] * (2.0 * u2 - 1.0)
        if inside(ka, ca, ra, la, x, y, z) and inside(kb, cb, rb, lb, x, y, z):
            hits += 1
    p = hits / n
    return vbox * p, vbox * math.sqrt(p * (1.0 - p) / n)


def shape_params(shape):
    if isinstance(shape, SphereInc):
        return SPHERE, as_tuple(shape.center), shape.radius, (0.0, 0.0, 0.0)
    if isinstance(shape, CylinderInc):
        return CYLINDER, as_tuple(shape.center), shape.radius, as_tuple(shape.half_axis)
    raise TypeError(f"unsupported shape {type(shape).__name__}")


def overlap_oracle(a, b, n_samples: int, seed: int = 0) -> tuple[float, float]:
    """Monte-Carlo estimate of vol(a ∩ b) by sampling the bounding box of a.

    Returns ``(estimate, standard_error)``.
    """
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    est, err = k_overlap(*shape_params(a), *shape_params(b), int(n_samples), int(seed))
    return float(est), float(err)


def point_in(shape, p, periodic: bool = False) -> bool:
    """Closed membership of point ``p``; with ``periodic`` the unit-cube
    minimum image of ``p - center`` is used."""
    kind, c, r, l = shape_params(shape)
    p = np.asarray(p, dtype=float)
    if periodic:
        d = p - np.asarray(c)
        d -= np.round(d)
        p = np.asarray(c) + d
    return bool(inside(kind, c, r, l, float(p[0]), float(p[1]), float(p[2])))


def lens_volume(r1: float, r2: float, d: float) -> float:
    """Closed-form volume of the intersection of two balls."""
    if d >= r1 + r2:
        return 0.0
    if d <= abs(r1 - r2):
        return 4.0 / 3.0 * math.pi * min(r1, r2) ** 3
    return (
        math.pi
        * (r1 + r2 - d) ** 2
        * (d * d + 2 * d * (r1 + r2) - 3 * (r1 - r2) ** 2)
        / (12.0 * d)
    )
