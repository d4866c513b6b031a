"""Tuple-based 3-vector helpers compiled with numba.

Hot loops pass positions around as ``(x, y, z)`` float tuples so that no
heap allocation happens inside the jitted kernels.
"""

import math

import numpy as np
from numba import njit

EPS = 1e-10


@njit(cache=True, inline="always")
def add(a, b):
    return (a[0] + b[0], a[1] + b[1], a[2] + b[2])


@njit(cache=True, inline="always")
def sub(a, b):
    return (a[0] - b[0], a[1] - b[1], a[2] - b[2])


@njit(cache=True, inline="always")
def scale(a, s):
    return (a[0] * s, a[1] * s, a[2] * s)


@njit(cache=True, inline="always")
def dot(a, b):
    return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]


@njit(cache=True, inline="always")
def cross(a, b):
    return (
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    )


@njit(cache=True, inline="always")
def norm(a):
    return math.sqrt(a[0] * a[0] + a[1] * a[1] + a[2] * a[2])


@njit(cache=True)
def any_perpendicular(u):
    """Deterministic unit vector orthogonal to ``u`` (``u`` need not be unit)."""
    ax, ay, az = abs(u[0]), abs(u[1]), abs(u[2])
    if ax <= ay and ax <= az:
        e = (1.0, 0.0, 0.0)
    elif ay <= az:
        e = (0.0, 1.0, 0.0)
    else:
        e = (0.0, 0.0, 1.0)
    p = cross(u, e)
    return scale(p, 1.0 / norm(p))


# --- counter-based random directions ---------------------------------------
# splitmix64 finaliser over uint64; a (key, counter) pair maps to a fixed
# value, so degenerate-direction draws do not depend on call order.


@njit(cache=True)
def splitmix64(x):
    x = np.uint64(x) + np.uint64(0x9E3779B97F4A7C15)
    z = (x ^ (x >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
    return z ^ (z >> np.uint64(31))


@njit(cache=True)
def mix_key(a, b):
    return splitmix64(np.uint64(a) ^ (np.uint64(b) * np.uint64(0x9E3779B97F4A7C15)))


@njit(cache=True)
def _uniform(key, i):
    h = mix_key(key, i)
    return (float(h >> np.uint64(11)) + 0.5) * (1.0 / 9007199254740992.0)


@njit(cache=True)
def random_unit(key):
    """Uniform direction on the unit sphere derived from an integer key."""
    z = 2.0 * _uniform(key, 1) - 1.0
    phi = 2.0 * math.pi * _uniform(key, 2)
    s = math.sqrt(max(0.0, 1.0 - z * z))
    return (s * math.cos(phi), s * math.sin(phi), z)


@njit(cache=True)
def random_perpendicular(key, u):
    """Uniform unit vector in the plane orthogonal to ``u``."""
    e1 = any_perpendicular(u)
    un = scale(u, 1.0 / norm(u))
    e2 = cross(un, e1)
    phi = 2.0 * math.pi * _uniform(key, 3)
    return add(scale(e1, math.cos(phi)), scale(e2, math.sin(phi)))


@njit(cache=True)
def random_sign(key):
    return 1.0 if _uniform(key, 4) < 0.5 else -1.0
