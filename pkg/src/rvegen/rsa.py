"""Random sequential adsorption of spheres and cylinders in the unit cell.

Inclusions are placed one at a time at uniformly random positions (and, for
cylinders, uniformly random axis directions); a candidate that meets any
inclusion already placed, or its periodic images, is discarded and redrawn.

Candidates come from a counter-based stream: candidate ``k`` of the ``j``-th
object is a pure function of ``(seed, j, k)`` through the splitmix64 mixer,
so a run is reproducible regardless of how the attempts are batched.
"""

from __future__ import annotations

import enum
import math
import time
from dataclasses import asdict, dataclass

import numpy as np
from numba import njit

from . import _vec as V
from .errors import ConfigError, Stagnation
from .geom import CylinderInc, SphereInc
from .periodic import SHIFTS, k_candidate_hits
from .sample import RveSample


class Strategy(str, enum.Enum):
    CYLINDERS_FIRST = "cylinders-first"
    SPHERES_FIRST = "spheres-first"
    INTERLEAVED = "interleaved"


@dataclass
class RsaConfig:
    f_s: float = 0.0
    f_c: float = 0.0
    n_s: int = 0
    n_c: int = 0
    aspect_ratio: float = 3.0
    strategy: Strategy = Strategy.CYLINDERS_FIRST
    seed: int = 0
    max_attempts_per_object: int = 1_000_000
    time_budget: float = 50.0

    def __post_init__(self):
        self.strategy = Strategy(self.strategy)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["strategy"] = self.strategy.value
        return d


def radii_from_fractions(f_s, f_c, n_s, n_c, a) -> tuple[float, float]:
    """Sphere and cylinder radii giving exactly the requested fractions.

    A phase with zero count and zero fraction gets radius 0.
    """
    if n_s == 0 and f_s != 0:
        raise ConfigError(f"f_s = {f_s} requested with n_s = 0")
    if n_c == 0 and f_c != 0:
        raise ConfigError(f"f_c = {f_c} requested with n_c = 0")
    r_s = (3.0 * f_s / (4.0 * math.pi * n_s)) ** (1.0 / 3.0) if n_s else 0.0
    r_c = (f_c / (2.0 * math.pi * a * n_c)) ** (1.0 / 3.0) if n_c else 0.0
    return r_s, r_c


def min_cylinder_count(f_c: float, a: float) -> int:
    """Smallest count for which cylinders of aspect ratio ``a`` filling
    fraction ``f_c`` are shorter than the cell."""
    return math.ceil(4.0 / math.pi * f_c * a * a)


def validate_config(cfg) -> tuple[float, float]:
    """Check the invariants shared by both generators; returns the radii."""
    for name in ("f_s", "f_c"):
        f = getattr(cfg, name)
        if not (math.isfinite(f) and 0.0 <= f < 1.0):
            raise ConfigError(f"{name} must lie in [0, 1), got {f}")
    if cfg.f_s + cfg.f_c >= 1.0:
        raise ConfigError(f"f_s + f_c must be < 1, got {cfg.f_s + cfg.f_c}")
    for name in ("n_s", "n_c"):
        n = getattr(cfg, name)
        if int(n) != n or n < 0:
            raise ConfigError(f"{name} must be a non-negative integer, got {n}")
    if not (math.isfinite(cfg.aspect_ratio) and cfg.aspect_ratio > 0):
        raise ConfigError(f"aspect ratio must be finite and > 0, got {cfg.aspect_ratio}")
    if cfg.n_s > 0 and cfg.f_s == 0:
        raise ConfigError("n_s > 0 requires f_s > 0")
    if cfg.n_c > 0 and cfg.f_c == 0:
        raise ConfigError("n_c > 0 requires f_c > 0")
    r_s, r_c = radii_from_fractions(cfg.f_s, cfg.f_c, cfg.n_s, cfg.n_c, cfg.aspect_ratio)
    if cfg.n_s and 2.0 * r_s >= 1.0:
        raise ConfigError(f"sphere diameter {2 * r_s:.4g} must be < 1 (cell edge)")
    if cfg.n_c:
        need = min_cylinder_count(cfg.f_c, cfg.aspect_ratio)
        if cfg.n_c < need or 2.0 * cfg.aspect_ratio * r_c >= 1.0:
            raise ConfigError(
                f"n_c = {cfg.n_c} too small: cylinders would not fit the cell "
                f"(need n_c >= {need} for f_c = {cfg.f_c}, a = {cfg.aspect_ratio})"
            )
        if 2.0 * r_c >= 1.0:
            raise ConfigError(f"cylinder diameter {2 * r_c:.4g} must be < 1")
    return r_s, r_c


def generation_order(n_s: int, n_c: int, strategy: Strategy) -> list[bool]:
    """Phase of each placement in order; True means cylinder.

    Interleaved keeps the placed proportions of both phases as equal as
    possible, placing a cylinder on ties.
    """
    strategy = Strategy(strategy)
    if strategy is Strategy.CYLINDERS_FIRST:
        return [True] * n_c + [False] * n_s
    if strategy is Strategy.SPHERES_FIRST:
        return [False] * n_s + [True] * n_c
    order = []
    i = j = 0
    while i < n_s or j < n_c:
        if j < n_c and (i >= n_s or j * n_s <= i * n_c):
            order.append(True)
            j += 1
        else:
            order.append(False)
            i += 1
    return order


@njit(cache=True)
def candidate(seed, obj, attempt, is_cyl, half_len):
    """Center and half-axis of candidate ``attempt`` for object ``obj``."""
    key = V.mix_key(V.mix_key(np.uint64(seed), np.uint64(obj)), np.uint64(attempt))
    c = (V._uniform(key, 0), V._uniform(key, 1), V._uniform(key, 2))
    if not is_cyl:
        return c, (0.0, 0.0, 0.0)
    while True:
        # Box-Muller: normalised Gaussian triples are isotropic
        u1 = V._uniform(key, 3)
        u2 = V._uniform(key, 4)
        u3 = V._uniform(key, 5)
        u4 = V._uniform(key, 6)
        m1 = math.sqrt(-2.0 * math.log(u1))
        m2 = math.sqrt(-2.0 * math.log(u3))
        g = (m1 * math.cos(2.0 * math.pi * u2), m1 * math.sin(2.0 * math.pi * u2),
             m2 * math.cos(2.0 * math.pi * u4))
        gn = V.norm(g)
        if gn > 1e-8:
            return c, V.scale(g, half_len / gn)
        key = V.splitmix64(key)


@njit(cache=True)
def k_place(seed, obj, start, stop, is_cyl_c, rc, half_len, bc,
            is_cyl, pos, rad, ax, bound, m, shifts):
    """Try candidates ``start .. stop-1`` for object ``obj`` against the first
    ``m`` placed inclusions. On success stores it at slot ``m`` and returns
    the attempt index; returns -1 otherwise."""
    for k in range(start, stop):
        c, l = candidate(seed, obj, k, is_cyl_c, half_len)
        if not k_candidate_hits(is_cyl_c, c, rc, l, bc, is_cyl, pos, rad, ax, bound, m, shifts):
            for d in range(3):
                pos[m, d] = c[d]
                ax[m, d] = l[d]
            is_cyl[m] = is_cyl_c
            rad[m] = rc
            bound[m] = bc
            return k
    return -1


def generate(config: RsaConfig, chunk: int = 65536) -> RveSample:
    """Place every inclusion or raise :class:`Stagnation`.

    Stagnation is raised once one object exhausts
    ``max_attempts_per_object`` candidates or the run exceeds
    ``time_budget`` seconds.
    """
    r_s, r_c = validate_config(config)
    a = config.aspect_ratio
    order = generation_order(config.n_s, config.n_c, config.strategy)
    n = len(order)
    is_cyl = np.zeros(n, dtype=np.bool_)
    pos = np.zeros((n, 3))
    rad = np.zeros(n)
    ax = np.zeros((n, 3))
    bound = np.zeros(n)
    seed = int(config.seed) & 0xFFFFFFFFFFFFFFFF
    half_c = a * r_c
    t0 = time.perf_counter()
    total_attempts = 0
    for m, cyl in enumerate(order):
        r = r_c if cyl else r_s
        hl = half_c if cyl else 0.0
        bc = math.hypot(r, hl)
        tried = 0
        while True:
            stop = min(config.max_attempts_per_object, tried + chunk)
            k = k_place(seed, m, tried, stop, cyl, r, hl, bc,
                        is_cyl, pos, rad, ax, bound, m, SHIFTS)
            if k >= 0:
                total_attempts += k + 1
                break
            total_attempts += stop - tried
            tried = stop
            elapsed = time.perf_counter() - t0
            if tried >= config.max_attempts_per_object or elapsed > config.time_budget:
                partial = _to_sample(order[:m], pos, rad, ax, config, "RSA")
                placed = {
                    "spheres": len(partial.spheres),
                    "cylinders": len(partial.cylinders),
                }
                why = (
                    f"{tried} attempts" if tried >= config.max_attempts_per_object
                    else f"time budget {config.time_budget} s"
                )
                raise Stagnation(
                    f"stagnated after placing {placed['spheres']}/{config.n_s} spheres and "
                    f"{placed['cylinders']}/{config.n_c} cylinders ({why})",
                    placed=placed, partial=partial, attempts=total_attempts, elapsed=elapsed,
                )
    return _to_sample(order, pos, rad, ax, config, "RSA")


def _to_sample(order, pos, rad, ax, config, provenance) -> RveSample:
    spheres, cylinders = [], []
    for i, cyl in enumerate(order):
        if cyl:
            cylinders.append(CylinderInc(pos[i].copy(), rad[i], ax[i].copy()))
        else:
            spheres.append(SphereInc(pos[i].copy(), rad[i]))
    return RveSample(
        spheres=spheres,
        cylinders=cylinders,
        config=config.to_dict(),
        seed=int(config.seed),
        provenance=provenance,
    )
