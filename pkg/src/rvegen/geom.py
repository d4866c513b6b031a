"""Shape primitives shared by every module: spheres, cylinders, disks.

Vectors are plain ``numpy`` arrays of shape ``(3,)``. Lengths are measured in
units of the RVE edge, which is always 1.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

EPS = 1e-10


def vec3(x, y=None, z=None) -> np.ndarray:
    """Build a finite float64 3-vector from three scalars or one sequence."""
    if y is None and z is None:
        v = np.asarray(x, dtype=float).reshape(-1)
    else:
        v = np.array([x, y, z], dtype=float)
    if v.shape != (3,):
        raise ValueError(f"expected 3 components, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise ValueError(f"non-finite vector component in {v}")
    return v


def dot(u, v) -> float:
    return float(u[0] * v[0] + u[1] * v[1] + u[2] * v[2])


def cross(u, v) -> np.ndarray:
    return np.array(
        [
            u[1] * v[2] - u[2] * v[1],
            u[2] * v[0] - u[0] * v[2],
            u[0] * v[1] - u[1] * v[0],
        ]
    )


def norm(u) -> float:
    return float(np.sqrt(dot(u, u)))


def _positive(name: str, value: float) -> float:
    value = float(value)
    if not np.isfinite(value) or value <= 0.0:
        raise ValueError(f"{name} must be finite and > 0, got {value}")
    return value


@dataclass(frozen=True, eq=False)
class SphereInc:
    center: np.ndarray
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "center", vec3(self.center))
        object.__setattr__(self, "radius", _positive("radius", self.radius))

    @property
    def bounding_radius(self) -> float:
        return self.radius

    @property
    def volume(self) -> float:
        return 4.0 / 3.0 * np.pi * self.radius**3

    def translated(self, shift) -> SphereInc:
        return SphereInc(self.center + np.asarray(shift, dtype=float), self.radius)


@dataclass(frozen=True, eq=False)
class CylinderInc:
    """Flat-capped cylinder; ``half_axis`` runs from the center to one cap."""

    center: np.ndarray
    radius: float
    half_axis: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "center", vec3(self.center))
        object.__setattr__(self, "radius", _positive("radius", self.radius))
        h = vec3(self.half_axis)
        if norm(h) < EPS:
            raise ValueError("cylinder half_axis is (numerically) null")
        object.__setattr__(self, "half_axis", h)

    @property
    def half_length(self) -> float:
        return norm(self.half_axis)

    @property
    def aspect_ratio(self) -> float:
        return self.half_length / self.radius

    @property
    def bounding_radius(self) -> float:
        return float(np.hypot(self.radius, self.half_length))

    @property
    def volume(self) -> float:
        return 2.0 * np.pi * self.radius**2 * self.half_length

    def translated(self, shift) -> CylinderInc:
        return CylinderInc(
            self.center + np.asarray(shift, dtype=float), self.radius, self.half_axis
        )


@dataclass(frozen=True, eq=False)
class Disk:
    center: np.ndarray
    radius: float
    normal: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "center", vec3(self.center))
        object.__setattr__(self, "radius", _positive("radius", self.radius))
        n = vec3(self.normal)
        if abs(norm(n) - 1.0) > 1e-12:
            raise ValueError(f"disk normal must be a unit vector, |n| = {norm(n)}")
        object.__setattr__(self, "normal", n)


def cylinder_bases(c: CylinderInc) -> tuple[Disk, Disk]:
    """Top (center + half_axis) and bottom base disks with outward normals."""
    n = c.half_axis / c.half_length
    return (
        Disk(c.center + c.half_axis, c.radius, n),
        Disk(c.center - c.half_axis, c.radius, -n),
    )


def as_tuple(v) -> tuple[float, float, float]:
    return (float(v[0]), float(v[1]), float(v[2]))
