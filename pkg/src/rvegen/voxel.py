"""Periodic voxel rendering of samples and volume measurements.

Each voxel takes the material id of the inclusion containing its center
(closed boundaries, periodic wrap). Grids are indexed ``data[ix, iy, iz]``;
the RAW export writes them x-fastest, one byte per voxel, next to a JSON
header.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from numba import njit

from . import _vec as V
from .oracle import CYLINDER, SPHERE, half_extent, inside, k_overlap, point_in
from .periodic import SHIFTS, pack
from .sample import RveSample

MATRIX, SPHERE_PHASE, CYLINDER_PHASE = 0, 1, 2
LEGEND = {MATRIX: "matrix", SPHERE_PHASE: "sphere", CYLINDER_PHASE: "cylinder"}

__all__ = [
    "LEGEND",
    "VoxelGrid",
    "point_in",
    "voxelize",
    "volume_fraction",
    "total_overlap_mc",
    "write_raw",
    "read_raw",
    "write_fractions_csv",
]


@dataclass
class VoxelGrid:
    resolution: int
    data: np.ndarray
    legend: dict = field(default_factory=lambda: dict(LEGEND))
    provenance: str = ""
    seed: int | None = None

    def __post_init__(self):
        n = self.resolution
        if self.data.shape != (n, n, n):
            raise ValueError(f"data shape {self.data.shape} does not match resolution {n}")
        ids = np.unique(self.data)
        if not set(int(i) for i in ids) <= set(self.legend):
            raise ValueError(f"material ids {ids.tolist()} not all in legend {self.legend}")

    def fractions(self) -> dict[str, float]:
        return {name: volume_fraction(self, mid) for mid, name in self.legend.items()}

    def header(self) -> dict:
        return {
            "resolution": self.resolution,
            "legend": {str(k): v for k, v in self.legend.items()},
            "provenance": self.provenance,
            "seed": self.seed,
            "order": "x-fastest",
            "dtype": "uint8",
        }


@njit(cache=True)
def _stamp(data, res, kind, c, r, l, mid):
    """Paint every voxel whose center lies in the inclusion (periodic)."""
    h = half_extent(kind, r, l)
    inv = 1.0 / res
    lo = np.empty(3, np.int64)
    hi = np.empty(3, np.int64)
    for d in range(3):
        lo[d] = int(math.floor((c[d] - h[d]) * res - 0.5)) - 1
        hi[d] = int(math.ceil((c[d] + h[d]) * res - 0.5)) + 1
        # never visit a wrapped voxel twice
        if hi[d] - lo[d] + 1 > res:
            lo[d] = 0
            hi[d] = res - 1
    for i in range(lo[0], hi[0] + 1):
        ii = i % res
        x = (ii + 0.5) * inv - c[0]
        x -= round(x)
        for j in range(lo[1], hi[1] + 1):
            jj = j % res
            y = (jj + 0.5) * inv - c[1]
            y -= round(y)
            for k in range(lo[2], hi[2] + 1):
                kk = k % res
                z = (kk + 0.5) * inv - c[2]
                z -= round(z)
                if inside(kind, (0.0, 0.0, 0.0), r, l, x, y, z):
                    data[ii, jj, kk] = mid


@njit(cache=True)
def _render(res, is_cyl, pos, rad, ax):
    data = np.zeros((res, res, res), np.uint8)
    # spheres first so that cylinders win any contested voxel
    for phase in range(2):
        for n in range(len(rad)):
            if is_cyl[n] != (phase == 1):
                continue
            c = (pos[n, 0], pos[n, 1], pos[n, 2])
            l = (ax[n, 0], ax[n, 1], ax[n, 2])
            kind = CYLINDER if is_cyl[n] else SPHERE
            mid = CYLINDER_PHASE if is_cyl[n] else SPHERE_PHASE
            _stamp(data, res, kind, c, rad[n], l, mid)
    return data


def voxelize(sample: RveSample, resolution: int) -> VoxelGrid:
    """Material ids at voxel centers; cylinders override spheres."""
    resolution = int(resolution)
    if resolution < 1:
        raise ValueError(f"resolution must be >= 1, got {resolution}")
    p = pack(sample.shapes)
    data = _render(resolution, p.is_cyl, p.pos, p.rad, p.ax)
    return VoxelGrid(resolution, data, dict(LEGEND), sample.provenance, sample.seed)


def volume_fraction(grid: VoxelGrid, phase_id: int) -> float:
    return float(np.count_nonzero(grid.data == phase_id)) / grid.data.size


@njit(cache=True)
def _overlap_sum(is_cyl, pos, rad, ax, bound, shifts, n_points, seed):
    total = 0.0
    var = 0.0
    m = len(rad)
    pair = 0
    for i in range(m):
        ki = CYLINDER if is_cyl[i] else SPHERE
        ci = (pos[i, 0], pos[i, 1], pos[i, 2])
        li = (ax[i, 0], ax[i, 1], ax[i, 2])
        for j in range(i, m):
            kj = CYLINDER if is_cyl[j] else SPHERE
            lj = (ax[j, 0], ax[j, 1], ax[j, 2])
            for s in range(shifts.shape[0]):
                sx, sy, sz = shifts[s, 0], shifts[s, 1], shifts[s, 2]
                if j == i:
                    # each self-image pair once: lexicographically positive shifts
                    if not (sx > 0 or (sx == 0 and (sy > 0 or (sy == 0 and sz > 0)))):
                        continue
                cj = (pos[j, 0] + sx, pos[j, 1] + sy, pos[j, 2] + sz)
                if V.norm(V.sub(cj, ci)) > bound[i] + bound[j]:
                    continue
                key = V.mix_key(np.uint64(seed), np.uint64(pair))
                pair += 1
                est, err = k_overlap(ki, ci, rad[i], li, kj, cj, rad[j], lj, n_points, key)
                total += est
                var += err * err
    return total, math.sqrt(var)


def total_overlap_mc(sample: RveSample, n_points: int, seed: int = 0) -> tuple[float, float]:
    """Monte-Carlo estimate of the summed pairwise intersection volume.

    Every pair of inclusions (and every inclusion with its own periodic
    images) whose bounding spheres meet is sampled with ``n_points`` points
    drawn in the bounding box of the first member. Returns the estimate and
    its standard error.
    """
    if n_points < 1:
        raise ValueError(f"n_points must be >= 1, got {n_points}")
    p = pack(sample.shapes)
    if p.n == 0:
        return 0.0, 0.0
    est, err = _overlap_sum(p.is_cyl, p.pos, p.rad, p.ax, p.bound, SHIFTS,
                            int(n_points), np.uint64(int(seed) & 0xFFFFFFFFFFFFFFFF))
    return float(est), float(err)


def write_raw(grid: VoxelGrid, path) -> Path:
    """Writes the RAW bytes to ``path`` and the header to ``path + .json``."""
    path = Path(path)
    path.write_bytes(np.ascontiguousarray(grid.data.transpose(2, 1, 0)).tobytes())
    header = path.with_name(path.name + ".json")
    header.write_text(json.dumps(grid.header(), indent=2) + "\n")
    return header


def read_raw(path) -> VoxelGrid:
    path = Path(path)
    header = json.loads(path.with_name(path.name + ".json").read_text())
    n = int(header["resolution"])
    raw = np.frombuffer(path.read_bytes(), dtype=np.uint8)
    if raw.size != n**3:
        raise ValueError(f"{path}: expected {n**3} bytes, found {raw.size}")
    data = raw.reshape(n, n, n).transpose(2, 1, 0).copy()
    legend = {int(k): v for k, v in header["legend"].items()}
    return VoxelGrid(n, data, legend, header.get("provenance", ""), header.get("seed"))


def write_fractions_csv(grid: VoxelGrid, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["phase_id", "phase", "fraction"])
        for mid, name in sorted(grid.legend.items()):
            w.writerow([mid, name, repr(volume_fraction(grid, mid))])
