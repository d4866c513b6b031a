import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from rvegen.geom import CylinderInc, SphereInc
from rvegen.oracle import lens_volume
from rvegen.rsa import RsaConfig, generate
from rvegen.sample import RveSample
from rvegen.voxel import (
    VoxelGrid,
    read_raw,
    total_overlap_mc,
    volume_fraction,
    voxelize,
    write_fractions_csv,
    write_raw,
)


def _sample(spheres=(), cylinders=()):
    return RveSample(list(spheres), list(cylinders), {}, 0, "RSA")


def test_centered_sphere_fraction():
    g = voxelize(_sample([SphereInc((0.5, 0.5, 0.5), 0.3)]), 128)
    assert volume_fraction(g, 1) == pytest.approx(4 / 3 * math.pi * 0.027, rel=0.01)
    assert volume_fraction(g, 2) == 0


def test_empty_sample():
    g = voxelize(_sample(), 16)
    assert g.data.shape == (16, 16, 16) and not g.data.any()


def test_single_voxel():
    assert voxelize(_sample([SphereInc((0.5, 0.5, 0.5), 0.01)]), 1).data[0, 0, 0] == 1
    assert voxelize(_sample([SphereInc((0.1, 0.1, 0.1), 0.01)]), 1).data[0, 0, 0] == 0


def test_synthetic_fraction():
    data = np.zeros((4, 4, 4), np.uint8)
    data[:2] = 1
    g = VoxelGrid(4, data)
    assert volume_fraction(g, 1) == 0.5 and volume_fraction(g, 2) == 0


def test_grid_validation():
    with pytest.raises(ValueError):
        VoxelGrid(4, np.zeros((4, 4, 3), np.uint8))
    with pytest.raises(ValueError):
        VoxelGrid(2, np.full((2, 2, 2), 7, np.uint8))
    with pytest.raises(ValueError):
        voxelize(_sample(), 0)


def test_cylinders_win_contested_voxels():
    s = _sample([SphereInc((0.5, 0.5, 0.5), 0.2)], [CylinderInc((0.5, 0.5, 0.5), 0.1, (0, 0, 0.1))])
    g = voxelize(s, 32)
    assert g.data[16, 16, 16] == 2


def test_periodic_wrap():
    g = voxelize(_sample([SphereInc((0.0, 0.0, 0.0), 0.2)]), 20)
    assert g.data[0, 0, 0] == g.data[-1, -1, -1] == 1


@settings(max_examples=15)
@given(st.tuples(*[st.floats(0, 1, exclude_max=True)] * 3), st.floats(0.05, 0.3),
       st.sampled_from([16, 32, 64]))
def test_fraction_error_bound(c, r, res):
    g = voxelize(_sample([SphereInc(c, r)]), res)
    assert abs(volume_fraction(g, 1) - 4 / 3 * math.pi * r**3) <= 3 / res


@settings(max_examples=10)
@given(st.integers(0, 2**31), st.tuples(*[st.integers(0, 31)] * 3))
def test_lattice_shift_rotates_the_grid(seed, k):
    s = generate(RsaConfig(f_s=0.1, f_c=0.1, n_s=8, n_c=8, seed=seed))
    a = voxelize(s, 32)
    b = voxelize(s.translated(np.array(k) / 32), 32)
    assert np.array_equal(np.roll(a.data, k, axis=(0, 1, 2)), b.data)


def test_raw_round_trip(tmp_path):
    s = _sample([SphereInc((0.2, 0.5, 0.5), 0.1)], [CylinderInc((0.7, 0.3, 0.5), 0.05, (0, 0.1, 0.1))])
    g = voxelize(s, 24)
    header = write_raw(g, tmp_path / "g.raw")
    raw = (tmp_path / "g.raw").read_bytes()
    assert len(raw) == 24**3
    # x runs fastest in the file
    i, j, k = np.argwhere(g.data == 2)[0]
    assert raw[i + 24 * j + 24 * 24 * k] == 2
    h = json.loads(header.read_text())
    assert h["resolution"] == 24 and h["legend"] == {"0": "matrix", "1": "sphere", "2": "cylinder"}
    assert {"provenance", "seed"} <= set(h)
    assert np.array_equal(read_raw(tmp_path / "g.raw").data, g.data)
    write_fractions_csv(g, tmp_path / "f.csv")
    assert (tmp_path / "f.csv").read_text().startswith("phase_id,phase,fraction")


def test_overlap_of_a_valid_sample_is_zero():
    s = generate(RsaConfig(f_s=0.1, f_c=0.1, n_s=10, n_c=10, seed=0))
    assert total_overlap_mc(s, 20_000, seed=1) == (0.0, 0.0)


def test_overlap_of_coincident_spheres():
    s = _sample([SphereInc((0.5, 0.5, 0.5), 0.2), SphereInc((0.5, 0.5, 0.5), 0.2)])
    est, err = total_overlap_mc(s, 200_000, seed=2)
    assert abs(est - 4 / 3 * math.pi * 0.008) <= 3 * err


def test_overlap_through_the_boundary_matches_the_lens():
    s = _sample([SphereInc((0.03, 0.5, 0.5), 0.1), SphereInc((0.95, 0.5, 0.5), 0.08)])
    est, err = total_overlap_mc(s, 400_000, seed=3)
    assert abs(est - lens_volume(0.1, 0.08, 0.08)) <= 3 * err


def test_overlap_of_the_two_sphere_scenario():
    from rvegen.fixtures import scenarios

    s = next(x for x in scenarios() if x.name == "two-spheres").sample()
    est, err = total_overlap_mc(s, 400_000, seed=4)
    a, b = s.spheres
    d = np.linalg.norm(a.center - b.center)
    assert est > 0 and abs(est - lens_volume(a.radius, b.radius, d)) <= 3 * err
