import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from rvegen.errors import NonConvergence
from rvegen.geom import CylinderInc, SphereInc
from rvegen.md import (
    Integrator,
    MdParams,
    MdState,
    compute_forces,
    degrees_of_freedom,
    gamma_berendsen,
    init_overlapping,
    kinetic_energy,
    md_step,
    relax,
    step_gamma_nh,
    write_trace,
)
from rvegen.periodic import all_contacts
from rvegen.rsa import RsaConfig, generate
from rvegen.sample import RveSample

FREE = dict(beta=0.0, alpha_ber=0.0, alpha_nh=0.0, nh_enabled=False, rescale=False)


def _state(spheres=(), cylinders=()):
    return MdState.from_sample(RveSample(list(spheres), list(cylinders), {}, 0, "MD"))


def test_degrees_of_freedom():
    assert degrees_of_freedom(10, 10) == 80
    assert degrees_of_freedom(0, 0) == 0
    assert degrees_of_freedom(30, 30) == 240


def test_kinetic_energy():
    s = _state([SphereInc((0.5, 0.5, 0.5), 0.1)])
    assert kinetic_energy(s) == 0
    s.vel[0] = (1, 0, 0)
    assert kinetic_energy(s) == pytest.approx(0.5)
    c = _state(cylinders=[CylinderInc((0.5, 0.5, 0.5), 0.05, (0.3, 0, 0))])
    c.omega[0] = (0, 0, 2)
    assert kinetic_energy(c) == pytest.approx(0.5 * 0.09 / 6 * 4)


def test_thermostat_coefficients():
    p = MdParams(alpha_ber=0.1)
    assert gamma_berendsen(10.0, 80, p) == pytest.approx(1.0)
    assert gamma_berendsen(0.0, 80, p) == 0.0
    assert gamma_berendsen(10.0, 80, MdParams(alpha_ber=0.0)) == 0.0
    q = MdParams(alpha_nh=0.5)
    assert step_gamma_nh(0.0, 2.0, 80, q, 0.1) == pytest.approx(0.1)
    assert step_gamma_nh(0.3, 2.0, 80, MdParams(nh_enabled=False), 0.1) == 0.0
    assert step_gamma_nh(0.3, 0.0, 80, q, 0.1) == 0.3


def test_invalid_params():
    with pytest.raises(ValueError):
        MdParams(dt=-1.0)
    with pytest.raises(ValueError):
        MdParams(beta=float("nan"))
    with pytest.raises(ValueError):
        MdParams(rescale_factor=1.0)


def test_contact_free_rest_state_is_a_fixed_point():
    s = _state([SphereInc((0.2, 0.5, 0.5), 0.1)], [CylinderInc((0.7, 0.5, 0.5), 0.05, (0, 0.1, 0))])
    before = (s.pos.copy(), s.ax.copy())
    md_step(s)
    assert s.step_count == 1
    assert np.array_equal(s.pos, before[0]) and np.array_equal(s.ax, before[1])


def test_free_rotation_keeps_the_length():
    s = _state(cylinders=[CylinderInc((0.5, 0.5, 0.5), 0.05, (0.3, 0, 0))])
    s.omega[0] = (0, 0, 1)
    p = MdParams(dt=0.01, **FREE)
    for _ in range(100):
        md_step(s, p)
    assert np.linalg.norm(s.ax[0]) == pytest.approx(0.3, abs=1e-12)
    assert s.ax[0, 1] > 0  # turned counter-clockwise about z
    assert np.arctan2(s.ax[0, 1], s.ax[0, 0]) == pytest.approx(1.0, abs=1e-3)


def test_overlapping_spheres_are_pushed_apart():
    s = _state([SphereInc((0.45, 0.5, 0.5), 0.1), SphereInc((0.55, 0.5, 0.5), 0.1)])
    md_step(s)
    assert s.vel[0, 0] < 0 < s.vel[1, 0]
    assert np.allclose(s.vel[:, 1:], 0)


def test_valid_sample_returns_at_once():
    sample = generate(RsaConfig(f_s=0.05, f_c=0.05, n_s=5, n_c=5, seed=1))
    state = MdState.from_sample(sample)
    out = relax(state)
    assert state.step_count == 0 and state.e_pot == 0
    assert out.to_json().replace('"MD"', '"RSA"') == sample.to_json()


def test_initial_state():
    cfg = RsaConfig(f_s=0.25, f_c=0.25, n_s=10, n_c=10, seed=3)
    a, b = init_overlapping(cfg), init_overlapping(cfg)
    assert np.array_equal(a.pos, b.pos) and np.array_equal(a.ax, b.ax)
    assert compute_forces(a)[3] > 0
    assert np.all(a.vel == 0)
    assert init_overlapping(RsaConfig(f_c=0.1, n_c=5)).n_spheres == 0


@pytest.mark.parametrize("integrator", list(Integrator))
def test_relaxation_reaches_a_valid_sample(integrator, tmp_path):
    cfg = RsaConfig(f_s=0.2, f_c=0.2, n_s=10, n_c=10, seed=2)
    state = init_overlapping(cfg)
    sample = relax(state, MdParams(integrator=integrator))
    assert all_contacts(sample.shapes) == []
    assert sample.sphere_volume == pytest.approx(0.2, abs=1e-12)
    assert sample.cylinder_volume == pytest.approx(0.2, abs=1e-12)
    write_trace(state, tmp_path / "t.csv")
    lines = (tmp_path / "t.csv").read_text().splitlines()
    assert lines[0] == "step,E_pot,E_kin,force_scale" and len(lines) == state.step_count + 1


def test_step_limit_raises_with_state():
    state = init_overlapping(RsaConfig(f_s=0.25, f_c=0.25, n_s=30, n_c=30, seed=0))
    with pytest.raises(NonConvergence) as info:
        relax(state, MdParams(max_steps=20))
    assert info.value.state.step_count == 20


def test_relax_is_deterministic_and_chunk_independent():
    cfg = RsaConfig(f_s=0.2, f_c=0.2, n_s=15, n_c=15, seed=11)
    a = relax(init_overlapping(cfg), chunk=10**9)
    b = relax(init_overlapping(cfg), chunk=13)
    assert a.to_json() == b.to_json()


def test_single_steps_match_a_long_run():
    cfg = RsaConfig(f_s=0.2, f_c=0.2, n_s=6, n_c=6, seed=4)
    a, b = init_overlapping(cfg), init_overlapping(cfg)
    p = MdParams(max_steps=50, e_stop=1e-30)
    with pytest.raises(NonConvergence):
        relax(a, p)
    for _ in range(50):
        md_step(b, p)
    assert np.array_equal(a.pos, b.pos) and np.array_equal(a.omega, b.omega)


@settings(max_examples=20)
@given(st.integers(0, 2**31))
def test_lengths_are_conserved(seed):
    state = init_overlapping(RsaConfig(f_c=0.3, n_c=12, seed=seed))
    lengths = np.linalg.norm(state.ax, axis=1)
    for _ in range(30):
        md_step(state)
    assert np.allclose(np.linalg.norm(state.ax, axis=1), lengths, rtol=0, atol=1e-14)


@settings(max_examples=20)
@given(st.integers(0, 2**31))
def test_momentum_is_conserved_without_damping(seed):
    state = init_overlapping(RsaConfig(f_s=0.2, f_c=0.2, n_s=6, n_c=6, seed=seed))
    p = MdParams(**FREE)
    for _ in range(20):
        md_step(state, p)
    scale = 1.0 + np.abs(state.vel).max()
    assert np.allclose(state.vel.sum(axis=0), 0, atol=1e-9 * scale)


@settings(max_examples=20)
@given(st.floats(0.5, 20.0), st.integers(0, 2**31))
def test_viscous_damping_drains_kinetic_energy(beta, seed):
    rng = np.random.default_rng(seed)
    s = _state([SphereInc((0.2, 0.5, 0.5), 0.05)], [CylinderInc((0.7, 0.5, 0.5), 0.05, (0, 0.1, 0))])
    s.vel[:] = rng.normal(size=(2, 3)) * 1e-3
    s.omega[1] = np.cross(rng.normal(size=3), s.ax[1]) * 1e-3
    p = MdParams(dt=1e-3, beta=beta, alpha_ber=0.0, nh_enabled=False)
    e = [kinetic_energy(s)]
    for _ in range(5):
        md_step(s, p)
        e.append(kinetic_energy(s))
    assert all(b < a for a, b in zip(e, e[1:]))
