"""Time-driven soft-contact dynamics that pushes overlapping inclusions apart.

Spheres are point masses; cylinders are thin rods with unit mass and
rotational inertia ``|l|^2 / 6`` about any axis orthogonal to the rod.
Spin about the rod's own axis is not modelled, so the axial component of
each torque is discarded. All forces share a global prefactor that doubles
whenever the potential energy has halved since the previous increase.

Damping combines a constant viscous coefficient, a Berendsen term computed
from the current kinetic energy, and a Nose-Hoover term carried as its own
state variable. The Nose-Hoover term is switched on for a while, with a
positive target kinetic energy, when the potential energy stops decreasing.
"""

from __future__ import annotations

import csv
import enum
import math
import time
from dataclasses import dataclass, field, replace

import numpy as np

from . import _md_kernels as K
from . import _vec as V
from .errors import IntegrationError, NonConvergence
from .geom import CylinderInc, SphereInc
from .periodic import SHIFTS
from .rsa import RsaConfig, candidate, generation_order, validate_config
from .sample import RveSample


class Integrator(str, enum.Enum):
    VELOCITY_VERLET = "velocity-verlet"
    TRAPEZOID = "trapezoid"


@dataclass
class MdParams:
    """Integration and stopping parameters.

    ``None`` defaults are resolved against the state: ``dt`` becomes
    ``0.05 * min radius``, ``max_force_scale`` becomes ``0.005 / dt^2``,
    ``e_stop`` becomes ``1e-6`` times the initial potential energy and
    ``reshuffle_temperature_term`` the initial potential energy.
    """

    dt: float | None = None
    beta: float = 5.0
    alpha_ber: float = 0.1
    alpha_nh: float = 0.1
    target_temperature_term: float = 0.0
    e_stop: float | None = None
    rescale_factor: float = 2.0
    rescale: bool = True
    max_force_scale: float | None = None
    max_steps: int = 200_000
    consecutive_below: int = 10
    nh_enabled: bool = True
    stagnation_window: int = 200
    stagnation_rel_change: float = 1e-3
    reshuffle_steps: int = 500
    reshuffle_temperature_term: float | None = None
    integrator: Integrator = Integrator.VELOCITY_VERLET
    record_every: int = 1

    def __post_init__(self):
        self.integrator = Integrator(self.integrator)
        for name in ("beta", "alpha_ber", "alpha_nh", "target_temperature_term"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v >= 0):
                raise ValueError(f"{name} must be finite and >= 0, got {v}")
        if self.dt is not None and not (math.isfinite(self.dt) and self.dt > 0):
            raise ValueError(f"dt must be finite and > 0, got {self.dt}")
        if self.e_stop is not None and not (math.isfinite(self.e_stop) and self.e_stop > 0):
            raise ValueError(f"e_stop must be finite and > 0, got {self.e_stop}")
        if not (math.isfinite(self.rescale_factor) and self.rescale_factor > 1):
            raise ValueError(f"rescale_factor must be > 1, got {self.rescale_factor}")
        if self.max_steps < 0:
            raise ValueError(f"max_steps must be >= 0, got {self.max_steps}")
        if self.consecutive_below < 1 or self.record_every < 1:
            raise ValueError("consecutive_below and record_every must be >= 1")


@dataclass
class MdState:
    """Positions, velocities and thermostat state of a relaxation.

    Rows of ``pos``/``ax``/``vel``/``omega`` are spheres first, then
    cylinders, matching :attr:`RveSample.shapes`.
    """

    pos: np.ndarray
    ax: np.ndarray
    rad: np.ndarray
    is_cyl: np.ndarray
    vel: np.ndarray
    omega: np.ndarray
    config: dict = field(default_factory=dict)
    seed: int = 0
    gamma_nh: float = 0.0
    force_scale: float = 1.0
    step_count: int = 0
    energy_trace: list = field(default_factory=list)
    e_ref: float | None = None
    e_pot: float | None = None
    n_contacts: int | None = None
    nh_until: int = -1
    below: int = 0
    window: np.ndarray | None = field(default=None, repr=False)
    win_count: int = 0
    win_pos: int = 0
    force: np.ndarray | None = field(default=None, repr=False)
    torque: np.ndarray | None = field(default=None, repr=False)

    @property
    def n_spheres(self) -> int:
        return int(np.count_nonzero(~self.is_cyl))

    @property
    def n_cylinders(self) -> int:
        return int(np.count_nonzero(self.is_cyl))

    @property
    def half_lengths(self) -> np.ndarray:
        return np.linalg.norm(self.ax, axis=1)

    @property
    def bound(self) -> np.ndarray:
        return np.sqrt(self.rad**2 + np.sum(self.ax**2, axis=1))

    def copy(self) -> MdState:
        return replace(
            self,
            pos=self.pos.copy(),
            ax=self.ax.copy(),
            vel=self.vel.copy(),
            omega=self.omega.copy(),
            energy_trace=list(self.energy_trace),
            window=None if self.window is None else self.window.copy(),
            force=None if self.force is None else self.force.copy(),
            torque=None if self.torque is None else self.torque.copy(),
        )

    def to_sample(self) -> RveSample:
        spheres, cylinders = [], []
        for i in range(len(self.rad)):
            if self.is_cyl[i]:
                cylinders.append(CylinderInc(self.pos[i].copy(), self.rad[i], self.ax[i].copy()))
            else:
                spheres.append(SphereInc(self.pos[i].copy(), self.rad[i]))
        return RveSample(spheres, cylinders, dict(self.config), self.seed, "MD")

    @classmethod
    def from_sample(cls, sample: RveSample) -> MdState:
        shapes = sample.shapes
        n = len(shapes)
        pos = np.array([s.center for s in shapes], dtype=float).reshape(n, 3)
        rad = np.array([s.radius for s in shapes], dtype=float)
        ax = np.zeros((n, 3))
        is_cyl = np.zeros(n, dtype=np.bool_)
        for i, s in enumerate(shapes):
            if isinstance(s, CylinderInc):
                is_cyl[i] = True
                ax[i] = s.half_axis
        pos = pos % 1.0
        pos[pos >= 1.0] = 0.0
        return cls(
            pos=pos, ax=ax, rad=rad, is_cyl=is_cyl,
            vel=np.zeros((n, 3)), omega=np.zeros((n, 3)),
            config=dict(sample.config), seed=int(sample.seed or 0),
        )


def init_overlapping(config: RsaConfig, seed: int | None = None) -> MdState:
    """Uniform random placement without any rejection; all at rest.

    Uses the same candidate stream as the sequential generator (the first
    candidate of every object).
    """
    r_s, r_c = validate_config(config)
    seed = config.seed if seed is None else seed
    order = generation_order(config.n_s, config.n_c, config.strategy)
    hl = config.aspect_ratio * r_c
    spheres, cylinders = [], []
    for m, cyl in enumerate(order):
        c, l = candidate(int(seed) & 0xFFFFFFFFFFFFFFFF, m, 0, cyl, hl if cyl else 0.0)
        if cyl:
            cylinders.append(CylinderInc(np.array(c), r_c, np.array(l)))
        else:
            spheres.append(SphereInc(np.array(c), r_s))
    cfg = config.to_dict()
    cfg["seed"] = int(seed)
    return MdState.from_sample(RveSample(spheres, cylinders, cfg, int(seed), "MD"))


def degrees_of_freedom(n_s: int, n_c: int) -> int:
    """Three translations per sphere; three translations and two rotations
    per cylinder."""
    return 3 * n_s + 5 * n_c


def kinetic_energy(state: MdState) -> float:
    return float(K.k_kinetic(state.vel, state.omega, state.ax, state.is_cyl))


def gamma_berendsen(e_kin: float, n_dof: int, params: MdParams) -> float:
    """Damping coefficient proportional to the excess kinetic energy.

    The temperature enters only through the aggregate
    ``params.target_temperature_term``; ``n_dof`` is accepted so callers can
    pass the system size uniformly.
    """
    return params.alpha_ber * (e_kin - params.target_temperature_term)


def step_gamma_nh(gamma: float, e_kin: float, n_dof: int, params: MdParams, dt: float,
                  target: float | None = None) -> float:
    """Explicit Euler step of the Nose-Hoover coefficient (0 when disabled)."""
    if not params.nh_enabled:
        return 0.0
    target = params.target_temperature_term if target is None else target
    return gamma + dt * params.alpha_nh * (e_kin - target)


def default_dt(state: MdState) -> float:
    return 0.05 * float(np.min(state.rad)) if len(state.rad) else 1e-3


def _key(state: MdState) -> np.uint64:
    return np.uint64(int(state.seed) & 0xFFFFFFFFFFFFFFFF)


def compute_forces(state: MdState) -> tuple[np.ndarray, np.ndarray, float, int]:
    """Unscaled contact forces, torques, potential energy and contact count
    of the current configuration."""
    n = len(state.rad)
    force = np.zeros((n, 3))
    torque = np.zeros((n, 3))
    key = np.uint64(V.mix_key(_key(state), np.uint64(2 * state.step_count)))
    e, nc = K.k_forces(state.pos, state.ax, state.rad, state.is_cyl, state.bound,
                       SHIFTS, key, force, torque)
    return force, torque, float(e), int(nc)


def _ensure_forces(state: MdState) -> None:
    if state.force is None or state.e_pot is None:
        state.force, state.torque, state.e_pot, state.n_contacts = compute_forces(state)
    if state.e_ref is None:
        state.e_ref = state.e_pot


def resolve_params(state: MdState, params: MdParams) -> MdParams:
    """Fill the state-dependent defaults of ``params``."""
    _ensure_forces(state)
    if params.dt is None:
        params = replace(params, dt=default_dt(state))
    if params.max_force_scale is None:
        params = replace(params, max_force_scale=0.005 / params.dt**2)
    if params.reshuffle_temperature_term is None:
        params = replace(params, reshuffle_temperature_term=max(state.e_pot, 1e-12))
    return params


def _run(state: MdState, params: MdParams, n_steps: int, relaxing: bool, e_stop: float):
    _ensure_forces(state)
    st = np.zeros(K.N_STATE)
    st[K.GAMMA_NH] = state.gamma_nh
    st[K.SCALE] = state.force_scale
    st[K.E_REF] = state.e_ref
    st[K.E_POT] = state.e_pot
    st[K.STEP] = state.step_count
    st[K.NH_UNTIL] = state.nh_until
    st[K.E_STOP] = e_stop
    st[K.BELOW] = state.below
    st[K.WIN_COUNT] = state.win_count
    st[K.WIN_POS] = state.win_pos
    prm = np.zeros(K.N_PARAM)
    prm[K.DT] = params.dt
    prm[K.BETA] = params.beta
    prm[K.ALPHA_BER] = params.alpha_ber
    prm[K.ALPHA_NH] = params.alpha_nh
    prm[K.TARGET] = params.target_temperature_term
    prm[K.RESCALE_FACTOR] = params.rescale_factor
    prm[K.RESCALE] = float(params.rescale)
    prm[K.MAX_SCALE] = params.max_force_scale
    prm[K.CONSEC] = params.consecutive_below
    prm[K.NH_ENABLED] = float(params.nh_enabled)
    prm[K.REL_CHANGE] = params.stagnation_rel_change
    prm[K.RESHUFFLE_STEPS] = params.reshuffle_steps
    prm[K.RESHUFFLE_TARGET] = params.reshuffle_temperature_term
    prm[K.INTEGRATOR] = 0.0 if params.integrator is Integrator.VELOCITY_VERLET else 1.0
    prm[K.RECORD_EVERY] = params.record_every
    prm[K.RELAXING] = float(relaxing)
    trace = np.zeros((n_steps // params.record_every + 1, 4))
    if state.window is None or len(state.window) != params.stagnation_window:
        state.window = np.zeros(params.stagnation_window)
        state.win_count = 0
        state.win_pos = 0
        st[K.WIN_COUNT] = 0
        st[K.WIN_POS] = 0
    window = state.window
    status, taken, rows = K.k_run(
        state.pos, state.ax, state.rad, state.is_cyl, state.bound, state.vel, state.omega,
        state.force, state.torque, SHIFTS, st, prm, _key(state), n_steps, trace, window,
    )
    state.gamma_nh = float(st[K.GAMMA_NH])
    state.force_scale = float(st[K.SCALE])
    state.e_ref = float(st[K.E_REF])
    state.e_pot = float(st[K.E_POT])
    state.n_contacts = int(st[K.N_CONTACTS])
    state.step_count = int(st[K.STEP])
    state.nh_until = int(st[K.NH_UNTIL])
    state.below = int(st[K.BELOW])
    state.win_count = int(st[K.WIN_COUNT])
    state.win_pos = int(st[K.WIN_POS])
    state.energy_trace.extend(
        (int(r[0]), float(r[1]), float(r[2]), float(r[3])) for r in trace[:rows]
    )
    if status == K.BLOWUP:
        raise IntegrationError(
            f"non-finite state at step {state.step_count} (dt = {params.dt:.3g}, "
            f"force scale {state.force_scale:.3g})"
        )
    return status, taken, float(st[K.E_STOP])


def md_step(state: MdState, params: MdParams | None = None) -> MdState:
    """Advance ``state`` in place by one integration step and return it."""
    params = resolve_params(state, params or MdParams())
    _run(state, params, 1, relaxing=False, e_stop=0.0)
    return state


def relax(state: MdState, params: MdParams | None = None,
          time_budget: float | None = None, chunk: int = 2000) -> RveSample:
    """Integrate until the configuration is contact-free.

    The run stops once the potential energy stays below ``e_stop`` for
    ``consecutive_below`` consecutive steps and the contact sweep of that
    step is empty; if contacts remain, the threshold is tightened tenfold
    and integration continues. Raises :class:`NonConvergence` (carrying the
    state) after ``max_steps`` steps or once ``time_budget`` seconds have
    elapsed. The budget is checked every ``chunk`` steps; chunking does not
    change the trajectory.
    """
    params = resolve_params(state, params or MdParams())
    if state.n_contacts == 0:
        return state.to_sample()
    e_stop = params.e_stop if params.e_stop is not None else 1e-6 * state.e_pot
    t0 = time.perf_counter()
    done = 0
    while done < params.max_steps:
        n = min(chunk, params.max_steps - done)
        status, taken, e_stop = _run(state, params, n, relaxing=True, e_stop=e_stop)
        done += taken
        if status == K.CONVERGED:
            return state.to_sample()
        if time_budget is not None and time.perf_counter() - t0 > time_budget:
            raise NonConvergence(
                f"no contact-free state within the time budget of {time_budget} s "
                f"({done} steps, E_pot = {state.e_pot:.3g}, {state.n_contacts} contacts)",
                state=state,
            )
    raise NonConvergence(
        f"no contact-free state after {params.max_steps} steps "
        f"(E_pot = {state.e_pot:.3g}, {state.n_contacts} contacts)",
        state=state,
    )


def calibrate_e_stop(config: RsaConfig, seeds=(0, 1, 2), factor: float = 1e-6) -> float:
    """Stop threshold for a family of runs: ``factor`` times the mean initial
    potential energy over a few seeded starting configurations."""
    es = [compute_forces(init_overlapping(config, s))[2] for s in seeds]
    mean = float(np.mean(es))
    return factor * mean if mean > 0 else 1e-12


def write_trace(state: MdState, path) -> None:
    """Energy trace as CSV: step, E_pot, E_kin, force_scale."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["step", "E_pot", "E_kin", "force_scale"])
        for row in state.energy_trace:
            w.writerow([row[0], repr(row[1]), repr(row[2]), repr(row[3])])
