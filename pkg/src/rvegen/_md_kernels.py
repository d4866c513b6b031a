"""Jitted inner loop of the relaxation dynamics.

State scalars and parameters travel in small float64 arrays so that a whole
run can stay inside compiled code; the index constants below name the slots.
"""

import math

import numpy as np
from numba import njit

from . import _vec as V
from .forces import k_force
from .intersect import MAX_CC, REC
from .periodic import k_pair

# state slots
GAMMA_NH, SCALE, E_REF, E_POT, STEP, NH_UNTIL, E_STOP, BELOW, N_CONTACTS = range(9)
WIN_COUNT, WIN_POS, E_KIN = 9, 10, 11
N_STATE = 12

# parameter slots
(DT, BETA, ALPHA_BER, ALPHA_NH, TARGET, RESCALE_FACTOR, RESCALE, MAX_SCALE,
 CONSEC, NH_ENABLED, WINDOW, REL_CHANGE, RESHUFFLE_STEPS, RESHUFFLE_TARGET,
 INTEGRATOR, RECORD_EVERY, RELAXING) = range(17)
N_PARAM = 17

RUNNING, CONVERGED, BLOWUP = 0, 1, 2


@njit(cache=True)
def k_forces(pos, ax, rad, is_cyl, bound, shifts, key, force, torque):
    """Sweep all periodic pairs and accumulate contact forces in place.

    Returns (potential energy, number of contacts). The visiting order is
    fixed, so the floating-point reduction is reproducible.
    """
    n = rad.shape[0]
    scratch = np.zeros((MAX_CC, REC))
    force[:, :] = 0.0
    torque[:, :] = 0.0
    energy = 0.0
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
                    if s[0] < 0.0 or (s[0] == 0.0 and (s[1] < 0.0 or (s[1] == 0.0 and s[2] <= 0.0))):
                        continue
                pj = (pos[j, 0] + s[0], pos[j, 1] + s[1], pos[j, 2] + s[2])
                if V.norm(V.sub(pj, pi)) >= reach:
                    continue
                m, swapped = k_pair(is_cyl[i], pi, rad[i], li, is_cyl[j], pj, rad[j], lj, scratch, False)
                for r in range(m):
                    if swapped:
                        a, b = j, i
                        pa = (pos[j, 0], pos[j, 1], pos[j, 2])
                        pb = (pos[i, 0] - s[0], pos[i, 1] - s[1], pos[i, 2] - s[2])
                        la, lb = lj, li
                    else:
                        a, b = i, j
                        pa, pb = pi, pj
                        la, lb = li, lj
                    F, pt, e = k_force(scratch[r], pa, rad[a], la, pb, rad[b], lb,
                                       V.mix_key(key, count))
                    energy += e
                    count += 1
                    for c in range(3):
                        force[a, c] += F[c]
                        force[b, c] -= F[c]
                    if is_cyl[a]:
                        t = V.cross(V.sub(pt, pa), F)
                        for c in range(3):
                            torque[a, c] += t[c]
                    if is_cyl[b]:
                        t = V.cross(V.sub(pt, pb), F)
                        for c in range(3):
                            torque[b, c] -= t[c]
    return energy, count


@njit(cache=True)
def k_kinetic(vel, omega, ax, is_cyl):
    e = 0.0
    for i in range(vel.shape[0]):
        e += 0.5 * (vel[i, 0] ** 2 + vel[i, 1] ** 2 + vel[i, 2] ** 2)
        if is_cyl[i]:
            inertia = (ax[i, 0] ** 2 + ax[i, 1] ** 2 + ax[i, 2] ** 2) / 6.0
            e += 0.5 * inertia * (omega[i, 0] ** 2 + omega[i, 1] ** 2 + omega[i, 2] ** 2)
    return e


@njit(cache=True)
def k_angular(ax, torque, is_cyl, i):
    """Angular acceleration per unit force scale: torque without its axial
    part, divided by the rod inertia."""
    l = (ax[i, 0], ax[i, 1], ax[i, 2])
    l2 = V.dot(l, l)
    tau = (torque[i, 0], torque[i, 1], torque[i, 2])
    tau = V.sub(tau, V.scale(l, V.dot(tau, l) / l2))
    return V.scale(tau, 6.0 / l2)


@njit(cache=True)
def k_rotate(ax, omega, dt, is_cyl):
    """Rodrigues rotation of every half-axis by ``omega * dt``; the length
    is then restored exactly."""
    for i in range(ax.shape[0]):
        if not is_cyl[i]:
            continue
        l = (ax[i, 0], ax[i, 1], ax[i, 2])
        ln = V.norm(l)
        w = (omega[i, 0], omega[i, 1], omega[i, 2])
        wn = V.norm(w)
        th = wn * dt
        if th > 0.0:
            k = V.scale(w, 1.0 / wn)
            c = math.cos(th)
            s = math.sin(th)
            l = V.add(V.add(V.scale(l, c), V.scale(V.cross(k, l), s)),
                      V.scale(k, V.dot(k, l) * (1.0 - c)))
        f = ln / V.norm(l)
        for d in range(3):
            ax[i, d] = l[d] * f


@njit(cache=True)
def _wrap(pos):
    for i in range(pos.shape[0]):
        for d in range(3):
            x = pos[i, d] - math.floor(pos[i, d])
            pos[i, d] = 0.0 if x >= 1.0 else x


@njit(cache=True)
def _finite(a):
    for x in a.flat:
        if not math.isfinite(x):
            return False
    return True


@njit(cache=True)
def k_run(pos, ax, rad, is_cyl, bound, vel, omega, force, torque, shifts,
          st, prm, seed, n_steps, trace, window):
    """Advance up to ``n_steps`` steps.

    ``force``/``torque``/``st[E_POT]`` must hold the (unscaled) forces of the
    current configuration on entry and are kept current. Returns
    (status, steps taken, trace rows written).
    """
    n = rad.shape[0]
    dt = prm[DT]
    rows = 0
    taken = 0
    W = window.shape[0]
    vh = np.zeros((n, 3))
    wh = np.zeros((n, 3))
    pos0 = np.zeros((n, 3))
    ax0 = np.zeros((n, 3))
    v0 = np.zeros((n, 3))
    w0 = np.zeros((n, 3))
    f0 = np.zeros((n, 3))
    t0 = np.zeros((n, 3))
    for _ in range(n_steps):
        step = int(st[STEP])
        scale = st[SCALE]
        e_kin = k_kinetic(vel, omega, ax, is_cyl)
        gamma = prm[BETA] + prm[ALPHA_BER] * (e_kin - prm[TARGET]) + st[GAMMA_NH]
        if prm[INTEGRATOR] == 0.0:
            # velocity Verlet; damping explicit in the first half-kick and
            # implicit in the second
            for i in range(n):
                for d in range(3):
                    vh[i, d] = vel[i, d] + 0.5 * dt * (scale * force[i, d] - gamma * vel[i, d])
                if is_cyl[i]:
                    al = k_angular(ax, torque, is_cyl, i)
                    for d in range(3):
                        wh[i, d] = omega[i, d] + 0.5 * dt * (scale * al[d] - gamma * omega[i, d])
            for i in range(n):
                for d in range(3):
                    pos[i, d] += dt * vh[i, d]
            _wrap(pos)
            k_rotate(ax, wh, dt, is_cyl)
            key = V.mix_key(seed, np.uint64(2 * (step + 1)))
            e_pot, nc = k_forces(pos, ax, rad, is_cyl, bound, shifts, key, force, torque)
            damp = 1.0 + 0.5 * dt * gamma
            for i in range(n):
                for d in range(3):
                    vel[i, d] = (vh[i, d] + 0.5 * dt * scale * force[i, d]) / damp
                if is_cyl[i]:
                    al = k_angular(ax, torque, is_cyl, i)
                    for d in range(3):
                        omega[i, d] = (wh[i, d] + 0.5 * dt * scale * al[d]) / damp
        else:
            # explicit trapezoid (Heun): predictor with the current rates,
            # corrector with the average of both
            pos0[:, :] = pos
            ax0[:, :] = ax
            v0[:, :] = vel
            w0[:, :] = omega
            f0[:, :] = force
            t0[:, :] = torque
            for i in range(n):
                for d in range(3):
                    pos[i, d] += dt * v0[i, d]
                    vel[i, d] = v0[i, d] + dt * (scale * f0[i, d] - gamma * v0[i, d])
                if is_cyl[i]:
                    al = k_angular(ax0, t0, is_cyl, i)
                    for d in range(3):
                        omega[i, d] = w0[i, d] + dt * (scale * al[d] - gamma * w0[i, d])
            _wrap(pos)
            k_rotate(ax, w0, dt, is_cyl)
            key = V.mix_key(seed, np.uint64(2 * step + 1))
            k_forces(pos, ax, rad, is_cyl, bound, shifts, key, force, torque)
            # corrector
            for i in range(n):
                for d in range(3):
                    pos[i, d] = pos0[i, d] + 0.5 * dt * (v0[i, d] + vel[i, d])
                    vel[i, d] = v0[i, d] + 0.5 * dt * (
                        scale * (f0[i, d] + force[i, d]) - gamma * (v0[i, d] + vel[i, d]))
                if is_cyl[i]:
                    a1 = k_angular(ax0, t0, is_cyl, i)
                    a2 = k_angular(ax, torque, is_cyl, i)
                    for d in range(3):
                        wm = omega[i, d]
                        wh[i, d] = 0.5 * (w0[i, d] + wm)
                        omega[i, d] = w0[i, d] + 0.5 * dt * (
                            scale * (a1[d] + a2[d]) - gamma * (w0[i, d] + wm))
            _wrap(pos)
            ax[:, :] = ax0
            k_rotate(ax, wh, dt, is_cyl)
            key = V.mix_key(seed, np.uint64(2 * (step + 1)))
            e_pot, nc = k_forces(pos, ax, rad, is_cyl, bound, shifts, key, force, torque)
        step += 1
        taken += 1
        st[STEP] = step
        st[E_POT] = e_pot
        st[N_CONTACTS] = nc
        if not (_finite(vel) and _finite(omega) and _finite(pos) and math.isfinite(e_pot)):
            return BLOWUP, taken, rows
        e_kin = k_kinetic(vel, omega, ax, is_cyl)
        st[E_KIN] = e_kin
        reshuffling = step < st[NH_UNTIL]
        if reshuffling and prm[NH_ENABLED] != 0.0:
            st[GAMMA_NH] += dt * prm[ALPHA_NH] * (e_kin - prm[RESHUFFLE_TARGET])
        else:
            st[GAMMA_NH] = 0.0
        if prm[RESCALE] != 0.0 and e_pot <= 0.5 * st[E_REF]:
            if st[SCALE] * prm[RESCALE_FACTOR] <= prm[MAX_SCALE]:
                st[SCALE] *= prm[RESCALE_FACTOR]
            st[E_REF] = e_pot
        if step % int(prm[RECORD_EVERY]) == 0 and rows < trace.shape[0]:
            trace[rows, 0] = step
            trace[rows, 1] = e_pot
            trace[rows, 2] = e_kin
            trace[rows, 3] = st[SCALE]
            rows += 1
        if prm[RELAXING] == 0.0:
            continue
        # stop criterion
        if e_pot < st[E_STOP]:
            st[BELOW] += 1
            if st[BELOW] >= prm[CONSEC]:
                if nc == 0:
                    return CONVERGED, taken, rows
                st[E_STOP] *= 0.1
                st[BELOW] = 0
        else:
            st[BELOW] = 0
        # stagnation detector switching the Nose-Hoover term on
        if prm[NH_ENABLED] != 0.0 and not reshuffling and W > 0:
            p = int(st[WIN_POS])
            if st[WIN_COUNT] >= W:
                old = window[p]
                if old > 0.0 and abs(old - e_pot) < prm[REL_CHANGE] * old:
                    st[NH_UNTIL] = step + prm[RESHUFFLE_STEPS]
                    st[GAMMA_NH] = 0.0
                    st[WIN_COUNT] = 0
                    st[WIN_POS] = 0
                    continue
            window[p] = e_pot
            st[WIN_POS] = (p + 1) % W
            st[WIN_COUNT] += 1
    return RUNNING, taken, rows
