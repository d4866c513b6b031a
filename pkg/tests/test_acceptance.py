"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -v -s`` or as a script
(``python3 tests/test_acceptance.py``). The full suite takes about
seven minutes on one core; the per-criterion lines are repeated in the
pytest terminal summary.
"""

from __future__ import annotations

import filecmp
import os
import subprocess
import sys
import time

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(__file__))

from rvegen.bench import Scenario, compare_crossover, fraction_sweep, run_scenario  # noqa: E402
from rvegen.fixtures import relax_pair, scenarios  # noqa: E402
from rvegen.forces import force_for_contact  # noqa: E402
from rvegen.geom import CylinderInc, Disk, SphereInc  # noqa: E402
from rvegen.intersect import ContactKind as K  # noqa: E402
from rvegen.intersect import contacts, cylinder_cylinder, disk_disk, sphere_cylinder  # noqa: E402
from rvegen.md import (  # noqa: E402
    MdParams,
    calibrate_e_stop,
    init_overlapping,
    md_step,
    relax,
    resolve_params,
)
from rvegen.errors import NonConvergence  # noqa: E402
from rvegen.periodic import all_contacts  # noqa: E402
from rvegen.rsa import RsaConfig, Strategy, generate  # noqa: E402
from rvegen.voxel import total_overlap_mc, voxelize  # noqa: E402

RESULTS: list[str] = []


def report(n: int, title: str, ok: bool, detail: str) -> None:
    line = f"[{'PASS' if ok else 'FAIL'}] {n:2d} {title}: {detail}"
    RESULTS.append(line)
    print(line, flush=True)
    assert ok, line


def test_01_predicate_matches_oracle():
    from _pairs import random_pairs, sweep

    k, c, r, a = random_pairs(200, 1)
    sweep(k, c, r, a, 100, 0)  # compile outside the timed region
    kind, cen, rad, ax = random_pairs(100_000, 12345)
    t0 = time.perf_counter()
    hits, est, err, kinds = sweep(kind, cen, rad, ax, 100_000, 0)
    sec = time.perf_counter() - t0
    false_neg = int(np.sum((hits == 0) & (est > 3 * err)))
    missing = [K(i).name for i in range(len(kinds)) if kinds[i] == 0]
    ok = false_neg == 0 and sec < 300 and not missing
    report(1, "predicate vs oracle", ok,
           f"{false_neg} false negatives in 1e5 pairs, {int(np.sum(hits > 0))} hits, "
           f"kinds missing {missing or 'none'}, {sec:.0f} s")


def _close(x, y, tol=1e-9):
    return bool(np.all(np.abs(np.asarray(x, float) - np.asarray(y, float)) <= tol))


def test_02_worked_examples():
    cyl = CylinderInc((0, 0, 0), 1.0, (0, 0, 2))
    checks = {}
    for name, s, kind, X, L in [
        ("SC2", SphereInc((2, 0, 0), 1.2), K.SC2, 0.0, 2.0),
        ("SC3", SphereInc((0, 0, 2.5), 1.0), K.SC3, 2.5, 0.0),
        ("SC4", SphereInc((1.2, 0, 2.2), 0.5), K.SC4, 2.2, 1.2),
    ]:
        c = sphere_cylinder(s, cyl)
        checks[name] = (c is not None and c.kind is kind
                        and _close(c.scalars["X"], X) and _close(c.scalars["L"], L))

    c1 = CylinderInc((0, 0, 0), 0.5, (0, 0, 1))
    c2 = CylinderInc((0.8, 0, 0), 0.5, (0, 1, 0))
    found = cylinder_cylinder(c1, c2)
    cc = found[0] if len(found) == 1 else None
    checks["CC1"] = (cc is not None and cc.kind is K.CC1 and _close(cc.scalars["rho"], 0.8)
                     and _close(cc.scalars["t1"], 0) and _close(cc.scalars["t2"], 0)
                     and _close(cc.points["pt1"], (0, 0, 0)) and _close(cc.points["pt2"], (0.8, 0, 0)))
    if cc is not None:
        fa, _ = force_for_contact(cc, c1, c2)
        checks["CC1 force"] = (_close(np.linalg.norm(fa.force), 0.2)
                               and _close(fa.force, (-0.2, 0, 0))
                               and _close(fa.application_point, (0.4, 0, 0)))

    d1, d2 = Disk((0, 0, 0), 1, (0, 0, 1)), Disk((0.5, 0, 0), 1, (1, 0, 0))
    dd, ds = disk_disk(d1, d2), disk_disk(d2, d1)
    checks["D2"] = (dd is not None and dd.kind is K.D2 and _close(dd.points["pt"], (0.5, 0, 0))
                    and ds is not None and ds.kind is K.D1)

    s, wide = SphereInc((2, 0, 0), 1.0), CylinderInc((0, 0, 0), 1.5, (0, 0, 2))
    (sc,) = contacts(s, wide)
    fs, fc = force_for_contact(sc, s, wide)
    checks["SC2 force"] = sc.kind is K.SC2 and _close(np.linalg.norm(fc.force), 1.5)

    a, b = SphereInc((0, 0, 0), 1), SphereInc((1.5, 0, 0), 1)
    (ss,) = contacts(a, b)
    f1, _ = force_for_contact(ss, a, b)
    checks["SS force"] = _close(f1.force, (-0.5, 0, 0))

    bad = [k for k, v in checks.items() if not v]
    report(2, "worked examples", not bad, f"{len(checks) - len(bad)}/{len(checks)} match"
           + (f", mismatched {bad}" if bad else ""))


FEASIBLE = [(fs, fc) for fs in (0.05, 0.10, 0.15) for fc in (0.05, 0.10, 0.15)]
# first cells past the feasible frontier at a = 3, from the neighbour of
# (0.30, 0.05) along the diagonal; cells further out are harder still
JAMMED = [(0.30, 0.10), (0.25, 0.15), (0.20, 0.20), (0.15, 0.25), (0.10, 0.30)]


def test_03_rsa_feasibility_map():
    t0 = time.perf_counter()
    res = run_scenario(Scenario("rsa", FEASIBLE + JAMMED, n_s=10, n_c=10, aspect_ratios=[3.0],
                                runs=20, time_cap=50.0))
    sec = time.perf_counter() - t0
    by_cell = {(c.f_s, c.f_c): c for c in res.cells}
    low = [cell for cell in FEASIBLE if by_cell[cell].success_count < 20]
    stuck = {cell: 20 - by_cell[cell].success_count for cell in JAMMED}
    not_stuck = [cell for cell, n in stuck.items() if n < 15]
    ok = not low and not not_stuck and sec < 1800
    report(3, "RSA feasibility map", ok,
           f"feasible cells below 20/20: {low or 'none'}; stagnations per jammed cell "
           + ", ".join(f"{k}: {v}/20" for k, v in stuck.items()) + f"; {sec:.0f} s")


def test_04_md_high_fraction():
    cfg = RsaConfig(f_s=0.25, f_c=0.25, n_s=30, n_c=30, aspect_ratio=3.0)
    ok_runs, worst = 0, 0.0
    for seed in range(20):
        state = init_overlapping(cfg, seed)
        t0 = time.perf_counter()
        try:
            sample = relax(state, MdParams(), time_budget=120.0)
        except NonConvergence:
            continue
        finally:
            worst = max(worst, time.perf_counter() - t0)
        if not all_contacts(sample.shapes):
            ok_runs += 1
    report(4, "MD at 0.25 + 0.25", ok_runs >= 18,
           f"{ok_runs}/20 contact-free, slowest run {worst:.1f} s")


def test_05_crossover():
    t0 = time.perf_counter()
    rows = compare_crossover(fraction_sweep(0.01, 0.60), n_s=0, n_c=30, aspect_ratio=3.0,
                             phase="cylinders", runs=20, time_cap=50.0,
                             stop_when_separated=True)
    sec = time.perf_counter() - t0
    slow_low = [r.f for r in rows if r.f <= 0.10 + 1e-9 and not r.rsa_mean < r.md_mean]
    split = [r.f for r in rows if r.rsa_success == 0 and r.md_success == r.runs]
    faster = next((r.f for r in rows if r.md_mean < r.rsa_mean or r.rsa_success == 0), None)
    ok = not slow_low and bool(split)
    report(5, "RSA/MD crossover", ok,
           f"RSA slower at f <= 0.10: {slow_low or 'never'}; MD first faster at f = {faster}; "
           f"RSA 0/20 with MD 20/20 at f = {split[0] if split else None}; {sec:.0f} s")


def test_06_energy_tracks_overlap():
    cfg = RsaConfig(f_s=0.25, f_c=0.25, n_s=10, n_c=10, aspect_ratio=3.0)
    rs = []
    for seed in range(3):
        state = init_overlapping(cfg, seed)
        params = resolve_params(state, MdParams())
        e_pot, vol = [], []
        while state.n_contacts > 0 and state.step_count <= 5000:
            if state.step_count % 10 == 0:
                e_pot.append(state.e_pot)
                vol.append(total_overlap_mc(state.to_sample(), 20_000, seed=state.step_count)[0])
            md_step(state, params)
        rs.append(float(np.corrcoef(e_pot, vol)[0, 1]))
    report(6, "energy vs overlap volume", min(rs) >= 0.9,
           "Pearson r per seed " + ", ".join(f"{r:.4f}" for r in rs))


def _steps_to_threshold(cfg, seed, rescale, e_stop, max_steps):
    state = init_overlapping(cfg, seed)
    try:
        relax(state, MdParams(rescale=rescale, e_stop=e_stop, max_steps=max_steps))
    except NonConvergence:
        pass
    trace = np.asarray(state.energy_trace, float).reshape(-1, 4)
    below = np.nonzero(trace[:, 1] < e_stop)[0]
    # runs that never get there count as max_steps + 1
    return int(trace[below[0], 0]) if below.size else max_steps + 1


def test_07_rescaling_speedup():
    cfg = RsaConfig(f_s=0.25, f_c=0.25, n_s=10, n_c=10, aspect_ratio=3.0)
    e_stop = calibrate_e_stop(cfg)
    max_steps = 20_000
    pairs = [(_steps_to_threshold(cfg, s, True, e_stop, max_steps),
              _steps_to_threshold(cfg, s, False, e_stop, max_steps)) for s in range(10)]
    wins = sum(on < off for on, off in pairs)
    report(7, "force rescaling speedup", wins >= 8,
           f"fewer steps to E_pot < E_stop on {wins}/10 seeds; (on, off) = {pairs}")


def test_08_pair_fixtures():
    failed = []
    for s in scenarios():
        out = relax_pair(s, max_steps=100_000)
        if not (s.passed(out) and out.steps < 100_000):
            failed.append(s.name)
    n = len(scenarios())
    report(8, "pairwise fixtures", not failed,
           f"{n - len(failed)}/{n} relax with their predicates" + (f", failed {failed}" if failed else ""))


def _generated_samples():
    for strategy in Strategy:
        for seed in range(3):
            cfg = RsaConfig(f_s=0.1, f_c=0.1, n_s=10, n_c=10, aspect_ratio=3.0,
                            strategy=strategy, seed=seed)
            yield cfg, generate(cfg)
    for cfg in (RsaConfig(f_s=0.2, f_c=0.0, n_s=30, n_c=0, seed=4),
                RsaConfig(f_s=0.0, f_c=0.2, n_s=0, n_c=30, aspect_ratio=5.0, seed=5)):
        yield cfg, generate(cfg)
    for seed in range(3):
        cfg = RsaConfig(f_s=0.25, f_c=0.25, n_s=30, n_c=30, aspect_ratio=3.0, seed=seed)
        yield cfg, relax(init_overlapping(cfg), MdParams())


def test_09_exact_fractions():
    worst, n = 0.0, 0
    for cfg, sample in _generated_samples():
        worst = max(worst, abs(sample.sphere_volume - cfg.f_s), abs(sample.cylinder_volume - cfg.f_c))
        n += 1
    report(9, "exact volume fractions", worst <= 1e-12,
           f"largest deviation {worst:.2e} over {n} samples")


def test_10_periodic_tiling():
    cfg = RsaConfig(f_s=0.25, f_c=0.25, n_s=30, n_c=30, aspect_ratio=3.0, seed=7)
    samples = [relax(init_overlapping(cfg), MdParams()),
               generate(RsaConfig(f_s=0.15, f_c=0.15, n_s=10, n_c=10, seed=7))]
    shifts = [(1, 0, 0), (0, 17, 0), (5, 40, 63), (32, 32, 32)]
    bad = 0
    for s in samples:
        base = voxelize(s, 64).data
        for k in shifts:
            moved = voxelize(s.translated(np.array(k) / 64), 64).data
            bad += not np.array_equal(np.roll(base, k, axis=(0, 1, 2)), moved)
    total = len(samples) * len(shifts)
    report(10, "periodic tiling", bad == 0, f"{total - bad}/{total} shifted grids bit-identical")


def test_11_determinism(tmp_path):
    common = ["--fs", "0.15", "--fc", "0.15", "--ns", "10", "--nc", "10", "--seed", "3",
              "--deterministic"]
    same = {}
    for method in ("rsa", "md"):
        paths = [tmp_path / f"{method}{i}.json" for i in range(2)]
        for p in paths:
            subprocess.run([sys.executable, "-m", "rvegen.cli", "generate", "--method", method,
                            *common, "--out", str(p)], check=True, capture_output=True)
        same[method] = filecmp.cmp(paths[0], paths[1], shallow=False)
    report(11, "deterministic output", all(same.values()),
           ", ".join(f"{k}: {'identical' if v else 'differs'}" for k, v in same.items()))


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-v", "-s"]))
