"""Timing sweeps for both generators and their crossover comparison.

A scenario is a grid of (f_s, f_c) cells run several times each with seeds
``seed_base + run``. Failures (stagnation, non-convergence, invalid cells)
are recorded as data; a sweep never aborts. Times cover generation only,
not serialization, and exclude one-off JIT compilation.
"""

from __future__ import annotations

import csv
import enum
import itertools
import json
import math
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .errors import ConfigError, IntegrationError, NonConvergence, Stagnation
from .md import MdParams, init_overlapping, relax
from .rsa import RsaConfig, Strategy, generate


class Generator(str, enum.Enum):
    RSA = "rsa"
    MD = "md"


@dataclass
class Scenario:
    generator: Generator
    cells: list
    n_s: int
    n_c: int
    aspect_ratios: list = field(default_factory=lambda: [3.0])
    runs: int = 20
    time_cap: float = 50.0
    seed_base: int = 0
    strategy: Strategy = Strategy.CYLINDERS_FIRST
    md: dict = field(default_factory=dict)

    def __post_init__(self):
        self.generator = Generator(str(self.generator).lower())
        self.strategy = Strategy(self.strategy)
        self.cells = [(float(a), float(b)) for a, b in self.cells]
        self.aspect_ratios = [float(a) for a in self.aspect_ratios]
        if self.runs < 1:
            raise ConfigError(f"runs must be >= 1, got {self.runs}")
        for f_s, f_c in self.cells:
            if f_s < 0 or f_c < 0 or f_s + f_c >= 1:
                raise ConfigError(f"cell ({f_s}, {f_c}) violates 0 <= f and f_s + f_c < 1")
        if not self.aspect_ratios:
            raise ConfigError("at least one aspect ratio is required")
        MdParams(**self.md)

    @classmethod
    def from_dict(cls, d: dict) -> Scenario:
        d = dict(d)
        d.pop("kind", None)
        if "cells" not in d:
            f_s = d.pop("f_s", [0.0])
            f_c = d.pop("f_c", [0.0])
            d["cells"] = [
                (a, b) for a, b in itertools.product(f_s, f_c) if a + b < 1.0
            ]
        if "aspect_ratio" in d:
            d["aspect_ratios"] = [d.pop("aspect_ratio")]
        return cls(**d)


@dataclass
class RunRecord:
    f_s: float
    f_c: float
    aspect_ratio: float
    run: int
    seed: int
    seconds: float
    success: bool
    status: str
    steps: int = 0


@dataclass
class CellResult:
    f_s: float
    f_c: float
    aspect_ratio: float
    runs: list

    @property
    def success_count(self) -> int:
        return sum(r.success for r in self.runs)

    @property
    def times(self) -> list[float]:
        return [r.seconds for r in self.runs if r.success]

    @property
    def mean_time(self) -> float:
        t = self.times
        return float(np.mean(t)) if t else math.nan

    @property
    def std_time(self) -> float:
        t = self.times
        return float(np.std(t, ddof=1)) if len(t) > 1 else math.nan


@dataclass
class BenchResult:
    scenario: Scenario
    cells: list

    def cell(self, f_s, f_c, aspect_ratio=None) -> CellResult:
        for c in self.cells:
            if (math.isclose(c.f_s, f_s) and math.isclose(c.f_c, f_c)
                    and (aspect_ratio is None or math.isclose(c.aspect_ratio, aspect_ratio))):
                return c
        raise KeyError((f_s, f_c, aspect_ratio))


def _config(generator, f_s, f_c, n_s, n_c, a, seed, strategy, time_cap):
    # a phase with zero fraction carries no inclusions
    return RsaConfig(
        f_s=f_s, f_c=f_c, n_s=n_s if f_s > 0 else 0, n_c=n_c if f_c > 0 else 0,
        aspect_ratio=a, strategy=strategy, seed=seed, time_budget=time_cap,
    )


def run_once(generator: Generator, cfg: RsaConfig, md: dict | None = None,
             time_cap: float = 50.0) -> tuple[float, bool, str, int]:
    """Times one generation; returns (seconds, success, status, md steps)."""
    t0 = time.perf_counter()
    steps = 0
    try:
        if Generator(generator) is Generator.RSA:
            generate(cfg)
        else:
            state = init_overlapping(cfg)
            try:
                relax(state, MdParams(**(md or {})), time_budget=time_cap)
            finally:
                steps = state.step_count
        status, ok = "ok", True
    except Stagnation:
        status, ok = "stagnation", False
    except NonConvergence:
        status, ok = "non-convergence", False
    except IntegrationError:
        status, ok = "blow-up", False
    except ConfigError as e:
        status, ok = f"config: {e}", False
    return time.perf_counter() - t0, ok, status, steps


def warm_up() -> None:
    """Compile the jitted kernels so that the first timed run is fair."""
    cfg = RsaConfig(f_s=0.05, f_c=0.05, n_s=2, n_c=2, seed=0)
    generate(cfg)
    relax(init_overlapping(cfg))


def run_scenario(s: Scenario, progress=None) -> BenchResult:
    """Runs every cell ``s.runs`` times with seeds ``seed_base + run``."""
    warm_up()
    cells = []
    for a in s.aspect_ratios:
        for f_s, f_c in s.cells:
            runs = []
            for k in range(s.runs):
                seed = s.seed_base + k
                cfg = _config(s.generator, f_s, f_c, s.n_s, s.n_c, a, seed, s.strategy, s.time_cap)
                sec, ok, status, steps = run_once(s.generator, cfg, s.md, s.time_cap)
                runs.append(RunRecord(f_s, f_c, a, k, seed, sec, ok, status, steps))
            cell = CellResult(f_s, f_c, a, runs)
            cells.append(cell)
            if progress:
                progress(cell)
    return BenchResult(s, cells)


def write_result_csv(result: BenchResult, path, per_run_path=None) -> None:
    """One row per cell, and optionally one row per run."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["generator", "f_s", "f_c", "aspect_ratio", "runs", "success_count",
                    "mean_time", "std_time"])
        for c in result.cells:
            w.writerow([result.scenario.generator.value, c.f_s, c.f_c, c.aspect_ratio,
                        len(c.runs), c.success_count, c.mean_time, c.std_time])
    if per_run_path is not None:
        with open(per_run_path, "w", newline="") as fh:
            w = csv.writer(fh)
            names = list(asdict(result.cells[0].runs[0])) if result.cells else [
                "f_s", "f_c", "aspect_ratio", "run", "seed", "seconds", "success", "status", "steps"]
            w.writerow(names)
            for c in result.cells:
                for r in c.runs:
                    w.writerow([getattr(r, n) for n in names])


@dataclass
class CrossoverRow:
    f: float
    rsa_mean: float
    md_mean: float
    rsa_success: int
    md_success: int
    runs: int


def fraction_sweep(start: float, stop: float, step: float = 0.01) -> list[float]:
    """Fractions ``start, start + step, ...`` up to ``stop`` inclusive,
    rounded to the step's decimals."""
    if stop < start:
        return []
    digits = max(0, -int(math.floor(math.log10(step))) + 2)
    n = int(math.floor((stop - start) / step + 1e-9))
    return [round(start + i * step, digits) for i in range(n + 1)]


def compare_crossover(fractions, n_s: int = 0, n_c: int = 30, aspect_ratio: float = 3.0,
                      phase: str = "cylinders", runs: int = 20, time_cap: float = 50.0,
                      seed_base: int = 0, md: dict | None = None,
                      stop_when_separated: bool = False, progress=None) -> list[CrossoverRow]:
    """RSA against MD over a single-phase (or equal two-phase) fraction sweep.

    ``phase`` is ``"cylinders"``, ``"spheres"`` or ``"both"`` (``f`` split
    evenly). With ``stop_when_separated`` the sweep ends at the first ``f``
    where RSA never succeeds and MD always does.
    """
    warm_up()
    rows = []
    for f in fractions:
        if phase == "cylinders":
            f_s, f_c = 0.0, f
        elif phase == "spheres":
            f_s, f_c = f, 0.0
        elif phase == "both":
            f_s = f_c = f / 2.0
        else:
            raise ConfigError(f"unknown phase {phase!r}")
        stats = {}
        for gen in (Generator.RSA, Generator.MD):
            times, ok = [], 0
            for k in range(runs):
                cfg = _config(gen, f_s, f_c, n_s, n_c, aspect_ratio, seed_base + k,
                              Strategy.CYLINDERS_FIRST, time_cap)
                sec, good, _, _ = run_once(gen, cfg, md, time_cap)
                if good:
                    ok += 1
                    times.append(sec)
            stats[gen] = (float(np.mean(times)) if times else math.nan, ok)
        row = CrossoverRow(f, stats[Generator.RSA][0], stats[Generator.MD][0],
                           stats[Generator.RSA][1], stats[Generator.MD][1], runs)
        rows.append(row)
        if progress:
            progress(row)
        if stop_when_separated and row.rsa_success == 0 and row.md_success == runs:
            break
    return rows


def write_crossover_csv(rows, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["f", "rsa_mean", "md_mean", "rsa_success", "md_success", "runs"])
        for r in rows:
            w.writerow([r.f, r.rsa_mean, r.md_mean, r.rsa_success, r.md_success, r.runs])


def load_scenario(path) -> dict:
    """Reads a scenario file; ``kind`` selects ``"grid"`` (default) or
    ``"crossover"``."""
    try:
        d = json.loads(Path(path).read_text())
    except json.JSONDecodeError as e:
        raise ConfigError(f"{path}: invalid JSON ({e})") from e
    if not isinstance(d, dict):
        raise ConfigError(f"{path}: scenario must be a JSON object")
    d.setdefault("kind", "grid")
    if d["kind"] not in ("grid", "crossover"):
        raise ConfigError(f"{path}: unknown scenario kind {d['kind']!r}")
    return d


def run_scenario_file(path, out, progress=None):
    """Runs a scenario file and writes its CSV; returns the result object."""
    d = load_scenario(path)
    if d.pop("kind") == "crossover":
        start, stop = d.pop("f_start", 0.01), d.pop("f_stop", 0.45)
        step = d.pop("f_step", 0.01)
        try:
            rows = compare_crossover(fraction_sweep(start, stop, step), progress=progress, **d)
        except TypeError as e:
            raise ConfigError(f"{path}: {e}") from e
        write_crossover_csv(rows, out)
        return rows
    try:
        scenario = Scenario.from_dict(d)
    except (TypeError, ValueError) as e:
        raise ConfigError(f"{path}: {e}") from e
    result = run_scenario(scenario, progress=progress)
    out = Path(out)
    write_result_csv(result, out, out.with_name(out.stem + "_runs.csv"))
    return result
