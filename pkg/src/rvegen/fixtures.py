"""Two-body relaxation scenarios with known qualitative outcomes.

Each scenario places one overlapping pair near the middle of the cell,
names the contact kind(s) the classifier must report initially, and
provides a predicate on the relaxed configuration (for example, that an
off-centre push makes a cylinder turn while a centred one does not).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .geom import CylinderInc, SphereInc
from .md import MdParams, MdState, md_step, resolve_params
from .periodic import all_contacts
from .sample import RveSample

CENTER = np.array([0.5, 0.5, 0.5])
R_CYL = 0.05
HALF = 0.15
R_SPH = 0.08


def _unit(v):
    v = np.asarray(v, dtype=float)
    return v / np.linalg.norm(v)


def _cyl(offset, direction, r=R_CYL, half=HALF):
    return CylinderInc(CENTER + np.asarray(offset, dtype=float), r, _unit(direction) * half)


def _sph(offset, r=R_SPH):
    return SphereInc(CENTER + np.asarray(offset, dtype=float), r)


def axis_angle(u, v) -> float:
    """Angle between two axis directions, ignoring orientation."""
    c = abs(float(np.dot(_unit(u), _unit(v))))
    return float(np.arccos(min(1.0, c)))


@dataclass
class Outcome:
    initial: list
    final: list
    kinds_seen: list
    steps: int
    contacts_left: int


@dataclass
class PairScenario:
    name: str
    description: str
    shapes: list
    initial_kinds: set
    check: Callable[[Outcome], bool]
    expect_kinds_later: list = field(default_factory=list)

    def passed(self, outcome: Outcome) -> bool:
        """Initial kinds match, relaxation ends contact-free, the predicate
        holds and every expected later kind set was visited."""
        return (
            set(outcome.kinds_seen[0]) == self.initial_kinds
            and outcome.contacts_left == 0
            and self.check(outcome)
            and all(k in outcome.kinds_seen for k in self.expect_kinds_later)
        )

    def sample(self) -> RveSample:
        spheres = [s for s in self.shapes if isinstance(s, SphereInc)]
        cylinders = [s for s in self.shapes if isinstance(s, CylinderInc)]
        return RveSample(spheres, cylinders, {"scenario": self.name}, 0, "MD")


def relax_pair(scenario: PairScenario, params: MdParams | None = None,
               max_steps: int = 100_000) -> Outcome:
    """Relax a scenario step by step, recording the contact kinds seen."""
    sample = scenario.sample()
    state = MdState.from_sample(sample)
    params = resolve_params(state, params or MdParams())
    seen = []
    kinds = sorted({c.kind.name for c in all_contacts(sample.shapes)})
    seen.append(kinds)
    steps = 0
    while steps < max_steps and state.n_contacts:
        md_step(state, params)
        steps += 1
        if state.n_contacts:
            kinds = sorted({c.kind.name for c in all_contacts(state.to_sample().shapes)})
            if kinds != seen[-1]:
                seen.append(kinds)
    # let the pair coast to rest so the final shapes are contact-free and settled
    for _ in range(200):
        md_step(state, params)
        if state.n_contacts:
            break
    final = state.to_sample()
    return Outcome(
        initial=sample.spheres + sample.cylinders,
        final=final.spheres + final.cylinders,
        kinds_seen=seen,
        steps=steps,
        contacts_left=len(all_contacts(final.shapes)),
    )


def _turned(i, tol=1e-3):
    def f(o: Outcome):
        return axis_angle(o.initial[i].half_axis, o.final[i].half_axis) > tol
    return f


def _still(i, tol=1e-6):
    def f(o: Outcome):
        return axis_angle(o.initial[i].half_axis, o.final[i].half_axis) < tol
    return f


def _on_line(tol=1e-6):
    """Both centers stay on the line through their initial centers."""

    def f(o: Outcome):
        p0, q0 = o.initial[0].center, o.initial[1].center
        d = _unit(q0 - p0)
        for s in o.final:
            r = s.center - p0
            r -= np.round(r)  # periodic wrap
            if np.linalg.norm(r - np.dot(r, d) * d) > tol:
                return False
        return True

    return f


def _all(*preds):
    return lambda o: all(p(o) for p in preds)


def _separated_along(i, j, direction):
    """The center of ``j`` moved away from ``i`` along ``direction``."""
    d = _unit(direction)

    def f(o: Outcome):
        before = np.dot(o.initial[j].center - o.initial[i].center, d)
        r = o.final[j].center - o.final[i].center
        r -= np.round(r)
        return float(np.dot(r, d)) > before

    return f


def scenarios() -> list[PairScenario]:
    ex, ey, ez = np.eye(3)
    return [
        PairScenario(
            "two-spheres", "Two equal spheres overlapping along x.",
            [_sph(-0.06 * ex), _sph(0.06 * ex)], {"SS"}, _on_line(),
        ),
        PairScenario(
            "sphere-cylinder-symmetric",
            "Sphere against the middle of the lateral face; no rotation expected.",
            [_sph(0.10 * ex), _cyl(0 * ex, ez)], {"SC2"},
            _all(_still(1), _separated_along(1, 0, ex)),
        ),
        PairScenario(
            "sphere-cylinder-off-centre",
            "Sphere against the lateral face near one end; the cylinder turns.",
            [_sph(0.10 * ex + 0.10 * ez), _cyl(0 * ex, ez)], {"SC2"}, _turned(1),
        ),
        PairScenario(
            "sphere-cylinder-axial-base",
            "Sphere on the axis, center just inside the cap plane.",
            [_sph(0.14 * ez), _cyl(0 * ex, ez)], {"SC2"}, lambda o: True,
        ),
        PairScenario(
            "sphere-cylinder-base",
            "Sphere beyond the cap, close to the axis; pushed off along the axis.",
            [_sph(0.02 * ex + 0.20 * ez), _cyl(0 * ex, ez)], {"SC3"},
            _separated_along(1, 0, ez),
        ),
        PairScenario(
            "sphere-cylinder-base-rim",
            "Sphere beyond the cap, off the axis, touching the cap rim.",
            [_sph(0.08 * ex + 0.20 * ez), _cyl(0 * ex, ez)], {"SC4"}, lambda o: True,
        ),
        PairScenario(
            "cylinders-crossed-symmetric",
            "Perpendicular cylinders crossing at their middles; neither turns.",
            [_cyl(0 * ex, ez), _cyl(0.08 * ex, ey)], {"CC1"}, _all(_still(0), _still(1)),
        ),
        PairScenario(
            "cylinders-crossed-one-end",
            "Crossing near one end of the first cylinder only; it alone turns.",
            [_cyl(0 * ex, ez), _cyl(0.08 * ex + 0.10 * ez, ey)], {"CC1"},
            _all(_turned(0), _still(1)),
        ),
        PairScenario(
            "cylinders-crossed-both-ends",
            "Crossing off the middle of both cylinders; both turn.",
            [_cyl(0 * ex, ez), _cyl(0.08 * ex + 0.10 * ey + 0.10 * ez, ey)], {"CC1"},
            _all(_turned(0), _turned(1)),
        ),
        PairScenario(
            "cylinders-coplanar-base",
            "Axes in one plane; a tilted cap cuts the side of the other cylinder.",
            [_cyl(0 * ex, ez), _cyl(0.16 * ex - 0.04 * ez, [np.cos(0.3), 0, np.sin(0.3)])],
            {"CD1"}, _turned(1),
        ),
        PairScenario(
            "cylinders-parallel",
            "Parallel axes, overlapping side by side and at the caps.",
            [_cyl(0 * ex, ez), _cyl(0.04 * ex + 0.20 * ez, ez)], {"CC1", "CD2"},
            lambda o: True, expect_kinds_later=[["CC1", "CD1"]],
        ),
        PairScenario(
            "cylinders-skew-base",
            "Skew axes; one cap cuts the side of the other cylinder.",
            [_cyl(0 * ex, ez), _cyl([0.01, -0.02, -0.22], [0.08, -0.87, -0.48])],
            {"CD1"}, lambda o: True,
        ),
        PairScenario(
            "cylinders-skew-base-tilted",
            "Skew axes, steeper tilt; one cap cuts the side of the other cylinder.",
            [_cyl(0 * ex, ez), _cyl([-0.04, -0.05, 0.15], [0.5329, 0.6661, 0.5218])],
            {"CD1"}, lambda o: True,
        ),
        PairScenario(
            "cylinders-bases",
            "Two caps cutting through each other; the second cap reaches deeper.",
            [_cyl(0 * ex, ez), _cyl([0.14, -0.12, -0.21], [0.8788, -0.4559, -0.1410])],
            {"D1"}, lambda o: True,
        ),
        PairScenario(
            "cylinders-bases-reversed",
            "Two caps cutting through each other; the first cap reaches deeper.",
            [_cyl(0 * ex, ez), _cyl([-0.14, 0.10, -0.18], [-0.8431, 0.5334, -0.0688])],
            {"D2"}, lambda o: True,
        ),
        PairScenario(
            "cylinders-axes-meet",
            "Axes intersect inside both cylinders.",
            [_cyl(0 * ex, ez), _cyl(0.10 * ex, ex)], {"CC1"}, lambda o: True,
        ),
    ]
