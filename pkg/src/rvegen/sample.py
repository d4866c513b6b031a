"""The generated microstructure and its JSON file format.

Floats are written with Python's shortest round-trip representation, so a
parse/emit cycle reproduces every coordinate bit-for-bit.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .geom import CylinderInc, SphereInc

FORMAT_VERSION = 1


class SampleFormatError(ValueError):
    pass


@dataclass(eq=False)
class RveSample:
    spheres: list = field(default_factory=list)
    cylinders: list = field(default_factory=list)
    config: dict = field(default_factory=dict)
    seed: int | None = None
    provenance: str = "RSA"

    @property
    def shapes(self) -> list:
        """Spheres followed by cylinders; indices used by contact sweeps."""
        return list(self.spheres) + list(self.cylinders)

    @property
    def sphere_volume(self) -> float:
        return float(sum(s.volume for s in self.spheres))

    @property
    def cylinder_volume(self) -> float:
        return float(sum(c.volume for c in self.cylinders))

    def to_dict(self) -> dict:
        return {
            "version": FORMAT_VERSION,
            "domain_edge": 1.0,
            "seed": self.seed,
            "provenance": self.provenance,
            "config": self.config,
            "spheres": [
                {"center": [float(x) for x in s.center], "radius": float(s.radius)}
                for s in self.spheres
            ],
            "cylinders": [
                {
                    "center": [float(x) for x in c.center],
                    "radius": float(c.radius),
                    "half_axis": [float(x) for x in c.half_axis],
                }
                for c in self.cylinders
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1, allow_nan=False)

    @classmethod
    def from_dict(cls, d: dict) -> RveSample:
        try:
            if d.get("version") != FORMAT_VERSION:
                raise SampleFormatError(f"unsupported sample version {d.get('version')!r}")
            if float(d.get("domain_edge", 1.0)) != 1.0:
                raise SampleFormatError("domain_edge must be 1.0")
            spheres = [SphereInc(np.array(s["center"]), s["radius"]) for s in d["spheres"]]
            cylinders = [
                CylinderInc(np.array(c["center"]), c["radius"], np.array(c["half_axis"]))
                for c in d["cylinders"]
            ]
        except (KeyError, TypeError, ValueError) as e:
            if isinstance(e, SampleFormatError):
                raise
            raise SampleFormatError(f"malformed sample: {e}") from e
        return cls(
            spheres=spheres,
            cylinders=cylinders,
            config=dict(d.get("config") or {}),
            seed=d.get("seed"),
            provenance=str(d.get("provenance", "RSA")),
        )

    @classmethod
    def from_json(cls, text: str) -> RveSample:
        try:
            d = json.loads(text)
        except json.JSONDecodeError as e:
            raise SampleFormatError(f"invalid JSON: {e}") from e
        if not isinstance(d, dict):
            raise SampleFormatError("sample file must hold a JSON object")
        return cls.from_dict(d)

    def write(self, path) -> None:
        Path(path).write_text(self.to_json() + "\n")

    @classmethod
    def read(cls, path) -> RveSample:
        return cls.from_json(Path(path).read_text())

    def translated(self, shift) -> RveSample:
        """Every inclusion moved by ``shift`` and re-wrapped into the cell."""
        from .periodic import wrapped

        shift = np.asarray(shift, dtype=float)
        return RveSample(
            spheres=[wrapped(s.translated(shift)) for s in self.spheres],
            cylinders=[wrapped(c.translated(shift)) for c in self.cylinders],
            config=dict(self.config),
            seed=self.seed,
            provenance=self.provenance,
        )
