"""Periodic unit-cell microstructures of spheres and flat-capped cylinders.

Two generators are provided: random sequential adsorption
(:func:`generate`) and soft-contact dynamics that pushes an overlapping
start apart (:func:`relax`). Samples can be validated, voxelized and
benchmarked.
"""

from .errors import ConfigError, IntegrationError, NonConvergence, Stagnation
from .geom import CylinderInc, Disk, SphereInc
from .intersect import Contact, ContactKind, contacts, any_intersection
from .forces import accumulate, force_for_contact
from .md import MdParams, MdState, init_overlapping, md_step, relax
from .periodic import all_contacts
from .rsa import RsaConfig, Strategy, generate
from .sample import RveSample, SampleFormatError
from .voxel import VoxelGrid, total_overlap_mc, volume_fraction, voxelize

__version__ = "0.1.0"

__all__ = [
    "ConfigError",
    "Contact",
    "ContactKind",
    "CylinderInc",
    "Disk",
    "IntegrationError",
    "MdParams",
    "MdState",
    "NonConvergence",
    "RsaConfig",
    "RveSample",
    "SampleFormatError",
    "SphereInc",
    "Stagnation",
    "Strategy",
    "VoxelGrid",
    "accumulate",
    "all_contacts",
    "any_intersection",
    "contacts",
    "force_for_contact",
    "generate",
    "init_overlapping",
    "md_step",
    "relax",
    "total_overlap_mc",
    "voxelize",
    "volume_fraction",
]
