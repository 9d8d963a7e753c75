"""Numerical laboratory for a two-atom ionization model in a cloud chamber.

A heavy test particle, emitted from the origin as a spherical wave, can
ionize two model atoms pinned at macroscopic distances.  The second-order
double-ionization amplitude is a pair of highly oscillatory integrals whose
phases have stationary points only when both atoms are collinear with the
source.  This package provides the closed-form kernels of the model, the
phase analysis (critical points, Hessians, gradient-norm lower bounds),
randomized quasi-Monte Carlo estimators for the oscillatory integrals, the
stationary-phase leading term, probability scans, and a reproducible batch
harness.
"""

__version__ = "0.1.0"

from .config import (
    ConfigError,
    DimensionlessGroups,
    PhysicalConfig,
    PotentialSpec,
    RegimeWarning,
    build_groups,
)

__all__ = [
    "ConfigError",
    "DimensionlessGroups",
    "PhysicalConfig",
    "PotentialSpec",
    "RegimeWarning",
    "build_groups",
    "__version__",
]
