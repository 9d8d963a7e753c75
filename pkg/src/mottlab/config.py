"""Dimensionless experiment configuration and derived order-one groups.

All physics in this package is expressed in the dimensionless variables
x = R/gamma (positions in units of the atom size) and y = gamma*k
(momenta in inverse atom sizes).  A single experiment is specified by the
semiclassical parameter epsilon together with ratios of the remaining
scales; everything downstream consumes the derived groups (a, b1, b2, ...).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "ConfigError",
    "RegimeWarning",
    "PotentialSpec",
    "PhysicalConfig",
    "DimensionlessGroups",
    "build_groups",
    "atom_axes",
]


class ConfigError(ValueError):
    """A hard invariant of the experiment configuration is violated."""


class RegimeWarning(UserWarning):
    """The configuration leaves the asymptotic regime the estimates assume.

    Out-of-regime runs are allowed (they are useful for contrast studies),
    so these are warnings, never errors.
    """


@dataclass(frozen=True)
class PotentialSpec:
    """Momentum-space interaction profile.

    Only the Fourier transform of the two-body potential ever enters the
    amplitudes, so the profile is specified directly in momentum space:

        vt(q) = amplitude * exp(-|q|^2 * width^2 / 2)

    ``width`` is the real-space width of the potential; larger width means
    faster momentum decay.  A Gaussian is the default stand-in for a generic
    smooth, rapidly decaying potential.
    """

    kind: str = "gaussian"
    amplitude: float = 1.0
    width: float = 1.0

    def __post_init__(self):
        if self.kind != "gaussian":
            raise ConfigError(f"unsupported potential kind: {self.kind!r}")
        if not math.isfinite(self.amplitude):
            raise ConfigError("potential.amplitude must be finite")
        if not (self.width > 0.0) or not math.isfinite(self.width):
            raise ConfigError("potential.width must be positive and finite")

    def transform(self, q: np.ndarray) -> np.ndarray:
        """vt(q) for q of shape (..., 3)."""
        q = np.asarray(q, dtype=float)
        return self.amplitude * np.exp(-0.5 * np.sum(q * q, axis=-1) * self.width**2)


@dataclass(frozen=True)
class PhysicalConfig:
    """Dimensionless inputs defining one experiment.

    epsilon        -- ratio of the test particle's wavelength to the atom size
    mass_ratio     -- atom mass over test-particle mass, m/M
    a1_over_gamma  -- distance of the near atom in units of the atom size
    a2_over_a1     -- far/near distance ratio, >= 1
    chi            -- angle between the two atom directions, radians in [0, pi]
    chi_bar        -- configured limit of chi/epsilon for the almost-aligned
                      leading term (0 recovers exact alignment)
    t_over_tau2    -- observation time over the flight time to the far atom, > 1
    lambda0        -- coupling in units of the test particle's kinetic energy
    """

    epsilon: float
    mass_ratio: float
    a1_over_gamma: float
    a2_over_a1: float
    chi: float
    chi_bar: float
    t_over_tau2: float
    lambda0: float
    potential: PotentialSpec = field(default_factory=PotentialSpec)

    def __post_init__(self):
        if not (self.epsilon > 0.0):
            raise ConfigError("epsilon must be positive")
        if not (self.mass_ratio > 0.0):
            raise ConfigError("mass_ratio must be positive")
        if not (self.a1_over_gamma > 0.0):
            raise ConfigError("a1_over_gamma must be positive")
        if self.a2_over_a1 < 1.0:
            raise ConfigError(
                "a2_over_a1 must be >= 1 (the near atom is listed first)"
            )
        if not (0.0 <= self.chi <= math.pi):
            raise ConfigError("chi must lie in [0, pi]")
        if self.t_over_tau2 <= 1.0:
            raise ConfigError(
                "t_over_tau2 must exceed 1 (observe after the far flight time)"
            )
        if self.lambda0 < 0.0:
            raise ConfigError("lambda0 must be nonnegative")

    @property
    def a2_over_gamma(self) -> float:
        return self.a2_over_a1 * self.a1_over_gamma

    def regime_report(self) -> list[str]:
        """Messages for violated smallness assumptions; empty when in regime.

        The estimates assume epsilon << 1 with gamma/|a_j|, m/M and lambda0
        all of order epsilon.  A factor of 10 either way counts as in-regime.
        """
        msgs = []
        if self.epsilon >= 0.5:
            msgs.append(f"epsilon = {self.epsilon:g} is not small")
        for label, dist in (("a1", self.a1_over_gamma), ("a2", self.a2_over_gamma)):
            r = (1.0 / dist) / self.epsilon
            if not (0.1 <= r <= 10.0):
                msgs.append(
                    f"gamma/|{label}| = {1.0 / dist:g} is not O(epsilon) "
                    f"(ratio {r:g})"
                )
        r = self.mass_ratio / self.epsilon
        if not (0.1 <= r <= 10.0):
            msgs.append(f"mass_ratio = {self.mass_ratio:g} is not O(epsilon) (ratio {r:g})")
        r = self.lambda0 / self.epsilon
        if self.lambda0 > 0.0 and not (0.1 <= r <= 10.0):
            msgs.append(f"lambda0 = {self.lambda0:g} is not O(epsilon) (ratio {r:g})")
        return msgs


@dataclass(frozen=True)
class DimensionlessGroups:
    """Order-one groups parametrizing the oscillatory phases.

    a       -- rescaled observation time
    b1, b2  -- rescaled flight times to the two atoms (b1 < b2 <= a)
    c_coeff -- coefficient of the atom-energy phase terms: c_j(y) = c_coeff * atom_energy(y)
    kappa   -- accumulated coupling lambda*t/hbar, used only in prefactors
    """

    a: float
    b1: float
    b2: float
    c_coeff: float
    kappa: float

    def c_value(self, y: np.ndarray) -> np.ndarray:
        """Phase coefficient c_j for an atom ionized with momentum y."""
        from .kernels import atom_energy

        return self.c_coeff * atom_energy(y)


def build_groups(cfg: PhysicalConfig, *, emit_warnings: bool = True) -> DimensionlessGroups:
    """Derive the order-one groups from a configuration.

    Raises ConfigError for hard invariant violations (already enforced by
    PhysicalConfig); emits RegimeWarning for soft regime violations.
    """
    if emit_warnings:
        for msg in cfg.regime_report():
            warnings.warn(msg, RegimeWarning, stacklevel=2)
    # b2 and a are computed through the same product so that a = b2 * t/tau2
    # holds exactly in floating point.
    b1 = cfg.epsilon * cfg.a1_over_gamma
    b2 = cfg.epsilon * (cfg.a2_over_a1 * cfg.a1_over_gamma)
    a = b2 * cfg.t_over_tau2
    c_coeff = cfg.epsilon * (1.0 / cfg.mass_ratio) * a
    kappa = cfg.lambda0 * a / cfg.epsilon**2
    return DimensionlessGroups(a=a, b1=b1, b2=b2, c_coeff=c_coeff, kappa=kappa)


def atom_axes(chi: float) -> tuple[np.ndarray, np.ndarray]:
    """Canonical unit vectors toward the two atoms.

    The near atom sits on the +z axis and the far atom in the xz-plane at
    angle chi.  All outputs of the package depend on the geometry only
    through (|a1|/gamma, |a2|/gamma, chi), so this frame is fully general.
    """
    a1_hat = np.array([0.0, 0.0, 1.0])
    a2_hat = np.array([math.sin(chi), 0.0, math.cos(chi)])
    return a1_hat, a2_hat
