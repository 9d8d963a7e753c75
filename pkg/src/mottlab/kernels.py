"""Closed-form kernels of the point-interaction atom model.

Positions are measured in units of the atom size (x = R/gamma) and momenta
in inverse atom sizes (y = gamma*k).  Every function broadcasts over
leading axes; vector arguments have shape (..., 3).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .config import PotentialSpec

__all__ = [
    "atom_energy",
    "bound_state",
    "continuum_state",
    "wave_normalization",
    "spherical_wave",
    "form_factor",
    "form_factor_completeness",
    "QuadratureResolution",
    "form_factor_quadrature",
    "coupling_kernel",
    "envelope",
]

TWO_PI = 2.0 * math.pi

# Below this |xi| the scattered-wave term of the form factor is evaluated by
# series; the two closed-form terms cancel to O(|xi|^2) and lose precision.
_SMALL_XI = 1e-4


def atom_energy(y: np.ndarray) -> np.ndarray:
    """Dimensionless total energy (1 + |y|^2)/2 of an ionized atom."""
    y = np.asarray(y, dtype=float)
    return 0.5 * (1.0 + np.sum(y * y, axis=-1))


def bound_state(x: np.ndarray) -> np.ndarray:
    """Ground state exp(-|x|)/(sqrt(2 pi) |x|) of the point interaction.

    Diverges at the origin; callers integrate it against the r^2 volume
    weight, which removes the singularity.
    """
    x = np.asarray(x, dtype=float)
    r = np.sqrt(np.sum(x * x, axis=-1))
    if np.any(r == 0.0):
        raise ValueError("bound_state is undefined at the origin")
    return np.exp(-r) / (np.sqrt(TWO_PI) * r)


def continuum_state(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Generalized eigenfunction: plane wave minus the s-wave scattered term.

    The scattered wave carries the point-interaction amplitude 1/(1 - i|y|),
    so its modulus is (1 + |y|^2)^(-1/2).
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    r = np.sqrt(np.sum(x * x, axis=-1))
    if np.any(r == 0.0):
        raise ValueError("continuum_state is undefined at the origin")
    t = np.sqrt(np.sum(y * y, axis=-1))
    plane = np.exp(1j * np.sum(y * x, axis=-1))
    scattered = np.exp(-1j * t * r) / ((1.0 - 1j * t) * r)
    return TWO_PI**-1.5 * (plane - scattered)


def wave_normalization(epsilon: float) -> float:
    """Normalization constant of the outgoing spherical wave."""
    if epsilon <= 0.0:
        raise ValueError("epsilon must be positive")
    return 1.0 / (4.0 * math.pi**1.75 * math.sqrt(1.0 - math.exp(-1.0 / epsilon**2)))


def spherical_wave(x: np.ndarray, epsilon: float) -> np.ndarray:
    """Radial profile of the initial spherical wave, 4 pi N e^{-|x|^2/2} sin(|x|/eps)/|x|.

    The value depends on x only through |x|; the |x| -> 0 singularity is
    removable (sin(r/eps)/r -> 1/eps).  The overall dimensional factor
    gamma^{-1/2} of the wave function cancels in every probability formula
    and is not represented.
    """
    x = np.asarray(x, dtype=float)
    r = np.sqrt(np.sum(x * x, axis=-1))
    n = wave_normalization(epsilon)
    small = r < 1e-12
    rsafe = np.where(small, 1.0, r)
    radial = np.where(small, 1.0 / epsilon, np.sin(rsafe / epsilon) / rsafe)
    return 4.0 * math.pi * n * np.exp(-0.5 * r * r) * radial


def form_factor(xi: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Overlap of the momentum-shifted bound state with a continuum state.

    Closed form from the two radial Fourier identities
        FT[e^{-m r}/r](k)   = 4 pi / (k^2 + m^2)
        FT[e^{-m r}/r^2](k) = (4 pi / k) arctan(k / m)
    the second analytically continued to m = 1 - i|y| (principal branch;
    Re m = 1 keeps the arctan branch cut away):

        h(xi, y) = (2 pi)^{-7/2} [ 4 pi / (1 + |xi + y|^2)
                   - 4 pi / ((1 + i|y|) |xi|) * arctan(|xi| / (1 - i|y|)) ]

    Vanishes identically at xi = 0 (the bound state is orthogonal to every
    continuum state); below |xi| = 1e-4 the arctan term is evaluated by
    series to avoid the 0/0 cancellation.
    """
    xi = np.asarray(xi, dtype=float)
    y = np.asarray(y, dtype=float)
    s = np.sqrt(np.sum(xi * xi, axis=-1))
    t = np.sqrt(np.sum(y * y, axis=-1))
    m = 1.0 - 1j * t
    first = 4.0 * math.pi / (1.0 + np.sum((xi + y) ** 2, axis=-1))
    small = s < _SMALL_XI
    ssafe = np.where(small, 1.0, s)
    arctan_over_s = np.where(
        small,
        1.0 / m - s**2 / (3.0 * m**3) + s**4 / (5.0 * m**5),
        np.arctan(ssafe / m) / ssafe,
    )
    second = 4.0 * math.pi / (1.0 + 1j * t) * arctan_over_s
    return TWO_PI**-3.5 * (first - second)


def form_factor_completeness(xi_norm: float) -> float:
    """Closed form of the momentum integral of |form_factor|^2 at fixed |xi|.

    The continuum transform is an isometry on the orthogonal complement of
    the bound state, so the integral equals
        (2 pi)^{-3} (1 - ((2/|xi|) arctan(|xi|/2))^2),
    strictly below the operator-norm ceiling (2 pi)^{-3}.
    """
    if xi_norm == 0.0:
        return 0.0
    overlap = (2.0 / xi_norm) * math.atan(xi_norm / 2.0)
    return TWO_PI**-3 * (1.0 - overlap**2)


@dataclass(frozen=True)
class QuadratureResolution:
    """Spherical tensor-product resolution for the direct form-factor integral."""

    n_radial: int = 320
    n_polar: int = 96
    n_azimuth: int = 128
    cutoff: float = 35.0

    def refined(self) -> "QuadratureResolution":
        return QuadratureResolution(
            n_radial=2 * self.n_radial,
            n_polar=2 * self.n_polar,
            n_azimuth=2 * self.n_azimuth,
            cutoff=self.cutoff + 5.0,
        )


def _radial_tail_bound(cutoff: float, y_norm: float) -> float:
    """Bound on the neglected |integrand| mass beyond the radial cutoff.

    |continuum_state| <= (2 pi)^{-3/2} (1 + c/r) with c = (1+|y|^2)^{-1/2},
    so the tail is below const * (cutoff + 1 + c) * exp(-cutoff).
    """
    c = 1.0 / math.sqrt(1.0 + y_norm**2)
    pref = TWO_PI**-1.5 * TWO_PI**-1.5 * 4.0 * math.pi / math.sqrt(TWO_PI)
    return pref * (cutoff + 1.0 + c) * math.exp(-cutoff)


def form_factor_quadrature(
    xi: np.ndarray,
    y: np.ndarray,
    resolution: QuadratureResolution | None = None,
    tolerance: float = 1e-9,
) -> complex:
    """Direct spherical quadrature of the form-factor integral.

    Independent check of the closed form: integrates
    (2 pi)^{-3/2} e^{-i xi.x} conj(continuum_state(x, y)) bound_state(x)
    on a Gauss-Legendre (radius, cos polar) x trapezoid (azimuth) grid.

    Raises ValueError when the analytic tail bound beyond the radial cutoff
    exceeds ``tolerance``.
    """
    res = resolution or QuadratureResolution()
    xi = np.asarray(xi, dtype=float).reshape(3)
    y = np.asarray(y, dtype=float).reshape(3)
    tail = _radial_tail_bound(res.cutoff, float(np.linalg.norm(y)))
    if tail > tolerance:
        raise ValueError(
            f"radial cutoff {res.cutoff} leaves tail {tail:.2e} > tolerance {tolerance:.2e}"
        )
    xr, wr = np.polynomial.legendre.leggauss(res.n_radial)
    r = 0.5 * res.cutoff * (xr + 1.0)
    wr = 0.5 * res.cutoff * wr
    xc, wc = np.polynomial.legendre.leggauss(res.n_polar)
    az = TWO_PI * np.arange(res.n_azimuth) / res.n_azimuth
    waz = TWO_PI / res.n_azimuth
    st = np.sqrt(1.0 - xc**2)
    dirs = np.stack(
        [
            np.outer(st, np.cos(az)),
            np.outer(st, np.sin(az)),
            np.outer(xc, np.ones(res.n_azimuth)),
        ],
        axis=-1,
    )
    acc = 0.0 + 0.0j
    for i in range(res.n_radial):
        pts = r[i] * dirs
        vals = (
            np.exp(-1j * np.tensordot(pts, xi, axes=([-1], [0])))
            * np.conj(continuum_state(pts, y))
            * bound_state(pts)
        )
        acc += wr[i] * r[i] ** 2 * waz * np.einsum("tp,t->", vals, wc)
    return complex(TWO_PI**-1.5 * acc)


def coupling_kernel(xi: np.ndarray, y: np.ndarray, pot: PotentialSpec) -> np.ndarray:
    """Interaction kernel: potential transform times form factor."""
    return pot.transform(xi) * form_factor(xi, y)


def envelope(w: np.ndarray) -> np.ndarray:
    """Gaussian spatial envelope exp(-|w|^2/2) of the initial wave packet."""
    w = np.asarray(w, dtype=float)
    return np.exp(-0.5 * np.sum(w * w, axis=-1))
