"""Randomized quasi-Monte Carlo engines for the oscillatory graph integrals.

Estimators are randomly shifted low-discrepancy point sets with a fixed
replicate count; the replicate spread provides the standard error.  All
accumulation runs over fixed-size blocks with numpy's pairwise summation,
so results are bit-identical for a given (plan, seed) regardless of how
the work is scheduled.

The Gaussian factors of the amplitude (the two potential transforms and
the spatial envelope) form, for fixed time fractions, an exact Gaussian
density in the six momentum variables.  The integrators sample that
density in closed form, which removes the envelope dead zones and leaves
only the form factors and unit-modulus phases in the integrand.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy import special
from scipy.stats import qmc

from .config import DimensionlessGroups, PhysicalConfig, atom_axes
from .kernels import form_factor
from .phase import GraphOrder, critical_point_closed_form

__all__ = [
    "QuadraturePlan",
    "SphereDecomposition",
    "OscEstimate",
    "Region",
    "TailBoundError",
    "decompose_sphere",
    "sample_nodes",
    "map_to_sphere",
    "map_to_cap",
    "map_to_simplex",
    "map_gaussian_interval",
    "map_gaussian_box",
    "integrate_graph",
    "integrate_graph_pair",
    "integrate_cap",
    "stationary_leading_term",
    "leading_integrand",
    "integrate_surrogate",
    "surrogate_closed_form",
]

TWO_PI = 2.0 * math.pi

# Fixed accumulation block; constant so the reduction tree never depends on
# memory pressure or scheduling.
_BLOCK = 1 << 17


class TailBoundError(ValueError):
    """Truncation radius too small for the requested tail tolerance."""


class Region(Enum):
    CAP = "cap"
    COMPLEMENT = "complement"


@dataclass(frozen=True)
class QuadraturePlan:
    """Sampling budget for one oscillatory estimate.

    point_count points per replicate; ``replicates`` independent random
    shifts supply the error bar.  ``truncation_radius`` bounds every
    momentum coordinate.
    """

    point_count: int = 1 << 16
    seed: int = 1
    truncation_radius: float = 7.0
    sequence_kind: str = "sobol"
    replicates: int = 8

    def __post_init__(self):
        if self.point_count < 2:
            raise ValueError("point_count must be at least 2")
        if self.truncation_radius <= 0.0:
            raise ValueError("truncation_radius must be positive")
        if self.sequence_kind not in ("sobol", "random"):
            raise ValueError("sequence_kind must be 'sobol' or 'random'")
        if self.replicates < 2:
            raise ValueError("replicates must be at least 2 for an error bar")


@dataclass(frozen=True)
class SphereDecomposition:
    """Aperture of the polar cap around the near-atom axis."""

    theta_bar: float

    def __post_init__(self):
        if not (0.0 < self.theta_bar < math.pi / 2.0):
            raise ValueError("theta_bar must lie in (0, pi/2)")

    @classmethod
    def from_epsilon(cls, epsilon: float, exponent: float = 0.5) -> "SphereDecomposition":
        """Aperture epsilon**exponent; any exponent in (0, 1) shrinks the cap
        slower than the oscillation scale."""
        if not (0.0 < exponent < 1.0):
            raise ValueError("exponent must lie in (0, 1)")
        return cls(theta_bar=epsilon**exponent)


@dataclass(frozen=True)
class OscEstimate:
    """RQMC estimate with replicate-based error bar.

    value        -- mean of the replicate estimates
    std_error    -- replicate spread / sqrt(replicates)
    n_points     -- total integrand evaluations
    replicate_values -- per-replicate estimates (for debiased |.|^2 probes)
    """

    value: complex
    std_error: float
    n_points: int
    replicate_values: tuple = ()

    def mass_debiased(self) -> float:
        """Unbiased estimate of |true value|^2, clipped at zero.

        |mean|^2 overestimates |true|^2 by the estimator variance; the
        replicate sample variance removes that bias.
        """
        z = np.asarray(self.replicate_values, dtype=complex)
        if z.size < 2:
            return abs(self.value) ** 2
        m = z.mean()
        var_mean = float(np.sum(np.abs(z - m) ** 2) / (z.size - 1)) / z.size
        return max(abs(m) ** 2 - var_mean, 0.0)


def decompose_sphere(dec: SphereDecomposition, u_hat: np.ndarray) -> Region:
    """Classify a unit vector by polar angle against the cap aperture."""
    u = np.asarray(u_hat, dtype=float).reshape(3)
    if abs(np.dot(u, u) - 1.0) > 1e-10:
        raise ValueError("u_hat must be a unit vector")
    return Region.CAP if u[2] >= math.cos(dec.theta_bar) else Region.COMPLEMENT


# ---------------------------------------------------------------------------
# Node generation and measure-preserving maps
# ---------------------------------------------------------------------------


def _sobol_block(engine: qmc.Sobol, n: int) -> np.ndarray:
    # scipy warns when n is not a power of two; block draws are an
    # implementation detail of the fixed reduction tree, not a QMC design.
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", UserWarning)
        return engine.random(n)


def sample_nodes(plan: QuadraturePlan, dim: int) -> np.ndarray:
    """One deterministic point set in [0,1)^dim (no replicate shift applied)."""
    if dim < 1:
        raise ValueError("dim must be at least 1")
    if plan.sequence_kind == "sobol":
        engine = qmc.Sobol(d=dim, scramble=True, seed=plan.seed)
        return _sobol_block(engine, plan.point_count)
    rng = np.random.default_rng(plan.seed)
    return rng.random((plan.point_count, dim))


def map_to_sphere(u: np.ndarray) -> tuple[np.ndarray, float]:
    """[0,1)^2 -> S^2, uniform; returns (directions, surface measure 4 pi)."""
    ct = 1.0 - 2.0 * u[:, 0]
    ph = TWO_PI * u[:, 1]
    st = np.sqrt(np.maximum(1.0 - ct * ct, 0.0))
    dirs = np.stack([st * np.cos(ph), st * np.sin(ph), ct], axis=1)
    return dirs, 4.0 * math.pi


def map_to_cap(u: np.ndarray, theta_bar: float) -> tuple[np.ndarray, np.ndarray]:
    """[0,1)^2 -> cap chart; returns (directions, per-point surface weights).

    Samples (mu, nu) uniformly on the disc of radius sin(theta_bar); the
    spherical surface measure in the chart is dmu dnu / u3, so each point
    carries weight pi sin^2(theta_bar) / u3.
    """
    sbar = math.sin(theta_bar)
    r = sbar * np.sqrt(u[:, 0])
    ph = TWO_PI * u[:, 1]
    mu = r * np.cos(ph)
    nu = r * np.sin(ph)
    u3 = np.sqrt(1.0 - mu * mu - nu * nu)
    dirs = np.stack([mu, nu, u3], axis=1)
    return dirs, math.pi * sbar**2 / u3


def map_to_simplex(u: np.ndarray) -> tuple[np.ndarray, np.ndarray, float]:
    """[0,1)^2 -> {0 <= beta <= alpha <= 1}, uniform; measure 1/2."""
    alpha = np.maximum(u[:, 0], u[:, 1])
    beta = np.minimum(u[:, 0], u[:, 1])
    return alpha, beta, 0.5


def map_gaussian_interval(
    u: np.ndarray, radius: float, sigma: float = 1.0
) -> tuple[np.ndarray, np.ndarray]:
    """[0,1) -> [-radius, radius] through a truncated-Gaussian transport.

    Returns points and importance weights 1/density, so a weighted mean
    estimates the plain interval integral while the points concentrate
    where a width-sigma Gaussian factor lives.
    """
    c0 = special.ndtr(-radius / sigma)
    c1 = special.ndtr(radius / sigma)
    x = sigma * special.ndtri(c0 + u * (c1 - c0))
    x = np.clip(x, -radius, radius)
    w = (c1 - c0) * sigma * math.sqrt(TWO_PI) * np.exp(0.5 * (x / sigma) ** 2)
    return x, w


def map_gaussian_box(
    u: np.ndarray, radius: float, sigma: float = 1.0
) -> tuple[np.ndarray, np.ndarray]:
    """[0,1)^3 -> [-radius, radius]^3 coordinatewise; returns (points, weights)."""
    pts = np.empty_like(u)
    w = np.ones(u.shape[0])
    for k in range(u.shape[1]):
        pts[:, k], wk = map_gaussian_interval(u[:, k], radius, sigma)
        w *= wk
    return pts, w


def _check_tail(radius: float, width: float, tolerance: float = 1e-8) -> None:
    """Gaussian tail mass left outside the momentum boxes, union bound over
    the six coordinates of the two momenta."""
    tail = 6.0 * special.erfc(radius * width / math.sqrt(2.0))
    if tail > tolerance:
        raise TailBoundError(
            f"truncation radius {radius:g} leaves Gaussian tail {tail:.3e} "
            f"above tolerance {tolerance:.1e}"
        )


# ---------------------------------------------------------------------------
# RQMC core
# ---------------------------------------------------------------------------


def _replicate_streams(plan: QuadraturePlan, dim: int):
    """Yield per-replicate block generators of shifted nodes."""
    rng = np.random.default_rng(plan.seed)
    shifts = rng.random((plan.replicates, dim))
    for r in range(plan.replicates):
        if plan.sequence_kind == "sobol":
            engine = qmc.Sobol(d=dim, scramble=True, seed=plan.seed)

            def blocks(engine=engine, shift=shifts[r]):
                left = plan.point_count
                while left > 0:
                    n = min(_BLOCK, left)
                    left -= n
                    yield (_sobol_block(engine, n) + shift) % 1.0

        else:
            stream = np.random.default_rng(
                np.random.SeedSequence(entropy=plan.seed, spawn_key=(r,))
            )

            def blocks(stream=stream):
                left = plan.point_count
                while left > 0:
                    n = min(_BLOCK, left)
                    left -= n
                    yield stream.random((n, dim))

        yield blocks()


def _rqmc(plan: QuadraturePlan, dim: int, integrand) -> list[complex]:
    """Replicate estimates of the mean of ``integrand`` over [0,1)^dim.

    ``integrand`` maps a block of nodes (n, dim) to complex values (n,)
    that already include all measure weights.
    """
    estimates = []
    for stream in _replicate_streams(plan, dim):
        acc = 0.0 + 0.0j
        for block in stream:
            acc += complex(np.sum(integrand(block)))
        estimates.append(acc / plan.point_count)
    return estimates


def _finish(estimates: list[complex], n_points: int) -> OscEstimate:
    z = np.asarray(estimates, dtype=complex)
    m = complex(z.mean())
    se = math.sqrt(float(np.sum(np.abs(z - m) ** 2)) / (z.size - 1) / z.size)
    return OscEstimate(
        value=m, std_error=se, n_points=n_points, replicate_values=tuple(estimates)
    )


# ---------------------------------------------------------------------------
# Graph integrals
# ---------------------------------------------------------------------------


def _conditional_momenta(u6, alpha, beta, x, a, width):
    """Sample (eta, xi) from the Gaussian factors of the amplitude.

    For fixed (alpha, beta) the product of the two potential transforms and
    the envelope is exp(-Q/2) with, per spatial axis k,

        Q_k = width^2 eta_k^2 + width^2 xi_k^2 + (x_k + A eta_k + B xi_k)^2,
        A = a alpha, B = a beta.

    Returns (eta, xi, mass) with mass the closed-form Gaussian integral of
    exp(-Q/2); dividing the amplitude by the sampling density leaves
    amplitude * mass / exp(-Q/2), i.e. the Gaussian factors cancel exactly.
    """
    A = a * alpha
    B = a * beta
    w2 = width * width
    S = w2 + A * A + B * B
    l11 = np.sqrt(w2 + A * A)
    l21 = A * B / l11
    l22 = width * np.sqrt(S) / l11
    n = u6.shape[0]
    eta = np.empty((n, 3))
    xi = np.empty((n, 3))
    for k in range(3):
        z1 = special.ndtri(u6[:, k])
        z2 = special.ndtri(u6[:, 3 + k])
        t2 = z2 / l22
        t1 = (z1 - l21 * t2) / l11
        eta[:, k] = -x[k] * A / S + t1
        xi[:, k] = -x[k] * B / S + t2
    mass = (TWO_PI / (width * np.sqrt(S))) ** 3 * np.exp(
        -0.5 * float(np.dot(x, x)) * w2 / S
    )
    return eta, xi, mass


def _slow_phase_block(x, a, alpha, beta, eta, xi):
    return (
        eta @ x
        + xi @ x
        + 0.5
        * a
        * (
            alpha * np.sum(eta * eta, axis=1)
            + beta * np.sum(xi * xi, axis=1)
            + 2.0 * alpha * np.sum(eta * xi, axis=1)
        )
    )


def _graph_integrand_factory(
    orders: tuple[GraphOrder, ...],
    x: np.ndarray,
    y1: np.ndarray,
    y2: np.ndarray,
    cfg: PhysicalConfig,
    groups: DimensionlessGroups,
    plan: QuadraturePlan,
    region: str,
    theta_bar: float | None,
):
    """Build a block integrand returning one weighted column per order."""
    pot = cfg.potential
    a1_hat, a2_hat = atom_axes(cfg.chi)
    a = groups.a
    R = plan.truncation_radius
    width = pot.width
    amp2 = pot.amplitude**2
    x = np.asarray(x, dtype=float).reshape(3)
    y1 = np.asarray(y1, dtype=float).reshape(3)
    y2 = np.asarray(y2, dtype=float).reshape(3)
    c1 = float(groups.c_value(y1))
    c2 = float(groups.c_value(y2))
    eps = cfg.epsilon

    specs = []
    for order in orders:
        if order is GraphOrder.NEAR_FIRST:
            specs.append((groups.b2, a2_hat, c2, y2, groups.b1, a1_hat, c1, y1))
        else:
            specs.append((groups.b1, a1_hat, c1, y1, groups.b2, a2_hat, c2, y2))

    def integrand(u: np.ndarray) -> np.ndarray:
        if region == "cap":
            u_hat, w_sphere = map_to_cap(u[:, 0:2], theta_bar)
        else:
            u_hat, w_sphere = map_to_sphere(u[:, 0:2])
        alpha, beta, w_simplex = map_to_simplex(u[:, 2:4])
        eta, xi, mass = _conditional_momenta(u[:, 4:10], alpha, beta, x, a, width)
        inside = (np.max(np.abs(eta), axis=1) <= R) & (np.max(np.abs(xi), axis=1) <= R)
        drift = x[None, :] + a * (alpha[:, None] * eta + beta[:, None] * xi)
        u_dot_w = np.sum(u_hat * drift, axis=1)
        phi = _slow_phase_block(x, a, alpha, beta, eta, xi)
        base = amp2 * w_sphere * w_simplex * mass * inside
        cols = np.empty((u.shape[0], len(specs)), dtype=complex)
        for j, (b_eta, ah_eta, c_eta, y_eta, b_xi, ah_xi, c_xi, y_xi) in enumerate(specs):
            theta = (
                u_dot_w
                - b_eta * (eta @ ah_eta)
                - b_xi * (xi @ ah_xi)
                + c_eta * alpha
                + c_xi * beta
            )
            cols[:, j] = (
                form_factor(eta, y_eta[None, :])
                * form_factor(xi, y_xi[None, :])
                * np.exp(1j * (phi + theta / eps))
                * base
            )
        return cols

    return integrand


def _integrate_orders(
    orders, x, y1, y2, cfg, groups, plan, region="full", theta_bar=None
) -> list[OscEstimate]:
    if cfg.potential.amplitude == 0.0:
        zero = OscEstimate(
            value=0.0 + 0.0j,
            std_error=0.0,
            n_points=plan.point_count * plan.replicates,
            replicate_values=tuple([0.0 + 0.0j] * plan.replicates),
        )
        return [zero for _ in orders]
    _check_tail(plan.truncation_radius, cfg.potential.width)
    if region == "cap" and theta_bar is None:
        raise ValueError("cap region requires theta_bar")
    integrand = _graph_integrand_factory(
        tuple(orders), x, y1, y2, cfg, groups, plan, region, theta_bar
    )
    per_order: list[list[complex]] = [[] for _ in orders]
    for stream in _replicate_streams(plan, 10):
        acc = np.zeros(len(orders), dtype=complex)
        for block in stream:
            cols = integrand(block)
            # summing each contiguous column keeps the reduction tree
            # identical whether one or both orders are evaluated
            for j in range(len(orders)):
                acc[j] += complex(np.sum(np.ascontiguousarray(cols[:, j])))
        for j in range(len(orders)):
            per_order[j].append(complex(acc[j]) / plan.point_count)
    n = plan.point_count * plan.replicates
    return [_finish(est, n) for est in per_order]


def integrate_graph(
    order: GraphOrder,
    x: np.ndarray,
    y1: np.ndarray,
    y2: np.ndarray,
    cfg: PhysicalConfig,
    groups: DimensionlessGroups,
    plan: QuadraturePlan,
    region: str = "full",
    theta_bar: float | None = None,
) -> OscEstimate:
    """RQMC estimate of one graph's 10-dimensional oscillatory integral.

    ``region='full'`` integrates the direction over the whole sphere (the
    defining representation).  ``region='cap'`` restricts to the polar cap
    of the stated aperture, the piece that carries the entire stationary
    contribution; the complement is super-polynomially small in epsilon by
    the cone gradient bound and is the low-noise probe for scaling studies.
    """
    return _integrate_orders(
        [order], x, y1, y2, cfg, groups, plan, region, theta_bar
    )[0]


def integrate_graph_pair(
    x: np.ndarray,
    y1: np.ndarray,
    y2: np.ndarray,
    cfg: PhysicalConfig,
    groups: DimensionlessGroups,
    plan: QuadraturePlan,
    region: str = "full",
    theta_bar: float | None = None,
) -> tuple[OscEstimate, OscEstimate]:
    """Both graph orders on shared nodes: (near-first, far-first)."""
    near, far = _integrate_orders(
        [GraphOrder.NEAR_FIRST, GraphOrder.FAR_FIRST],
        x,
        y1,
        y2,
        cfg,
        groups,
        plan,
        region,
        theta_bar,
    )
    return near, far


# ---------------------------------------------------------------------------
# Cap-reduced integral at fixed (eta1, eta2)
# ---------------------------------------------------------------------------


def integrate_cap(
    eta1: float,
    eta2: float,
    x: np.ndarray,
    y1: np.ndarray,
    y2: np.ndarray,
    cfg: PhysicalConfig,
    groups: DimensionlessGroups,
    dec: SphereDecomposition,
    plan: QuadraturePlan,
) -> OscEstimate:
    """8-dimensional cap integral at fixed transverse momenta (eta1, eta2).

    Integrates the aligned-phase near-first amplitude (including the
    almost-aligned residual factor built from cfg.chi) over directions in
    the cap, both time fractions, eta3 and xi.  This is the object whose
    epsilon -> 0 limit is the stationary-phase leading term.
    """
    if cfg.potential.amplitude == 0.0:
        return OscEstimate(
            value=0.0 + 0.0j,
            std_error=0.0,
            n_points=plan.point_count * plan.replicates,
            replicate_values=tuple([0.0 + 0.0j] * plan.replicates),
        )
    _check_tail(plan.truncation_radius, cfg.potential.width)
    pot = cfg.potential
    a = groups.a
    b1, b2 = groups.b1, groups.b2
    width = pot.width
    w2 = width * width
    R = plan.truncation_radius
    x = np.asarray(x, dtype=float).reshape(3)
    y1 = np.asarray(y1, dtype=float).reshape(3)
    y2 = np.asarray(y2, dtype=float).reshape(3)
    c1 = float(groups.c_value(y1))
    c2 = float(groups.c_value(y2))
    eps = cfg.epsilon
    chi_eps = cfg.chi
    # Fixed transverse part of eta; its Gaussian potential factor is constant.
    eta_perp = np.array([eta1, eta2])
    const_amp = pot.amplitude**2 * math.exp(-0.5 * w2 * float(eta_perp @ eta_perp))

    def integrand(u: np.ndarray) -> np.ndarray:
        n = u.shape[0]
        u_hat, w_sphere = map_to_cap(u[:, 0:2], dec.theta_bar)
        alpha, beta, w_simplex = map_to_simplex(u[:, 2:4])
        A = a * alpha
        B = a * beta
        # Axes 1, 2: only xi_k is free; Gaussian with precision w^2 + B^2.
        xi = np.empty((n, 3))
        mass = np.ones(n)
        for k in range(2):
            ck = x[k] + A * eta_perp[k]
            pk = w2 + B * B
            z = special.ndtri(u[:, 4 + k])
            xi[:, k] = -B * ck / pk + z / np.sqrt(pk)
            mass *= np.sqrt(TWO_PI / pk) * np.exp(-0.5 * ck * ck * w2 / pk)
        # Axis 3: (eta3, xi3) joint Gaussian exactly as in the full integral.
        S = w2 + A * A + B * B
        l11 = np.sqrt(w2 + A * A)
        l21 = A * B / l11
        l22 = width * np.sqrt(S) / l11
        z1 = special.ndtri(u[:, 6])
        z2 = special.ndtri(u[:, 7])
        t2 = z2 / l22
        t1 = (z1 - l21 * t2) / l11
        eta3 = -x[2] * A / S + t1
        xi[:, 2] = -x[2] * B / S + t2
        mass *= (TWO_PI / (width * np.sqrt(S))) * np.exp(-0.5 * x[2] * x[2] * w2 / S)
        eta = np.stack([np.full(n, eta1), np.full(n, eta2), eta3], axis=1)
        inside = (np.abs(eta3) <= R) & (np.max(np.abs(xi), axis=1) <= R)
        drift = x[None, :] + a * (alpha[:, None] * eta + beta[:, None] * xi)
        theta = (
            np.sum(u_hat * drift, axis=1) - b2 * eta3 - b1 * xi[:, 2] + c2 * alpha + c1 * beta
        )
        phi = _slow_phase_block(x, a, alpha, beta, eta, xi)
        delta = (
            -(math.sin(chi_eps) / eps) * b2 * eta1
            + ((1.0 - math.cos(chi_eps)) / eps) * b2 * eta3
        )
        return (
            const_amp
            * w_sphere
            * w_simplex
            * mass
            * inside
            * form_factor(eta, y2[None, :])
            * form_factor(xi, y1[None, :])
            * np.exp(1j * (phi + delta + theta / eps))
        )

    estimates = _rqmc(plan, 8, integrand)
    return _finish(estimates, plan.point_count * plan.replicates)


# ---------------------------------------------------------------------------
# Stationary-phase leading term
# ---------------------------------------------------------------------------


def leading_integrand(
    eta1,
    eta2,
    x: np.ndarray,
    y1: np.ndarray,
    y2: np.ndarray,
    cfg: PhysicalConfig,
    groups: DimensionlessGroups,
    signature: int | None = None,
) -> np.ndarray:
    """Epsilon-independent integrand of the leading-order probability.

    (2 pi)^4 times the near-first amplitude at the critical point, times
    the almost-aligned phase exp(i delta0) with delta0 = -chi_bar b2 eta1,
    times the signature phase exp(i pi mu0 / 4).  Broadcasts over
    (eta1, eta2) arrays.

    The Hessian signature is constant over all parameters (the determinant
    is pinned at a^4 b1^4 > 0, so eigenvalues cannot cross zero); it is
    computed once at the given point unless supplied.
    """
    pot = cfg.potential
    a, b1, b2 = groups.a, groups.b1, groups.b2
    x = np.asarray(x, dtype=float).reshape(3)
    y1 = np.asarray(y1, dtype=float).reshape(3)
    y2 = np.asarray(y2, dtype=float).reshape(3)
    c1 = float(groups.c_value(y1))
    c2 = float(groups.c_value(y2))
    eta1 = np.asarray(eta1, dtype=float)
    eta2 = np.asarray(eta2, dtype=float)
    eta1, eta2 = np.broadcast_arrays(eta1, eta2)
    if signature is None:
        signature = critical_point_closed_form(
            x, groups, float(np.ravel(eta1)[0]), float(np.ravel(eta2)[0]), y1, y2
        ).signature
    alpha0 = b2 / a
    beta0 = b1 / a
    eta = np.stack(
        [eta1, eta2, np.broadcast_to(-c2 / a, eta1.shape)], axis=-1
    )
    xi = np.stack(
        [
            -(x[0] + b2 * eta1) / b1,
            -(x[1] + b2 * eta2) / b1,
            np.broadcast_to(-c1 / a, eta1.shape),
        ],
        axis=-1,
    )
    drift = x + a * (alpha0 * eta + beta0 * xi)
    phi = (
        np.sum(x * (eta + xi), axis=-1)
        + 0.5
        * a
        * (
            alpha0 * np.sum(eta * eta, axis=-1)
            + beta0 * np.sum(xi * xi, axis=-1)
            + 2.0 * alpha0 * np.sum(eta * xi, axis=-1)
        )
    )
    amp = (
        pot.transform(eta)
        * form_factor(eta, y2)
        * pot.transform(xi)
        * form_factor(xi, y1)
        * np.exp(-0.5 * np.sum(drift * drift, axis=-1))
        * np.exp(1j * phi)
    )
    delta0 = -cfg.chi_bar * b2 * eta1
    return TWO_PI**4 * amp * np.exp(1j * (delta0 + 0.25 * math.pi * signature))


def stationary_leading_term(
    eta1: float,
    eta2: float,
    x: np.ndarray,
    y1: np.ndarray,
    y2: np.ndarray,
    cfg: PhysicalConfig,
    groups: DimensionlessGroups,
) -> complex:
    """Leading term of the cap integral as epsilon -> 0:

        (2 pi eps)^4 / (a^2 b1^2) * exp(i Theta0 / eps) * amplitude(q0)
        * exp(i delta0) * exp(i pi mu0 / 4)

    The three phase factors are unimodular, so the modulus is the
    prefactor times |amplitude at the critical point|.
    """
    cp = critical_point_closed_form(x, groups, eta1, eta2, y1, y2)
    F = leading_integrand(eta1, eta2, x, y1, y2, cfg, groups, signature=cp.signature)
    eps = cfg.epsilon
    return complex(
        eps**4
        / (groups.a**2 * groups.b1**2)
        * np.exp(1j * cp.theta0 / eps)
        * F
    )


# ---------------------------------------------------------------------------
# Separable surrogate (pipeline check with a closed form)
# ---------------------------------------------------------------------------


def surrogate_closed_form(k_eta: np.ndarray, k_xi: np.ndarray) -> complex:
    """Exact sphere x simplex x Gaussian-Fourier product for the surrogate.

    4 pi * 1/2 * prod_j integral of exp(-t^2/2 + i k_j t) over the line
    (truncation error is far below any realistic error bar).
    """
    ks = np.concatenate([np.ravel(k_eta), np.ravel(k_xi)])
    val = 4.0 * math.pi * 0.5
    for k in ks:
        val *= math.sqrt(TWO_PI) * math.exp(-0.5 * k * k)
    return complex(val)


def integrate_surrogate(
    k_eta: np.ndarray, k_xi: np.ndarray, plan: QuadraturePlan
) -> OscEstimate:
    """Run the full sampling pipeline on unit-width Gaussians with a pure
    linear phase; the exact value is ``surrogate_closed_form``."""
    k_eta = np.asarray(k_eta, dtype=float).reshape(3)
    k_xi = np.asarray(k_xi, dtype=float).reshape(3)
    R = plan.truncation_radius

    def integrand(u: np.ndarray) -> np.ndarray:
        _, w_sphere = map_to_sphere(u[:, 0:2])
        _, _, w_simplex = map_to_simplex(u[:, 2:4])
        eta, w_eta = map_gaussian_box(u[:, 4:7], R)
        xi, w_xi = map_gaussian_box(u[:, 7:10], R)
        gauss = np.exp(-0.5 * (np.sum(eta * eta, axis=1) + np.sum(xi * xi, axis=1)))
        phase = np.exp(1j * (eta @ k_eta + xi @ k_xi))
        return w_sphere * w_simplex * w_eta * w_xi * gauss * phase

    estimates = _rqmc(plan, 10, integrand)
    return _finish(estimates, plan.point_count * plan.replicates)
