"""Oscillatory phases, amplitudes, critical points, and gradient-norm bounds.

The double-ionization amplitude is a sum over the two time orderings
("graphs") of 10-dimensional oscillatory integrals.  This module provides
the rapid phase of each graph, the slowly varying amplitude, exact first
and second derivatives in the aligned chart, the closed-form critical
point with its Hessian data, a Newton solver that confirms uniqueness, and
the three strictly positive lower bounds on the phase gradient that hold
whenever the geometry is not aligned.

Chart variable order is fixed everywhere as
    (mu, nu, alpha, beta, eta3, xi1, xi2, xi3)
so gradients, Hessians and signatures are reproducible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .config import DimensionlessGroups, PhysicalConfig, atom_axes

__all__ = [
    "GraphOrder",
    "PhasePoint",
    "ChartPoint",
    "CriticalPoint",
    "BoundFamily",
    "BoundWitness",
    "ChartDomainError",
    "ConvergenceError",
    "GeometryError",
    "order_pairing",
    "rapid_phase",
    "rapid_phase_aligned",
    "slow_phase",
    "graph_amplitude",
    "gradient_eta_xi",
    "chart_gradient",
    "chart_hessian",
    "hessian_signature",
    "critical_point_closed_form",
    "critical_point_newton",
    "gradient_lower_bound",
    "minimize_gradient_norm",
]


class ChartDomainError(ValueError):
    """A chart point left the (mu, nu) disc of the spherical cap."""


class ConvergenceError(RuntimeError):
    """An iterative solver exhausted its budget."""


class GeometryError(ValueError):
    """A gradient bound was requested for a geometry where it degenerates."""


class GraphOrder(Enum):
    """Which atom is ionized first in the second-order term.

    The near atom is atom 1 (|a1| < |a2|).  NEAR_FIRST is the dominant
    ordering; FAR_FIRST is suppressed for every geometry.
    """

    NEAR_FIRST = "near_first"
    FAR_FIRST = "far_first"


@dataclass(frozen=True)
class PhasePoint:
    """Integration-variable bundle for the general (sphere) representation."""

    u_hat: np.ndarray
    alpha: float
    beta: float
    eta: np.ndarray
    xi: np.ndarray

    def __post_init__(self):
        u = np.asarray(self.u_hat, dtype=float).reshape(3)
        object.__setattr__(self, "u_hat", u)
        object.__setattr__(self, "eta", np.asarray(self.eta, dtype=float).reshape(3))
        object.__setattr__(self, "xi", np.asarray(self.xi, dtype=float).reshape(3))
        if abs(np.dot(u, u) - 1.0) > 1e-10:
            raise ValueError("u_hat must be a unit vector")
        if not (0.0 <= self.beta <= self.alpha <= 1.0):
            raise ValueError("time fractions must satisfy 0 <= beta <= alpha <= 1")


@dataclass(frozen=True)
class ChartPoint:
    """Aligned-chart variables; u_hat = (mu, nu, sqrt(1 - mu^2 - nu^2))."""

    mu: float
    nu: float
    alpha: float
    beta: float
    eta3: float
    xi: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "xi", np.asarray(self.xi, dtype=float).reshape(3))
        if self.mu**2 + self.nu**2 >= 1.0:
            raise ChartDomainError("mu^2 + nu^2 must stay below 1")

    def as_vector(self) -> np.ndarray:
        return np.array(
            [self.mu, self.nu, self.alpha, self.beta, self.eta3, *self.xi]
        )

    @classmethod
    def from_vector(cls, v: np.ndarray) -> "ChartPoint":
        v = np.asarray(v, dtype=float).reshape(8)
        return cls(mu=v[0], nu=v[1], alpha=v[2], beta=v[3], eta3=v[4], xi=v[5:8])

    def u_hat(self) -> np.ndarray:
        u3 = math.sqrt(1.0 - self.mu**2 - self.nu**2)
        return np.array([self.mu, self.nu, u3])


@dataclass(frozen=True)
class CriticalPoint:
    """Stationary point of the aligned phase with its Hessian data."""

    q0: ChartPoint
    theta0: float
    abs_det_hessian: float
    signature: int


def _require_chart(mu: float, nu: float, theta_bar: float | None) -> None:
    if theta_bar is not None and mu**2 + nu**2 > math.sin(theta_bar) ** 2 + 1e-15:
        raise ChartDomainError(
            f"point with mu^2+nu^2 = {mu**2 + nu**2:.6g} outside cap of aperture {theta_bar:.6g}"
        )


def order_pairing(
    order: GraphOrder,
    groups: DimensionlessGroups,
    y1: np.ndarray,
    y2: np.ndarray,
    a1_hat: np.ndarray,
    a2_hat: np.ndarray,
):
    """Per-order assignment of (flight time, axis, energy coeff, momentum).

    The eta variables always belong to the atom ionized second, the xi
    variables to the atom ionized first.
    """
    c1 = float(groups.c_value(y1))
    c2 = float(groups.c_value(y2))
    if order is GraphOrder.NEAR_FIRST:
        return (groups.b2, a2_hat, c2, y2), (groups.b1, a1_hat, c1, y1)
    return (groups.b1, a1_hat, c1, y1), (groups.b2, a2_hat, c2, y2)


def rapid_phase(
    order: GraphOrder,
    p: PhasePoint,
    x: np.ndarray,
    groups: DimensionlessGroups,
    y1: np.ndarray,
    y2: np.ndarray,
    a1_hat: np.ndarray | None = None,
    a2_hat: np.ndarray | None = None,
    chi: float = 0.0,
) -> float:
    """Rapid phase of one graph (multiplied by 1/epsilon in the integrals).

    Axes default to the canonical frame at angle chi.
    """
    if a1_hat is None or a2_hat is None:
        a1_hat, a2_hat = atom_axes(chi)
    (b_eta, ah_eta, c_eta, _), (b_xi, ah_xi, c_xi, _) = order_pairing(
        order, groups, y1, y2, a1_hat, a2_hat
    )
    x = np.asarray(x, dtype=float).reshape(3)
    w = x + groups.a * (p.alpha * p.eta + p.beta * p.xi)
    return float(
        np.dot(p.u_hat, w)
        - b_eta * np.dot(ah_eta, p.eta)
        - b_xi * np.dot(ah_xi, p.xi)
        + c_eta * p.alpha
        + c_xi * p.beta
    )


def gradient_eta_xi(
    order: GraphOrder,
    p: PhasePoint,
    groups: DimensionlessGroups,
    y1: np.ndarray,
    y2: np.ndarray,
    a1_hat: np.ndarray | None = None,
    a2_hat: np.ndarray | None = None,
    chi: float = 0.0,
) -> tuple[np.ndarray, np.ndarray]:
    """Exact momentum gradients of the rapid phase.

    grad_eta = a alpha u_hat - b_eta ah_eta,
    grad_xi  = a beta  u_hat - b_xi  ah_xi.
    """
    if a1_hat is None or a2_hat is None:
        a1_hat, a2_hat = atom_axes(chi)
    (b_eta, ah_eta, _, _), (b_xi, ah_xi, _, _) = order_pairing(
        order, groups, y1, y2, a1_hat, a2_hat
    )
    g_eta = groups.a * p.alpha * p.u_hat - b_eta * ah_eta
    g_xi = groups.a * p.beta * p.u_hat - b_xi * ah_xi
    return g_eta, g_xi


def slow_phase(p: PhasePoint, x: np.ndarray, groups: DimensionlessGroups) -> float:
    """Order-one phase of the amplitude (identical for both graphs)."""
    x = np.asarray(x, dtype=float).reshape(3)
    return float(
        np.dot(x, p.eta + p.xi)
        + 0.5
        * groups.a
        * (
            p.alpha * np.dot(p.eta, p.eta)
            + p.beta * np.dot(p.xi, p.xi)
            + 2.0 * p.alpha * np.dot(p.eta, p.xi)
        )
    )


def graph_amplitude(
    order: GraphOrder,
    p: PhasePoint,
    x: np.ndarray,
    y1: np.ndarray,
    y2: np.ndarray,
    groups: DimensionlessGroups,
    pot,
    aligned_extra: tuple[float, float] | None = None,
) -> complex:
    """Slowly varying amplitude of one graph.

    Product of the two coupling kernels, the Gaussian envelope at the
    drifted position, and the slow-phase factor.  With ``aligned_extra``
    = (chi_eps, epsilon) the residual unit-modulus factor that absorbs an
    almost-aligned far-atom axis into the exactly-aligned phase is included:

        delta_eps = -(sin(chi_eps)/eps) b2 eta1 + ((1 - cos(chi_eps))/eps) b2 eta3
    """
    from .kernels import coupling_kernel, envelope

    a1_hat, a2_hat = atom_axes(0.0)
    (_, _, _, y_eta), (_, _, _, y_xi) = order_pairing(
        order, groups, y1, y2, a1_hat, a2_hat
    )
    x = np.asarray(x, dtype=float).reshape(3)
    w = x + groups.a * (p.alpha * p.eta + p.beta * p.xi)
    value = (
        coupling_kernel(p.eta, y_eta, pot)
        * coupling_kernel(p.xi, y_xi, pot)
        * envelope(w)
        * np.exp(1j * slow_phase(p, x, groups))
    )
    if aligned_extra is not None:
        chi_eps, eps = aligned_extra
        delta = (
            -(math.sin(chi_eps) / eps) * groups.b2 * p.eta[0]
            + ((1.0 - math.cos(chi_eps)) / eps) * groups.b2 * p.eta[2]
        )
        value = value * np.exp(1j * delta)
    return complex(value)


# ---------------------------------------------------------------------------
# Aligned chart: phase, exact derivatives, critical point
# ---------------------------------------------------------------------------


def _chart_phase(v, x, a, b1, b2, c1, c2, eta1, eta2):
    mu, nu, al, be, e3, x1, x2, x3 = v
    u3 = math.sqrt(1.0 - mu * mu - nu * nu)
    eta = np.array([eta1, eta2, e3])
    xi = np.array([x1, x2, x3])
    w = x + a * (al * eta + be * xi)
    return mu * w[0] + nu * w[1] + u3 * w[2] - b2 * e3 - b1 * x3 + c2 * al + c1 * be


def _chart_grad(v, x, a, b1, b2, c1, c2, eta1, eta2):
    mu, nu, al, be, e3, x1, x2, x3 = v
    u3 = math.sqrt(1.0 - mu * mu - nu * nu)
    eta = np.array([eta1, eta2, e3])
    xi = np.array([x1, x2, x3])
    w = x + a * (al * eta + be * xi)
    return np.array(
        [
            w[0] - mu / u3 * w[2],
            w[1] - nu / u3 * w[2],
            a * (mu * eta[0] + nu * eta[1] + u3 * eta[2]) + c2,
            a * (mu * xi[0] + nu * xi[1] + u3 * xi[2]) + c1,
            a * u3 * al - b2,
            a * mu * be,
            a * nu * be,
            a * u3 * be - b1,
        ]
    )


def _chart_hess(v, x, a, b1, b2, c1, c2, eta1, eta2):
    mu, nu, al, be, e3, x1, x2, x3 = v
    u3 = math.sqrt(1.0 - mu * mu - nu * nu)
    eta = np.array([eta1, eta2, e3])
    xi = np.array([x1, x2, x3])
    w = x + a * (al * eta + be * xi)
    H = np.zeros((8, 8))
    H[0, 0] = -(1.0 - nu * nu) / u3**3 * w[2]
    H[0, 1] = -(mu * nu) / u3**3 * w[2]
    H[1, 1] = -(1.0 - mu * mu) / u3**3 * w[2]
    H[0, 2] = a * (eta[0] - mu / u3 * eta[2])
    H[1, 2] = a * (eta[1] - nu / u3 * eta[2])
    H[0, 3] = a * (xi[0] - mu / u3 * xi[2])
    H[1, 3] = a * (xi[1] - nu / u3 * xi[2])
    H[0, 4] = -a * al * mu / u3
    H[1, 4] = -a * al * nu / u3
    H[0, 5] = a * be
    H[1, 6] = a * be
    H[0, 7] = -a * be * mu / u3
    H[1, 7] = -a * be * nu / u3
    H[2, 4] = a * u3
    H[3, 5] = a * mu
    H[3, 6] = a * nu
    H[3, 7] = a * u3
    return H + H.T - np.diag(H.diagonal())


def _chart_params(groups, y1, y2):
    return (
        groups.a,
        groups.b1,
        groups.b2,
        float(groups.c_value(y1)),
        float(groups.c_value(y2)),
    )


def rapid_phase_aligned(
    q: ChartPoint,
    x: np.ndarray,
    groups: DimensionlessGroups,
    eta1: float,
    eta2: float,
    y1: np.ndarray,
    y2: np.ndarray,
    theta_bar: float | None = None,
) -> float:
    """NEAR_FIRST phase with both atoms on the +z axis, in chart variables.

    (eta1, eta2) are held as parameters; the chart covers the cap of
    aperture theta_bar when given.
    """
    _require_chart(q.mu, q.nu, theta_bar)
    a, b1, b2, c1, c2 = _chart_params(groups, y1, y2)
    x = np.asarray(x, dtype=float).reshape(3)
    return float(_chart_phase(q.as_vector(), x, a, b1, b2, c1, c2, eta1, eta2))


def chart_gradient(
    q: ChartPoint,
    x: np.ndarray,
    groups: DimensionlessGroups,
    eta1: float,
    eta2: float,
    y1: np.ndarray,
    y2: np.ndarray,
    theta_bar: float | None = None,
) -> np.ndarray:
    """All eight partial derivatives of the aligned phase, fixed order."""
    _require_chart(q.mu, q.nu, theta_bar)
    a, b1, b2, c1, c2 = _chart_params(groups, y1, y2)
    x = np.asarray(x, dtype=float).reshape(3)
    return _chart_grad(q.as_vector(), x, a, b1, b2, c1, c2, eta1, eta2)


def chart_hessian(
    q: ChartPoint,
    x: np.ndarray,
    groups: DimensionlessGroups,
    eta1: float,
    eta2: float,
    y1: np.ndarray,
    y2: np.ndarray,
    theta_bar: float | None = None,
) -> np.ndarray:
    """Symmetric 8x8 second-derivative matrix of the aligned phase."""
    _require_chart(q.mu, q.nu, theta_bar)
    a, b1, b2, c1, c2 = _chart_params(groups, y1, y2)
    x = np.asarray(x, dtype=float).reshape(3)
    return _chart_hess(q.as_vector(), x, a, b1, b2, c1, c2, eta1, eta2)


def hessian_signature(H: np.ndarray, *, zero_tol_factor: float = 1e-10) -> int:
    """Eigenvalue-sign count (positives minus negatives) of a symmetric matrix.

    Rejects near-degenerate matrices: every eigenvalue must clear
    zero_tol_factor times the spectral norm.
    """
    H = np.asarray(H, dtype=float)
    eigs = np.linalg.eigvalsh(0.5 * (H + H.T))
    scale = np.max(np.abs(eigs))
    if scale == 0.0 or np.min(np.abs(eigs)) < zero_tol_factor * scale:
        raise ValueError("Hessian is degenerate within tolerance; signature undefined")
    return int(np.sum(eigs > 0) - np.sum(eigs < 0))


def critical_point_closed_form(
    x: np.ndarray,
    groups: DimensionlessGroups,
    eta1: float,
    eta2: float,
    y1: np.ndarray,
    y2: np.ndarray,
) -> CriticalPoint:
    """Unique stationary point of the aligned phase, in closed form.

    The phase value and |det Hessian| = a^4 b1^4 are independent of
    (eta1, eta2, x, y1, y2); the location of the xi components is not.
    The signature is computed from the exact Hessian, never assumed.
    """
    a, b1, b2, c1, c2 = _chart_params(groups, y1, y2)
    x = np.asarray(x, dtype=float).reshape(3)
    q0 = ChartPoint(
        mu=0.0,
        nu=0.0,
        alpha=b2 / a,
        beta=b1 / a,
        eta3=-c2 / a,
        xi=np.array([-(x[0] + b2 * eta1) / b1, -(x[1] + b2 * eta2) / b1, -c1 / a]),
    )
    theta0 = x[2] + (b1 * c1 + b2 * c2) / a
    H = _chart_hess(q0.as_vector(), x, a, b1, b2, c1, c2, eta1, eta2)
    return CriticalPoint(
        q0=q0,
        theta0=float(theta0),
        abs_det_hessian=a**4 * b1**4,
        signature=hessian_signature(H),
    )


def critical_point_newton(
    start: ChartPoint,
    x: np.ndarray,
    groups: DimensionlessGroups,
    eta1: float,
    eta2: float,
    y1: np.ndarray,
    y2: np.ndarray,
    theta_bar: float,
    tol: float = 1e-12,
    max_iter: int = 100,
) -> CriticalPoint:
    """Newton search for a stationary point of the aligned phase.

    Uses the exact gradient and Hessian; steps are halved until the iterate
    stays inside the chart disc.  A small Levenberg shift covers the rare
    singular Hessian away from the solution.  Raises ChartDomainError for
    an infeasible start and ConvergenceError on budget exhaustion.
    """
    _require_chart(start.mu, start.nu, theta_bar)
    a, b1, b2, c1, c2 = _chart_params(groups, y1, y2)
    x = np.asarray(x, dtype=float).reshape(3)
    s2 = min(math.sin(theta_bar) ** 2, 1.0 - 1e-12)
    v = start.as_vector()
    for _ in range(max_iter):
        g = _chart_grad(v, x, a, b1, b2, c1, c2, eta1, eta2)
        if np.max(np.abs(g)) < tol:
            q = ChartPoint.from_vector(v)
            H = _chart_hess(v, x, a, b1, b2, c1, c2, eta1, eta2)
            return CriticalPoint(
                q0=q,
                theta0=float(_chart_phase(v, x, a, b1, b2, c1, c2, eta1, eta2)),
                abs_det_hessian=float(abs(np.linalg.det(H))),
                signature=hessian_signature(H),
            )
        H = _chart_hess(v, x, a, b1, b2, c1, c2, eta1, eta2)
        try:
            step = np.linalg.solve(H, -g)
        except np.linalg.LinAlgError:
            step = np.linalg.solve(H + 1e-8 * np.eye(8), -g)
        if not np.all(np.isfinite(step)):
            step = np.linalg.solve(H + 1e-8 * np.eye(8), -g)
        t = 1.0
        for _ in range(80):
            vn = v + t * step
            if vn[0] ** 2 + vn[1] ** 2 < s2:
                break
            t *= 0.5
        else:
            raise ConvergenceError("Newton step could not be kept inside the chart")
        v = v + t * step
        if not np.all(np.isfinite(v)) or np.max(np.abs(v)) > 1e8:
            raise ConvergenceError("Newton iteration diverged")
    raise ConvergenceError(f"no convergence within {max_iter} iterations")


# ---------------------------------------------------------------------------
# Gradient-norm lower bounds
# ---------------------------------------------------------------------------


class BoundFamily(Enum):
    """Which graph/geometry the momentum-gradient lower bound certifies.

    FAR_FIRST  -- far atom ionized first, any orientation
    NEAR_FIRST -- near atom first, atoms not aligned (chi > 0)
    CONE       -- near atom first, aligned, directions outside the cap
    """

    FAR_FIRST = "far_first"
    NEAR_FIRST = "near_first"
    CONE = "cone"


@dataclass(frozen=True)
class BoundWitness:
    """Argmin found by the multistart minimization."""

    u_hat: np.ndarray
    alpha: float
    beta: float
    value: float


def gradient_lower_bound(
    family: BoundFamily,
    cfg: PhysicalConfig,
    groups: DimensionlessGroups,
    theta_bar: float | None = None,
) -> float:
    """Strictly positive lower bound on |grad_{eta,xi} Theta| for the family.

    FAR_FIRST:  (epsilon/sqrt(2)) (|a2|/gamma) (1 - |a1|/|a2|) = (b2-b1)/sqrt(2)
    NEAR_FIRST: epsilon (min|a_j|/gamma) sqrt(1 - cos chi); sharp for chi <= pi/2,
                where the sphere minimum sits on the bisector of the two axes
    CONE:       sqrt(2) min(b1, b2) sin(theta_bar), theta_bar in (0, pi/2)

    Raises GeometryError when the requested geometry makes the bound vanish.
    """
    bmin = min(groups.b1, groups.b2)
    if family is BoundFamily.FAR_FIRST:
        value = (groups.b2 - groups.b1) / math.sqrt(2.0)
        if value <= 0.0:
            raise GeometryError("far-first bound degenerates when |a1| = |a2|")
        return value
    if family is BoundFamily.NEAR_FIRST:
        if not (0.0 < cfg.chi <= math.pi):
            raise GeometryError("near-first bound requires a positive angle chi")
        return bmin * math.sqrt(2.0) * math.sin(cfg.chi / 2.0)
    if theta_bar is None or not (0.0 < theta_bar < math.pi / 2.0):
        raise GeometryError("cone bound requires an aperture in (0, pi/2)")
    return math.sqrt(2.0) * bmin * math.sin(theta_bar)


def _project_triangle(p: float, q: float) -> tuple[float, float]:
    """Euclidean projection onto {0 <= beta <= alpha <= 1}."""
    if 0.0 <= p <= 1.0 and 0.0 <= q <= p:
        return p, q
    cands = [
        (min(max(p, 0.0), 1.0), 0.0),
        (1.0, min(max(q, 0.0), 1.0)),
    ]
    t = min(max(0.5 * (p + q), 0.0), 1.0)
    cands.append((t, t))
    return min(cands, key=lambda ab: (ab[0] - p) ** 2 + (ab[1] - q) ** 2)


def _family_geometry(family, cfg, groups, theta_bar):
    """(b_eta, ah_eta, b_xi, ah_xi, cos_max) defining the objective and domain."""
    a1_hat, a2_hat = atom_axes(cfg.chi)
    if family is BoundFamily.FAR_FIRST:
        return groups.b1, a1_hat, groups.b2, a2_hat, None
    if family is BoundFamily.NEAR_FIRST:
        return groups.b2, a2_hat, groups.b1, a1_hat, None
    if theta_bar is None or not (0.0 < theta_bar < math.pi / 2.0):
        raise GeometryError("cone family requires an aperture in (0, pi/2)")
    ez = np.array([0.0, 0.0, 1.0])
    return groups.b2, ez, groups.b1, ez, math.cos(theta_bar)


def _fibonacci_sphere(n: int) -> np.ndarray:
    k = np.arange(n)
    golden = math.pi * (3.0 - math.sqrt(5.0))
    z = 1.0 - 2.0 * (k + 0.5) / n
    r = np.sqrt(1.0 - z * z)
    return np.stack([r * np.cos(golden * k), r * np.sin(golden * k), z], axis=1)


def minimize_gradient_norm(
    family: BoundFamily,
    cfg: PhysicalConfig,
    groups: DimensionlessGroups,
    theta_bar: float | None = None,
    starts: int = 64,
    max_iter: int = 500,
    grad_tol: float = 1e-13,
) -> tuple[float, BoundWitness]:
    """Multistart minimization of |grad_eta Theta|^2 + |grad_xi Theta|^2.

    The objective over (u_hat, alpha, beta) is
        |a alpha u_hat - b_eta ah_eta|^2 + |a beta u_hat - b_xi ah_xi|^2
    on S^2 (restricted to polar angles >= theta_bar for the CONE family)
    times the triangle 0 <= beta <= alpha <= 1.  For fixed u_hat the
    optimal (alpha, beta) is the Euclidean projection of the unconstrained
    minimizer onto the triangle (the quadratic is isotropic), so descent
    runs on the sphere alone: projected gradient with Armijo backtracking
    from a deterministic Fibonacci grid of starts.  Winner is the lowest
    value, ties broken lexicographically by witness.
    """
    a = groups.a
    b_eta, ah_eta, b_xi, ah_xi, cos_max = _family_geometry(family, cfg, groups, theta_bar)

    def clamp(u: np.ndarray) -> np.ndarray:
        u = u / np.linalg.norm(u)
        if cos_max is not None and u[2] > cos_max:
            s = math.hypot(u[0], u[1])
            az = (u[0] / s, u[1] / s) if s > 1e-14 else (1.0, 0.0)
            sb = math.sqrt(1.0 - cos_max**2)
            u = np.array([sb * az[0], sb * az[1], cos_max])
        return u

    def inner(u: np.ndarray) -> tuple[float, float]:
        return _project_triangle(
            b_eta / a * float(np.dot(u, ah_eta)), b_xi / a * float(np.dot(u, ah_xi))
        )

    def value(u: np.ndarray) -> tuple[float, float, float]:
        al, be = inner(u)
        r_eta = a * al * u - b_eta * ah_eta
        r_xi = a * be * u - b_xi * ah_xi
        return float(np.dot(r_eta, r_eta) + np.dot(r_xi, r_xi)), al, be

    best: BoundWitness | None = None
    for u0 in _fibonacci_sphere(starts):
        u = clamp(u0)
        f, al, be = value(u)
        step = 0.5
        for _ in range(max_iter):
            al, be = inner(u)
            grad = 2.0 * a * al * (a * al * u - b_eta * ah_eta) + 2.0 * a * be * (
                a * be * u - b_xi * ah_xi
            )
            tangent = grad - np.dot(grad, u) * u
            gnorm2 = float(np.dot(tangent, tangent))
            if gnorm2 < grad_tol**2:
                break
            t = step
            accepted = False
            for _ in range(50):
                un = clamp(u - t * tangent)
                fn, _, _ = value(un)
                if fn < f - 1e-4 * t * gnorm2:
                    accepted = True
                    break
                t *= 0.5
            if not accepted:
                break
            u, f = un, fn
            step = min(2.0 * t, 1.0)
        f, al, be = value(u)
        cand = BoundWitness(u_hat=u.copy(), alpha=al, beta=be, value=f)
        if (
            best is None
            or f < best.value
            or (f == best.value and tuple(cand.u_hat) < tuple(best.u_hat))
        ):
            best = cand
    assert best is not None
    return best.value, best
