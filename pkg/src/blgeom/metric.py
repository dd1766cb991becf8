"""The dual scalar product, its metric, and the associated ellipsoids.

For a Minkowski norm F with unit ball Omega in R^n the dual scalar product
on covectors is the normalized second moment of Omega,

    m*(theta, phi) = (n+2)/vol(Omega) * integral_Omega theta(x) phi(x) dx,

and the metric of interest is its inverse on vectors.  Reducing the moment
integral to polar coordinates turns everything into sphere integrals of
powers of 1/F, which is what the quadrature rules evaluate:

    M*_ij = [ sum_k w_k u_ki u_kj F(u_k)^-(n+2) ] / vol(Omega),
    vol(Omega) = (1/n) sum_k w_k F(u_k)^-n.

The unit ball of m* in the dual space is the Binet ellipsoid of Omega; the
ball of the inverse metric, rescaled by (vol(Omega)/vol(ball))^(1/(n+2)),
is the Legendre ellipsoid -- the unique ellipsoid with the same moment of
inertia as Omega in every codirection.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from .errors import (DefinitenessError, InputError, NumericalFailure,
                     QuadratureFailure)
from .norms import MinkowskiNorm
from .quadrature import (SphericalQuadrature, auto_quadrature, ball_volume,
                         sphere_surface_area)

CONDITION_LIMIT = 1e12


def assert_spd(matrix: np.ndarray, what: str = "matrix", sym_tol: float = 1e-12):
    """Raise unless ``matrix`` is symmetric (to sym_tol) positive definite."""
    scale = max(1.0, float(np.abs(matrix).max()))
    if np.abs(matrix - matrix.T).max() > sym_tol * scale:
        raise NumericalFailure(f"{what} is not symmetric")
    eigs = np.linalg.eigvalsh(matrix)
    if eigs[0] <= 0.0:
        raise NumericalFailure(f"{what} is not positive definite (min eigenvalue {eigs[0]:.3e})")


def _norm_powers(norm: MinkowskiNorm, quad: SphericalQuadrature):
    if norm.dim != quad.dim:
        raise InputError(f"norm dimension {norm.dim} != quadrature dimension {quad.dim}")
    f = norm.values(quad.nodes)
    if np.any(f <= 0.0):
        k = int(np.argmin(f))
        raise DefinitenessError(
            f"norm is not positive at node {quad.nodes[k]} (F = {f[k]:.3e})")
    return f


def unit_ball_volume(norm: MinkowskiNorm, quad: SphericalQuadrature) -> float:
    """vol{F <= 1} by the radial volume formula."""
    f = _norm_powers(norm, quad)
    n = norm.dim
    return float(np.dot(quad.weights, f ** (-n)) / n)


def dual_scalar_matrix(norm: MinkowskiNorm, quad: SphericalQuadrature) -> np.ndarray:
    """Matrix of the dual scalar product in the coordinate dual basis."""
    f = _norm_powers(norm, quad)
    n = norm.dim
    vol = float(np.dot(quad.weights, f ** (-n)) / n)
    wf = quad.weights * f ** (-(n + 2))
    m = np.einsum("k,ki,kj->ij", wf, quad.nodes, quad.nodes) / vol
    m = 0.5 * (m + m.T)
    eigs = np.linalg.eigvalsh(m)
    if eigs[0] <= 0.0:
        raise QuadratureFailure(
            "moment matrix is not positive definite after symmetrization "
            f"(eigenvalues {eigs}, scheme {quad.scheme}, {len(quad)} nodes); "
            "refine the quadrature")
    return m


def bl_metric(norm: MinkowskiNorm, quad: SphericalQuadrature) -> np.ndarray:
    """The metric on vectors: inverse of the dual moment matrix."""
    m = dual_scalar_matrix(norm, quad)
    eigs = np.linalg.eigvalsh(m)
    cond = eigs[-1] / eigs[0]
    if cond > CONDITION_LIMIT:
        raise NumericalFailure(
            f"dual moment matrix is too ill-conditioned to invert (cond = {cond:.3e})")
    g = np.linalg.inv(m)
    return 0.5 * (g + g.T)


@dataclass
class ConvergenceInfo:
    converged: bool
    achieved_tol: float
    level: int
    scheme: str


def _mc_metric_standard_error(norm: MinkowskiNorm, quad: SphericalQuadrature,
                              batches: int = 32):
    """Metric from a Monte-Carlo rule plus a batch-means standard error."""
    g = bl_metric(norm, quad)
    size = len(quad) // batches
    samples = []
    for b in range(batches):
        sl = slice(b * size, (b + 1) * size)
        sub = SphericalQuadrature(quad.dim, quad.nodes[sl],
                                  np.full(size, sphere_surface_area(quad.dim) / size),
                                  "monte-carlo", quad.level, quad.seed)
        samples.append(bl_metric(norm, sub))
    spread = np.std(np.array(samples), axis=0) / np.sqrt(batches)
    rel_se = float(np.linalg.norm(spread) / np.linalg.norm(g))
    return g, rel_se


def bl_metric_converged(norm: MinkowskiNorm, tol: float = 1e-8, level: int = 0,
                        max_level: int = 4, seed: int = 0, mc_tol: float = 1e-3):
    """Metric with a refinement acceptance rule.

    Deterministic schemes compute at consecutive refinement levels and
    accept once the relative Frobenius change drops below ``tol``.
    Monte-Carlo schemes use variance-based stopping instead: accept when
    the batch-means relative standard error falls below ``mc_tol``, and
    report that standard error as the achieved tolerance.  Either way
    refinement is capped at ``max_level``.
    """
    quad = auto_quadrature(norm, level=level, seed=seed)
    if quad.scheme == "monte-carlo":
        while True:
            g, rel_se = _mc_metric_standard_error(norm, quad)
            if rel_se <= mc_tol or quad.level >= max_level:
                return g, ConvergenceInfo(rel_se <= mc_tol, rel_se,
                                          quad.level, quad.scheme)
            quad = quad.refined()
    g = bl_metric(norm, quad)
    achieved = np.inf
    while quad.level < max_level:
        finer = quad.refined()
        g_fine = bl_metric(norm, finer)
        achieved = float(np.linalg.norm(g_fine - g) / np.linalg.norm(g_fine))
        g, quad = g_fine, finer
        if achieved < tol:
            return g, ConvergenceInfo(True, achieved, quad.level, quad.scheme)
    return g, ConvergenceInfo(False, achieved, quad.level, quad.scheme)


# ---------------------------------------------------------------------------
# ellipsoids
# ---------------------------------------------------------------------------


@dataclass
class Ellipsoid:
    """The set { xi : xi^T Q xi <= scale^2 } for a positive definite Q."""

    shape: np.ndarray
    scale: float = 1.0

    def __post_init__(self):
        self.shape = np.asarray(self.shape, dtype=float)
        assert_spd(self.shape, "ellipsoid shape matrix")
        if not self.scale > 0:
            raise InputError("ellipsoid scale must be positive")

    @property
    def dim(self) -> int:
        return self.shape.shape[0]

    def volume(self) -> float:
        return ball_volume(self.dim) * self.scale ** self.dim / np.sqrt(
            np.linalg.det(self.shape))

    def moment_of_inertia(self, theta) -> float:
        """integral over the ellipsoid of (theta . xi)^2 d xi, closed form."""
        theta = np.asarray(theta, dtype=float)
        qinv = np.linalg.inv(self.shape)
        return self.volume() / (self.dim + 2) * self.scale ** 2 * float(theta @ qinv @ theta)

    def contains(self, pts) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        return np.einsum("ki,ij,kj->k", pts, self.shape, pts) <= self.scale ** 2

    def radii(self) -> np.ndarray:
        """Semi-axis lengths."""
        return self.scale / np.sqrt(np.linalg.eigvalsh(self.shape))


def binet_ellipsoid(norm: MinkowskiNorm, quad: SphericalQuadrature) -> Ellipsoid:
    """Unit ball of the dual scalar product, in dual-basis coordinates."""
    return Ellipsoid(dual_scalar_matrix(norm, quad), 1.0)


def legendre_ellipsoid(norm: MinkowskiNorm, quad: SphericalQuadrature) -> Ellipsoid:
    """The ellipsoid matching the unit ball's moments of inertia.

    It is the metric's unit ball scaled by (vol(Omega)/vol(B))^(1/(n+2)),
    with vol(B) computed analytically from det of the metric.
    """
    g = bl_metric(norm, quad)
    vol_omega = unit_ball_volume(norm, quad)
    vol_b = ball_volume(norm.dim) / np.sqrt(np.linalg.det(g))
    scale = (vol_omega / vol_b) ** (1.0 / (norm.dim + 2))
    return Ellipsoid(g, scale)


# ---------------------------------------------------------------------------
# moments of inertia
# ---------------------------------------------------------------------------


@dataclass
class MomentResult:
    value: float
    stderr: Optional[float] = None  # None for deterministic evaluation


def _norm_bounding_box(norm: MinkowskiNorm):
    n = norm.dim
    eye = np.eye(n)
    hi = np.array([norm.support(eye[i]) for i in range(n)])
    lo = -np.array([norm.support(-eye[i]) for i in range(n)])
    return lo, hi


def _ellipsoid_bounding_box(ell: Ellipsoid):
    qinv = np.linalg.inv(ell.shape)
    half = ell.scale * np.sqrt(np.diag(qinv))
    return -half, half


def moment_of_inertia(body: Union[MinkowskiNorm, Ellipsoid], theta, *,
                      quad: Optional[SphericalQuadrature] = None,
                      method: str = "radial", samples: int = 1_000_000,
                      seed: int = 0, chunk: int = 2 ** 20) -> MomentResult:
    """integral over the body of (theta . xi)^2 d xi.

    ``body`` is either a norm (its unit sublevel set) or an ellipsoid.
    method="radial" uses the polar-coordinate reduction (deterministic,
    needs ``quad`` for norm bodies; closed form for ellipsoids);
    method="mc" uses seeded rejection sampling in the bounding box and
    reports a standard-error estimate.
    """
    theta = np.asarray(theta, dtype=float)
    if method == "radial":
        if isinstance(body, Ellipsoid):
            return MomentResult(body.moment_of_inertia(theta))
        if quad is None:
            quad = auto_quadrature(body, level=1)
        f = _norm_powers(body, quad)
        n = body.dim
        proj = quad.nodes @ theta
        val = float(np.dot(quad.weights, proj ** 2 * f ** (-(n + 2))) / (n + 2))
        return MomentResult(val)
    if method != "mc":
        raise InputError(f"unknown method {method!r}")

    if isinstance(body, Ellipsoid):
        lo, hi = _ellipsoid_bounding_box(body)
        inside = body.contains
        n = body.dim
    else:
        lo, hi = _norm_bounding_box(body)
        inside = lambda pts: body.values(pts) <= 1.0
        n = body.dim
    box_vol = float(np.prod(hi - lo))
    rng = np.random.default_rng(seed)
    total = 0.0
    total_sq = 0.0
    count = 0
    while count < samples:
        m = min(chunk, samples - count)
        pts = rng.uniform(lo, hi, size=(m, n))
        vals = np.where(inside(pts), (pts @ theta) ** 2, 0.0)
        total += float(vals.sum())
        total_sq += float((vals ** 2).sum())
        count += m
    mean = total / count
    var = max(total_sq / count - mean ** 2, 0.0)
    return MomentResult(box_vol * mean, box_vol * np.sqrt(var / count))


def relative_qf_deviation(g_a: np.ndarray, g_b: np.ndarray) -> float:
    """max |lambda - 1| over generalized eigenvalues of (g_a, g_b)."""
    from scipy.linalg import eigh

    lam = eigh(g_a, g_b, eigvals_only=True)
    return float(np.abs(lam - 1.0).max())
