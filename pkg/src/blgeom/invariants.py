"""Conformal invariants of a Minkowski norm relative to its own metric.

Everything here is computed after moving to coordinates in which the
reference metric G is the identity, so the invariants only depend on the
conformal class of the norm:

* the Steiner coefficients W_0..W_n of the unit ball (W_n is always the
  euclidean unit-ball volume),
* the roundness bounds mu <= M of F over the G-unit sphere (mu = M exactly
  when the norm is euclidean for G),
* the fingerprint (W_0, ..., W_{n-1}, mu, M) in R^{n+2} used to rule out
  conformal equivalence of two norm fields by comparing image clouds.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize, minimize_scalar
from scipy.spatial import ConvexHull, cKDTree

from .errors import InputError, UnsupportedDimensionError
from .metric import assert_spd, bl_metric, unit_ball_volume
from .norms import LinearImage, MinkowskiNorm, sphere_grid
from .quadrature import SphericalQuadrature, auto_quadrature, ball_volume

_TWO_PI = 2.0 * np.pi


def orthonormalize(norm: MinkowskiNorm, metric: np.ndarray) -> LinearImage:
    """Express the norm in coordinates where ``metric`` becomes identity.

    With G = L L^T (Cholesky), the substitution xi = L^{-T} xi' maps the
    quadratic form to the identity; the returned norm is xi' -> F(L^{-T} xi').
    Its metric pulled back through the same substitution is the identity.
    """
    G = np.asarray(metric, dtype=float)
    assert_spd(G, "reference metric")
    L = np.linalg.cholesky(G)
    A = np.linalg.inv(L).T
    return LinearImage(A, norm)


@dataclass
class Quermassintegrals:
    """Steiner coefficients: vol(body + t*ball) = sum_j C(n,j) W_j t^j."""

    values: np.ndarray  # W_0 .. W_n
    dim: int

    def steiner_polynomial(self, t: float) -> float:
        from math import comb

        return float(sum(comb(self.dim, j) * self.values[j] * t ** j
                         for j in range(self.dim + 1)))


def quermassintegrals(norm: MinkowskiNorm, metric: np.ndarray, *,
                      level: int = 0, nodes_3d: int = 20000) -> Quermassintegrals:
    """Steiner coefficients of the unit ball in G-orthonormal coordinates.

    n = 2: W_0 = area (radial integral), W_1 = half the support-function
    integral over the circle (Cauchy's perimeter formula), W_2 = pi.
    n = 3: the body is approximated by the polytope inscribed through a
    fine direction set; W_0 = volume, W_1 = surface/3, and W_2 comes from
    the exact polytope mean-width term sum(edge length * exterior dihedral
    angle) / 6, with W_3 = 4 pi / 3.
    Other dimensions raise; there is no silent fallback.
    """
    n = norm.dim
    body = orthonormalize(norm, metric)
    if n == 2:
        w0 = unit_ball_volume(body, auto_quadrature(body, level=level))
        squad = auto_quadrature(body, level=level, use_support_kinks=True)
        h = body.support_batch(squad.nodes)
        w1 = 0.5 * float(np.dot(squad.weights, h))
        return Quermassintegrals(np.array([w0, w1, np.pi]), 2)
    if n == 3:
        dirs = sphere_grid(3, nodes_3d << level)
        cand = body.extremal_candidates()
        if cand is not None:
            dirs = np.vstack([dirs, cand])
        verts = dirs / body.values(dirs)[:, None]
        hull = ConvexHull(verts)
        w0 = hull.volume
        w1 = hull.area / 3.0
        w2 = _polytope_mean_width_term(hull) / 6.0
        return Quermassintegrals(np.array([w0, w1, w2, 4.0 * np.pi / 3.0]), 3)
    raise UnsupportedDimensionError(
        f"quermassintegrals are implemented for n in {{2, 3}}, got n = {n}")


def _polytope_mean_width_term(hull: ConvexHull) -> float:
    """sum over hull edges of edge length times exterior dihedral angle."""
    normals = hull.equations[:, :3]
    pts = hull.points
    simplices = hull.simplices
    neighbors = hull.neighbors
    total = 0.0
    nfac = len(simplices)
    for k in range(nfac):
        for i in range(3):
            m = neighbors[k, i]
            if m < k:
                continue  # each edge once
            shared = [simplices[k, j] for j in range(3) if j != i]
            length = np.linalg.norm(pts[shared[0]] - pts[shared[1]])
            c = float(np.clip(normals[k] @ normals[m], -1.0, 1.0))
            total += length * np.arccos(c)
    return total


def roundness(norm: MinkowskiNorm, metric: np.ndarray, *,
              grid: int | None = None) -> tuple[float, float]:
    """(mu, M): min and max of F(xi)/sqrt(xi^T G xi) over xi != 0.

    Dense sampling of the G-unit sphere followed by local refinement
    (bracketed scalar search in 2D, simplex descent on a tangent chart in
    higher dimension).  For polytope gauges the candidate set includes the
    vertex and facet-normal directions, where the extrema provably sit.
    """
    body = orthonormalize(norm, metric)
    n = body.dim
    if grid is None:
        grid = 4096 if n == 2 else 20000
    dirs = sphere_grid(n, grid)
    cand = body.extremal_candidates()
    if cand is not None:
        dirs = np.vstack([dirs, cand])
    vals = body.values(dirs)
    lo = _refine_extremum(body, dirs, vals, grid, sign=+1)
    hi = _refine_extremum(body, dirs, vals, grid, sign=-1)
    return lo, hi


def _refine_extremum(body, dirs, vals, grid, sign):
    # sign=+1 refines the minimum, sign=-1 the maximum
    idx = int(np.argmin(sign * vals))
    u0 = dirs[idx] / np.linalg.norm(dirs[idx])
    best = float(vals[idx])
    if body.dim == 2:
        a0 = np.arctan2(u0[1], u0[0])
        width = _TWO_PI / grid * 4.0

        def obj(a):
            return sign * float(body.values(np.array([np.cos(a), np.sin(a)])))

        res = minimize_scalar(obj, bounds=(a0 - width, a0 + width),
                              method="bounded", options={"xatol": 1e-12})
        refined = sign * res.fun
        return min(best, refined) if sign > 0 else max(best, refined)
    basis = _tangent_basis(u0)

    def obj(t):
        v = u0 + basis @ t
        return sign * float(body.values(v / np.linalg.norm(v)))

    res = minimize(obj, np.zeros(body.dim - 1), method="Nelder-Mead",
                   options={"xatol": 1e-9, "fatol": 1e-12 * max(1.0, best),
                            "maxiter": 600})
    refined = sign * res.fun
    return min(best, refined) if sign > 0 else max(best, refined)


def _tangent_basis(u):
    n = len(u)
    q, _ = np.linalg.qr(np.column_stack([u, np.eye(n)[:, : n - 1]]))
    return q[:, 1:]


def isotropy_defect(norm: MinkowskiNorm, *, quad: SphericalQuadrature | None = None,
                    level: int = 0) -> float:
    """M/mu - 1 against the norm's own metric; ~0 certifies a euclidean norm."""
    if quad is None:
        quad = auto_quadrature(norm, level=level)
    g = bl_metric(norm, quad)
    mu, big_m = roundness(norm, g)
    return big_m / mu - 1.0


def fingerprint_point(norm: MinkowskiNorm, *, level: int = 0,
                      quad: SphericalQuadrature | None = None) -> np.ndarray:
    """(W_0, ..., W_{n-1}, mu, M) against the norm's own metric."""
    if norm.dim not in (2, 3):
        raise UnsupportedDimensionError("fingerprints are implemented for n in {2, 3}")
    if quad is None:
        quad = auto_quadrature(norm, level=level)
    g = bl_metric(norm, quad)
    qm = quermassintegrals(norm, g, level=level)
    mu, big_m = roundness(norm, g)
    return np.concatenate([qm.values[: norm.dim], [mu, big_m]])


@dataclass
class FingerprintComparison:
    hausdorff: float
    quantile95: float
    verdict: str  # "cannot distinguish" | "not conformally equivalent"
    tol: float

    @property
    def distinguishable(self) -> bool:
        return self.verdict == "not conformally equivalent"


def compare_fingerprints(cloud_a, cloud_b, tol: float = 1e-3) -> FingerprintComparison:
    """Normalized symmetric Hausdorff distance between fingerprint clouds.

    Coordinates are rescaled by the pooled interquartile range so that
    heterogeneous units (areas vs ratios) weigh comparably; a coordinate
    with degenerate spread falls back to a magnitude-based scale.  The
    one-sided conclusion mirrors the underlying test: a large distance
    certifies "not conformally equivalent", a small one only means the
    clouds cannot be told apart.
    """
    a = np.atleast_2d(np.asarray(cloud_a, dtype=float))
    b = np.atleast_2d(np.asarray(cloud_b, dtype=float))
    if a.size == 0 or b.size == 0:
        raise InputError("fingerprint clouds must be non-empty")
    if a.shape[1] != b.shape[1]:
        raise InputError("fingerprint clouds have different dimensions")
    pooled = np.vstack([a, b])
    q25, med, q75 = np.percentile(pooled, [25, 50, 75], axis=0)
    scale = q75 - q25
    degenerate = scale < 1e-12 * (1.0 + np.abs(med))
    scale[degenerate] = 1.0 + np.abs(med[degenerate])
    an = a / scale
    bn = b / scale
    d_ab = cKDTree(bn).query(an)[0]
    d_ba = cKDTree(an).query(bn)[0]
    hausdorff = float(max(d_ab.max(), d_ba.max()))
    q95 = float(max(np.percentile(d_ab, 95), np.percentile(d_ba, 95)))
    verdict = "cannot distinguish" if hausdorff <= tol else "not conformally equivalent"
    return FingerprintComparison(hausdorff, q95, verdict, tol)
