"""The pseudo-Grassmannian of space-like m-planes in R^{m+n}_n.

A space-like m-plane is charted by its slope matrix A (n x m): the plane
spanned by the columns of [I_m; A], with sigma_max(A) < 1.  The space is
a noncompact symmetric space; its invariant metric in the slope chart is

    ds^2 = tr[(I - A^T A)^{-1} dA^T (I - A A^T)^{-1} dA].

Geodesic distance is computed by boosting the first plane to the base
plane with the pseudo-orthogonal polar factor and reading off inverse
hyperbolic tangents of singular values of the transported slope, the
exact analogue of principal angles in the compact picture.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .graphgeom import GraphMap, NotSpacelikeError, adapted_frames, fundamental_forms


@dataclass(frozen=True)
class SpacelikePlane:
    slope: np.ndarray  # (n, m)

    def __post_init__(self):
        object.__setattr__(self, "slope", np.atleast_2d(np.asarray(self.slope, dtype=float)))

    @property
    def m(self) -> int:
        return self.slope.shape[1]

    @property
    def n(self) -> int:
        return self.slope.shape[0]

    @property
    def sigma_max(self) -> float:
        return float(np.linalg.svd(self.slope, compute_uv=False)[0]) if self.slope.size else 0.0

    @property
    def spacelike(self) -> bool:
        return self.sigma_max < 1.0


def gauss_map(gm: GraphMap, x) -> SpacelikePlane:
    """Tangent plane of the graph at x, translated to the origin."""
    _, A, _, _ = gm.jet_data(x)
    plane = SpacelikePlane(A)
    if not plane.spacelike:
        raise NotSpacelikeError(1.0 - plane.sigma_max**2)
    return plane


def _inv_sqrt_sym(M: np.ndarray) -> np.ndarray:
    w, V = np.linalg.eigh(M)
    if w[0] <= 0:
        raise NotSpacelikeError(float(w[0]))
    return (V / np.sqrt(w)) @ V.T


def boost_to_base(P: SpacelikePlane):
    """Blocks of the pseudo-orthogonal boost taking P to the base plane.

    The polar boost B with B[I; A] spanning P satisfies B^T eta B = eta;
    its inverse is [[S, -A^T T], [-A S, T]] with S = (I - A^T A)^{-1/2},
    T = (I - A A^T)^{-1/2}.
    """
    A = P.slope
    m = P.m
    S = _inv_sqrt_sym(np.eye(m) - A.T @ A)
    T = _inv_sqrt_sym(np.eye(P.n) - A @ A.T)
    return S, T


def transport_slope(P: SpacelikePlane, Q: SpacelikePlane) -> np.ndarray:
    """Slope of Q after the isometry that moves P to the base plane."""
    S, T = boost_to_base(P)
    A, B = P.slope, Q.slope
    U = S - A.T @ T @ B
    V = -A @ S + T @ B
    return V @ np.linalg.inv(U)


def distance(P: SpacelikePlane, Q: SpacelikePlane) -> float:
    """Geodesic distance between two space-like planes."""
    if not P.spacelike or not Q.spacelike:
        raise NotSpacelikeError(min(1 - P.sigma_max**2, 1 - Q.sigma_max**2))
    rel = transport_slope(P, Q)
    sv = np.linalg.svd(rel, compute_uv=False)
    if np.any(sv >= 1.0):
        if np.any(sv >= 1.0 + 1e-12):
            raise NotSpacelikeError(float(1.0 - sv[0] ** 2))
        sv = np.clip(sv, 0.0, 1.0 - 1e-16)
    return float(np.sqrt(np.sum(np.arctanh(sv) ** 2)))


def chart_metric(A: np.ndarray, dA: np.ndarray) -> float:
    """Squared length of the chart velocity dA at the plane with slope A."""
    m, n = A.shape[1], A.shape[0]
    P = np.linalg.inv(np.eye(m) - A.T @ A)
    Q = np.linalg.inv(np.eye(n) - A @ A.T)
    return float(np.trace(P @ dA.T @ Q @ dA))


def hyperbolic_distance_n1(P: SpacelikePlane, Q: SpacelikePlane) -> float:
    """Independent oracle for n = 1: planes correspond to unit time-like
    normals in the hyperboloid model and d = arccosh |<nu_P, nu_Q>|."""
    a, b = P.slope.ravel(), Q.slope.ravel()
    na = np.concatenate([a, [1.0]]) / np.sqrt(1.0 - a @ a)
    nb = np.concatenate([b, [1.0]]) / np.sqrt(1.0 - b @ b)
    inner = na[:-1] @ nb[:-1] - na[-1] * nb[-1]
    return float(np.arccosh(max(1.0, abs(inner))))


# ---------------------------------------------------------------------------
# Gauss-map pullback: finite-difference stretch vs the second fundamental form

@dataclass
class PullbackReport:
    stretch_formula: float        # (sum_{s,i} (h_sij v_j)^2)^{1/2}
    stretch_fd: float             # Richardson-extrapolated difference quotient
    rel_error: float
    quotients: list               # raw quotients per rung, coarse to fine


def pullback_check(gm: GraphMap, x, direction, eps: float = 1e-2, rungs: int = 3) -> PullbackReport:
    """Compare the Gauss-map stretch along a unit frame direction with the
    second-fundamental-form prediction.

    ``direction`` is either a tangent frame index or an m-vector of frame
    components (normalized internally).
    """
    x = np.asarray(x, dtype=float)
    fr = adapted_frames(gm, x)
    pg = fundamental_forms(gm, x)
    m = gm.m
    if np.isscalar(direction):
        v = np.zeros(m)
        v[int(direction)] = 1.0
    else:
        v = np.asarray(direction, dtype=float)
        v = v / np.linalg.norm(v)
    coord_step = v @ fr.tangent_coeff  # coordinate displacement of the unit frame vector
    base = gauss_map(gm, x)
    quotients = []
    e = eps
    for _ in range(rungs):
        there = gauss_map(gm, x + e * coord_step)
        quotients.append(distance(base, there) / e)
        e /= 2.0
    extrap = 2.0 * quotients[-1] - quotients[-2]
    formula = float(np.sqrt(np.sum((np.einsum("sij,j->si", pg.h, v)) ** 2)))
    rel = abs(extrap - formula) / max(1.0, formula)
    return PullbackReport(stretch_formula=formula, stretch_fd=extrap,
                          rel_error=rel, quotients=quotients)


def pullback_trace(gm: GraphMap, x, eps: float = 1e-2, rungs: int = 3):
    """Sum of squared stretches over a full tangent frame; equals S."""
    total = 0.0
    for k in range(gm.m):
        rep = pullback_check(gm, x, k, eps=eps, rungs=rungs)
        total += rep.stretch_fd**2
    return total, fundamental_forms(gm, x).S


def max_modulus(gm: GraphMap, samples, ref: SpacelikePlane) -> float:
    """Largest Gauss-map distance to ``ref`` over the sample points.

    A lower bound for the true supremum over the sampled region.
    """
    samples = list(samples)
    if not samples:
        raise ValueError("max_modulus needs a nonempty sample list")
    return max(distance(gauss_map(gm, x), ref) for x in samples)
