"""Estimate checkers and rigidity experiments.

* geodesic_radius: intrinsic distance field on a lattice by Dijkstra over
  the 3^m - 1 neighbor graph with midpoint-metric edge lengths.
* estimate_report: finite-sample ratios of S against the two second-
  fundamental-form bounds (mean-curvature-only, and mean curvature plus
  Gauss-map modulus); the theory's absolute constant is never assigned,
  so the contract is finiteness and stability.
* decay_scan: the desk-scale Bernstein experiment.  For each radius a the
  maximal-surface problem is solved on the disc of radius a with the
  scale-covariant Dirichlet family  f|_{dB_a}(x) = a * g(x / a)  (the
  blow-down of a fixed boundary shape g; an affine g is reproduced
  exactly at every scale).  The decaying statistic is the maximum of S
  over the center region |x| <= a/4; for nonflat data it decays like
  a^{-2}, the rate of the curvature estimate at fixed center.
* completeness_probe: integrates geodesics of the induced metric from
  the origin and compares the growth exponent of z + 1 with the sampled
  supremum of |grad z| / (z + 1), the integrated gradient estimate.
"""

from __future__ import annotations

import heapq
import itertools
from dataclasses import dataclass

import numpy as np

from . import lattice as lat_mod
from .exprparse import Expr, eval_values
from .graphgeom import (
    BasePointError, GraphMap, NotSpacelikeError, fundamental_forms,
    induced_metric, integrate_geodesic, pseudo_distance,
)
from .grassmann import SpacelikePlane, distance, gauss_map
from .lattice import Lattice, LatticeError
from .solver import SolverError, field_immersion_geometry, solve_maximal

# worst-case ratio of the 8-neighbor lattice path length to the straight
# line in a flat metric: 1/cos(pi/8) - 1, about 8.24 percent
DIJKSTRA_METRICATION = 1.0 / np.cos(np.pi / 8.0) - 1.0


@dataclass
class RadiusField:
    lattice: Lattice
    r: np.ndarray          # full grid, np.inf for unreachable, nan inactive
    source_index: tuple


def geodesic_radius(gm: GraphMap, lattice: Lattice, x0) -> RadiusField:
    """Shortest-path distance field from x0 under the induced metric.

    Edges join each active node to its 3^m - 1 neighbors with length
    sqrt(d^T g(midpoint) d); first-order consistent as the spacing
    shrinks, with the documented flat-metric metrication bound.
    """
    act = lat_mod.active_mask(lattice)
    pts = lat_mod.node_points(lattice)
    shape = lattice.shape
    m = lattice.m
    x0 = np.asarray(x0, dtype=float)

    act_flat = act.ravel()
    if not act_flat.any():
        raise LatticeError("empty lattice")
    cand = np.flatnonzero(act_flat)
    src_flat = int(cand[np.argmin(np.linalg.norm(pts[cand] - x0, axis=1))])
    if np.linalg.norm(pts[src_flat] - x0) > max(lattice.spacing):
        raise LatticeError("source point is not on the lattice")

    offsets = [off for off in itertools.product((-1, 0, 1), repeat=m) if any(off)]
    offset_flats = [lat_mod.flat_offset(lattice, off) for off in offsets]
    steps = [np.array(off, dtype=float) * np.array(lattice.spacing) for off in offsets]

    dist = np.full(act_flat.size, np.inf)
    dist[src_flat] = 0.0
    heap = [(0.0, src_flat)]
    visited = np.zeros(act_flat.size, dtype=bool)
    metric_cache: dict[tuple, np.ndarray] = {}

    def edge_length(a_flat: int, step_vec: np.ndarray, b_flat: int) -> float:
        mid = 0.5 * (pts[a_flat] + pts[b_flat])
        key = tuple(np.round(mid / np.array(lattice.spacing) * 2).astype(int))
        g = metric_cache.get(key)
        if g is None:
            mp = induced_metric(gm, mid)
            if not mp.spacelike:
                raise NotSpacelikeError(mp.min_eig)
            g = mp.g
            metric_cache[key] = g
        return float(np.sqrt(step_vec @ g @ step_vec))

    idx_shape = shape
    while heap:
        d0, u = heapq.heappop(heap)
        if visited[u]:
            continue
        visited[u] = True
        ui = np.unravel_index(u, idx_shape)
        for off, off_flat, step in zip(offsets, offset_flats, steps):
            vi = tuple(a + b for a, b in zip(ui, off))
            if any(c < 0 or c >= s for c, s in zip(vi, idx_shape)):
                continue
            v = u + off_flat
            if not act_flat[v] or visited[v]:
                continue
            nd = d0 + edge_length(u, step, v)
            if nd < dist[v]:
                dist[v] = nd
                heapq.heappush(heap, (nd, v))

    if not np.all(np.isfinite(dist[act_flat])):
        raise LatticeError("active-node graph is disconnected")
    r = np.full(act_flat.size, np.nan)
    r[act_flat] = dist[act_flat]
    return RadiusField(lattice=lattice, r=r.reshape(shape),
                       source_index=tuple(np.unravel_index(src_flat, shape)))


# ---------------------------------------------------------------------------
# Ball reports for the second-fundamental-form estimates

@dataclass
class BallReport:
    center: np.ndarray
    radius: float
    points: np.ndarray     # sample coordinates inside the geodesic ball
    r: np.ndarray          # geodesic radii of the samples
    S: np.ndarray
    H_norm: np.ndarray
    mu_dist: np.ndarray    # Gauss-map distance of each sample to the reference
    mu: float              # max modulus over the ball
    h_bar: float           # max sampled |H|
    ratio29: float
    ratio28: float


def estimate_report(gm: GraphMap, x0, a: float, lattice: Lattice,
                    ref: SpacelikePlane = None) -> BallReport:
    """Sampled ratios of S against the two curvature-estimate right-hand
    sides on the geodesic ball of radius a about x0.

    ratio29 uses the mean-curvature-only bound; ratio28 additionally uses
    the Gauss-map maximum modulus mu.  Both are finite for space-like
    data; the unspecified absolute constant means only finiteness and
    refinement stability are contractual.
    """
    m, n = gm.m, gm.n
    rf = geodesic_radius(gm, lattice, x0)
    act = lat_mod.active_mask(lattice).ravel()
    pts = lat_mod.node_points(lattice)
    rflat = rf.r.ravel()
    if np.nanmax(rflat[act]) < a:
        raise LatticeError("geodesic ball of radius a exceeds the sampled lattice")
    sel = np.flatnonzero(act & np.isfinite(rflat) & (rflat <= a))
    if ref is None:
        ref = gauss_map(gm, np.asarray(x0, dtype=float))

    S = np.zeros(sel.size)
    H = np.zeros(sel.size)
    mu_d = np.zeros(sel.size)
    for k, flat in enumerate(sel):
        pg = fundamental_forms(gm, pts[flat])
        S[k] = pg.S
        H[k] = pg.H_norm
        mu_d[k] = distance(gauss_map(gm, pts[flat]), ref)
    h_bar = float(H.max(initial=0.0))
    mu = float(mu_d.max(initial=0.0))
    r = rflat[sel]

    num = S * (a**2 - r**2) ** 2
    den29 = (m**2 * n**2 * h_bar**2 * a**4 + m * n * (m - 1) * h_bar * a**3
             + 2 * n * (m + 4) * a**2)
    ratio29 = float(np.max(num / den29)) if den29 > 0 else 0.0
    bracket = 0.0
    if mu > 0:
        w = 2.0 + mu**2 / n
        bracket = ((8 * mu * a + m * a**2 * h_bar) ** 2 * mu**4 / w**2
                   + (2 * (m + 4) * a**2 + m * (m - 1) * h_bar * a**3) * mu**2 / w)
    ratio28 = float(np.max(num / bracket)) if bracket > 0 else 0.0
    return BallReport(center=np.asarray(x0, dtype=float), radius=float(a),
                      points=pts[sel], r=r, S=S, H_norm=H, mu_dist=mu_d,
                      mu=mu, h_bar=h_bar, ratio29=ratio29, ratio28=ratio28)


# ---------------------------------------------------------------------------
# Bernstein decay scan

@dataclass
class ScanConfig:
    nodes: int = 65            # nodes per axis (fixed-nodes policy)
    policy: str = "fixed-nodes"  # or "fixed-spacing"
    spacing: float = 0.25
    domain: str = "disc"       # or "box"
    tol: float = 1e-10
    max_iter: int = 40
    center_fraction: float = 0.25


@dataclass
class DecayScanRow:
    a: float
    s_center: float        # max S over the center region |x| <= fraction * a
    s_center_node: float   # S at the node nearest the exact center
    nodes: int
    spacing: float
    status: str


@dataclass
class DecayScan:
    rows: list
    slope: float | None
    slope_kind: str      # 'fit' | 'exact-zero' | 'insufficient'


def _scan_lattice(a: float, cfg: ScanConfig) -> Lattice:
    if cfg.policy == "fixed-spacing":
        nodes = int(round(2 * a / cfg.spacing)) + 1
    else:
        nodes = cfg.nodes
    if cfg.domain == "box":
        return Lattice.box((-a, -a), (a, a), nodes)
    return Lattice.disc(a, nodes)


def decay_scan(boundary: Expr, radii, cfg: ScanConfig = None) -> DecayScan:
    """Solve the maximal-surface problem on nested discs with the
    blow-down data family a * g(x/a) and record the decay of S near the
    center.  Returns the per-radius table and the fitted log-log slope.
    """
    cfg = cfg or ScanConfig()
    rows = []
    for a in radii:
        a = float(a)
        lat = _scan_lattice(a, cfg)

        def data(pts, _a=a):
            return _a * eval_values(boundary, np.asarray(pts) / _a)

        try:
            fld, _ = solve_maximal(lat, data, tol=cfg.tol, max_iter=cfg.max_iter)
        except (SolverError, LatticeError) as err:
            rows.append(DecayScanRow(a=a, s_center=np.nan, s_center_node=np.nan,
                                     nodes=lat.shape[0], spacing=lat.spacing[0],
                                     status=f"solver-failed: {err}"))
            continue
        nodes, pts, S, _ = field_immersion_geometry(fld)
        rad = np.linalg.norm(pts, axis=1)
        region = rad <= cfg.center_fraction * a
        s_center = float(np.max(S[region])) if region.any() else np.nan
        s_node = float(S[np.argmin(rad)])
        rows.append(DecayScanRow(a=a, s_center=s_center, s_center_node=s_node,
                                 nodes=lat.shape[0], spacing=lat.spacing[0], status="ok"))
    good = [(row.a, row.s_center) for row in rows if row.status == "ok" and np.isfinite(row.s_center)]
    if len(good) >= 2 and max(s for _, s in good) > 1e-10:
        loga = np.log([a for a, _ in good])
        logs = np.log([max(s, 1e-300) for _, s in good])
        slope = float(np.polyfit(loga, logs, 1)[0])
        kind = "fit"
    elif good:
        slope, kind = None, "exact-zero"
    else:
        slope, kind = None, "insufficient"
    return DecayScan(rows=rows, slope=slope, slope_kind=kind)


# ---------------------------------------------------------------------------
# Completeness probe along geodesics

@dataclass
class ProbeReport:
    direction: np.ndarray
    t: np.ndarray
    z: np.ndarray
    ratio: np.ndarray        # |grad z| / (z + 1) along the path
    b_emp: float             # sup log(z + 1) / t
    ratio_sup: float
    status: str


def completeness_probe(gm: GraphMap, directions, T: float, n_samples: int = 200,
                       region_halfwidth: float = np.inf) -> list[ProbeReport]:
    """Integrate unit-speed geodesics from the origin and compare the
    empirical growth exponent of z + 1 against the sampled supremum of
    |grad z| / (z + 1); the integrated gradient estimate forces
    b_emp <= ratio_sup (up to quadrature error)."""
    origin = gm.position(np.zeros(gm.m))
    if np.linalg.norm(origin) > 1e-9:
        raise BasePointError(
            "completeness probe requires X(0) = 0; use GraphMap.with_base_point()"
        )
    reports = []
    for d in directions:
        d = np.asarray(d, dtype=float)
        sol = integrate_geodesic(gm, np.zeros(gm.m), d, (0.0, T),
                                 region_halfwidth=region_halfwidth)
        status = "ok" if sol.t[-1] >= T * (1 - 1e-9) else "left-region"
        ts = np.linspace(0.0, sol.t[-1], n_samples + 1)[1:]
        zs = np.zeros(ts.size)
        ratios = np.zeros(ts.size)
        for k, t in enumerate(ts):
            x = sol.sol(t)[: gm.m]
            pd = pseudo_distance(gm, x)
            zs[k] = pd.z
            ratios[k] = pd.ratio
        b_emp = float(np.max(np.log(zs + 1.0) / ts))
        reports.append(ProbeReport(direction=d, t=ts, z=zs, ratio=ratios,
                                   b_emp=b_emp, ratio_sup=float(ratios.max()),
                                   status=status))
    return reports
