import numpy as np
import pytest

from spacelike.bernstein import (
    DIJKSTRA_METRICATION, ScanConfig, completeness_probe, decay_scan,
    estimate_report, geodesic_radius,
)
from spacelike.exprparse import parse
from spacelike.graphgeom import GraphMap
from spacelike.lattice import Lattice, LatticeError


def hyperboloid(shifted=False):
    tail = " - 1" if shifted else ""
    return GraphMap.from_strings(2, [f"sqrt(1+x1^2+x2^2){tail}"])


# -- geodesic radius -----------------------------------------------------------

def test_radius_flat_metrication_bound():
    gm = GraphMap.from_strings(2, ["0"])
    lat = Lattice.box((-1, -1), (1, 1), 33)
    rf = geodesic_radius(gm, lat, [0.0, 0.0])
    import spacelike.lattice as lm

    pts = lm.node_points(lat)
    exact = np.linalg.norm(pts, axis=1).reshape(lat.shape)
    sel = exact > 0.2  # skip the near field where h dominates
    ratio = rf.r[sel] / exact[sel]
    assert np.nanmax(ratio) - 1.0 <= DIJKSTRA_METRICATION + 0.01
    assert np.nanmin(ratio) >= 1.0 - 1e-9  # lattice paths never beat the line


def test_radius_hyperboloid_radial_closed_form():
    gm = hyperboloid()
    lat = Lattice.box((-1.0, -1.0), (1.0, 1.0), 129)  # h = 1/64
    rf = geodesic_radius(gm, lat, [0.0, 0.0])
    xs = np.asarray(lat.axes()[0])
    mid = lat.shape[1] // 2
    for i, x in enumerate(xs):
        if abs(x) < 0.3:
            continue
        expected = np.arcsinh(abs(x))  # radial metric coefficient 1/(1+r^2)
        assert abs(rf.r[i, mid] - expected) <= 0.02 * expected


def test_radius_refinement_improves():
    gm = hyperboloid()
    errs = []
    for nodes in (17, 33, 65):
        lat = Lattice.box((-1.0, -1.0), (1.0, 1.0), nodes)
        rf = geodesic_radius(gm, lat, [0.0, 0.0])
        xs = np.asarray(lat.axes()[0])
        mid = lat.shape[1] // 2
        errs.append(abs(rf.r[-1, mid] - np.arcsinh(1.0)))
    assert errs[2] < errs[1] < errs[0]


def test_radius_triangle_inequality_on_samples():
    gm = GraphMap.from_strings(2, ["0.3*sin(x1)"])
    lat = Lattice.box((-1, -1), (1, 1), 21)
    r0 = geodesic_radius(gm, lat, [0.0, 0.0]).r
    r1 = geodesic_radius(gm, lat, [0.5, 0.5]).r
    # d(0, x) <= d(0, p) + d(p, x) with p the second source
    p_from_0 = r0[15, 15]
    assert np.nanmax(r0 - (p_from_0 + r1)) <= 1e-9


def test_radius_disconnected_lattice():
    gm = GraphMap.from_strings(2, ["0"])
    # annulus hole wider than the box: only four corner patches survive,
    # mutually disconnected
    lat = Lattice((-2.0, -2.0), (2.0, 2.0), (13, 13), mask=("annulus", 2.45, 4.0))
    with pytest.raises(LatticeError):
        geodesic_radius(gm, lat, [2.0, 2.0])


# -- estimate report -----------------------------------------------------------

def test_report_affine_zero_ratios():
    gm = GraphMap.from_strings(2, ["0.2*x1+0.1*x2"])
    lat = Lattice.box((-2, -2), (2, 2), 33)
    rep = estimate_report(gm, [0.0, 0.0], 1.0, lat)
    assert rep.ratio29 == 0.0
    assert rep.ratio28 == 0.0
    assert np.all(rep.r <= 1.0 + 1e-12)


def test_report_hyperboloid_stable_under_refinement():
    gm = hyperboloid()
    vals = []
    for nodes in (33, 65):
        lat = Lattice.box((-2, -2), (2, 2), nodes)
        rep = estimate_report(gm, [0.0, 0.0], 1.0, lat)
        assert np.isfinite(rep.ratio29) and rep.ratio29 > 0
        vals.append(rep.ratio29)
        assert abs(rep.h_bar - 1.0) <= 1e-9
    assert abs(vals[1] - vals[0]) <= 0.1 * vals[0]


def test_report_catenoid_ratio28_finite():
    gm = GraphMap.from_strings(2, ["asinh(sqrt(x1^2+x2^2))"])
    lat = Lattice.annulus(0.5, 2.0, 65)
    rep = estimate_report(gm, [1.2, 0.0], 0.5, lat)
    assert np.isfinite(rep.ratio28) and rep.ratio28 > 0
    assert rep.mu > 0


def test_report_scale_covariance():
    # rescaling the ambient by lam maps (a, S) -> (lam a, S / lam^2) and
    # leaves ratio29 invariant
    gm1 = GraphMap.from_strings(2, ["0.3*x1^2 + 0.2*x2^2"])
    lam = 2.0
    gm2 = GraphMap.from_strings(2, [f"({lam!r})*(0.3*(x1/{lam})^2 + 0.2*(x2/{lam})^2)"])
    lat1 = Lattice.box((-1, -1), (1, 1), 41)
    lat2 = Lattice.box((-lam, -lam), (lam, lam), 41)
    rep1 = estimate_report(gm1, [0.0, 0.0], 0.6, lat1)
    rep2 = estimate_report(gm2, [0.0, 0.0], lam * 0.6, lat2)
    assert abs(rep2.ratio29 - rep1.ratio29) <= 1e-9 * (1 + rep1.ratio29)


def test_report_ball_exceeds_lattice():
    gm = GraphMap.from_strings(2, ["0"])
    lat = Lattice.box((-1, -1), (1, 1), 9)
    with pytest.raises(LatticeError):
        estimate_report(gm, [0.0, 0.0], 10.0, lat)


# -- decay scan ------------------------------------------------------------------

def test_decay_scan_affine_exact_zero():
    scan = decay_scan(parse("0.3*x1 - 0.1*x2", 2), [2.0, 4.0, 8.0],
                      ScanConfig(nodes=33))
    for row in scan.rows:
        assert row.status == "ok"
        assert row.s_center <= 1e-10
    assert scan.slope_kind == "exact-zero"


def test_decay_scan_slope_near_minus_two():
    scan = decay_scan(parse("0.3*x1 + 0.1*sin(x2)", 2), [4.0, 8.0, 16.0],
                      ScanConfig(nodes=49))
    assert scan.slope_kind == "fit"
    assert -2.6 <= scan.slope <= -1.4
    # and the signal is well above solver noise
    assert all(row.s_center > 1e-8 for row in scan.rows)


def test_decay_scan_amplitude_robustness():
    cfg = ScanConfig(nodes=33)
    s1 = decay_scan(parse("0.3*x1 + 0.1*sin(x2)", 2), [4.0, 8.0], cfg)
    s2 = decay_scan(parse("0.3*x1 + 0.2*sin(x2)", 2), [4.0, 8.0], cfg)
    assert abs(s1.slope - s2.slope) <= 0.3
    assert s2.rows[0].s_center > s1.rows[0].s_center


def test_decay_scan_partial_failure_reported():
    # slope > 1 data cannot be space-like; every radius fails but a table
    # still comes back
    scan = decay_scan(parse("2*x1", 2), [2.0, 4.0], ScanConfig(nodes=17))
    assert all(r.status.startswith("solver-failed") for r in scan.rows)
    assert scan.slope_kind == "insufficient"


# -- completeness probe ------------------------------------------------------------

def test_probe_flat_graph_quadratic_z():
    gm = GraphMap.from_strings(1, ["0.6*x1"])
    (rep,) = completeness_probe(gm, [np.array([1.0])], T=5.0)
    assert rep.status == "ok"
    # unit-speed straight line: z(t) = t^2 exactly
    assert np.max(np.abs(rep.z - rep.t**2)) <= 1e-6 * (1 + rep.z[-1])
    assert rep.b_emp <= rep.ratio_sup + 1e-3


def test_probe_shifted_hyperboloid_closed_form():
    gm = GraphMap.from_strings(2, ["sqrt(1+x1^2+x2^2) - 1"])
    dirs = [np.array([1.0, 0.0]), np.array([0.6, 0.8])]
    reports = completeness_probe(gm, dirs, T=3.0)
    for rep in reports:
        assert rep.status == "ok"
        # radial geodesics: z(t) = 2 cosh t - 2
        assert np.max(np.abs(rep.z - (2 * np.cosh(rep.t) - 2.0))) <= 1e-5 * np.cosh(3.0)
        assert rep.b_emp <= rep.ratio_sup + 1e-3


def test_probe_region_exit_reported():
    gm = GraphMap.from_strings(1, ["0.0*x1"])
    (rep,) = completeness_probe(gm, [np.array([1.0])], T=10.0, region_halfwidth=2.0)
    assert rep.status == "left-region"
    assert rep.t[-1] <= 2.1


def test_probe_requires_base_point():
    from spacelike.graphgeom import BasePointError

    gm = GraphMap.from_strings(2, ["sqrt(1+x1^2+x2^2)"])
    with pytest.raises(BasePointError):
        completeness_probe(gm, [np.array([1.0, 0.0])], T=1.0)
