"""Desk-scale rigidity experiment.

Entire maximal graphs with bounded slope are planar; at desk scale this
shows up as decay of the second-fundamental-form norm at the center of
Dirichlet solves on growing discs.  The boundary family is the blow-down
a * g(x / a) of a fixed shape g, which keeps slopes bounded at every
scale; the measured S near the center then decays like a^{-2}, matching
the curvature estimate's rate, and an affine shape gives exact zeros.
"""

from spacelike import ScanConfig, decay_scan, parse

print("affine boundary shape (exactly planar at every radius):")
scan = decay_scan(parse("0.3*x1 - 0.1*x2", 2), [4.0, 8.0], ScanConfig(nodes=33))
for row in scan.rows:
    print(f"  a = {row.a:4g}  S near center = {row.s_center:.3e}  [{row.status}]")
print("  slope:", scan.slope_kind)

print("\nperturbed boundary shape 0.3 x1 + 0.1 sin(x2):")
scan = decay_scan(parse("0.3*x1 + 0.1*sin(x2)", 2), [4.0, 8.0, 16.0, 32.0],
                  ScanConfig(nodes=65))
for row in scan.rows:
    print(f"  a = {row.a:4g}  S near center = {row.s_center:.3e}  "
          f"(center node {row.s_center_node:.3e})  [{row.status}]")
print(f"  fitted log-log slope: {scan.slope:.3f}  (planarity shadow: about -2)")
