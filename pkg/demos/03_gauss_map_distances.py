"""Tangent planes as points of a noncompact symmetric space.

Space-like m-planes in R^{m+n}_n are charted by slope matrices with
largest singular value below 1; geodesic distance is the root sum of
squared inverse hyperbolic tangents of relative singular values.  For
one normal direction this reduces to hyperbolic-space distance between
unit normals, which gives an independent oracle.
"""

import numpy as np

from spacelike import GraphMap, SpacelikePlane, distance, gauss_map, max_modulus, pullback_check
from spacelike.grassmann import hyperbolic_distance_n1

P = SpacelikePlane([[0.0]])
Q = SpacelikePlane([[0.5]])
print("base plane vs slope 0.5: distance", distance(P, Q), "= artanh(0.5) =", np.arctanh(0.5))
print("hyperbolic-normal oracle:", hyperbolic_distance_n1(P, Q))

# boost additivity along a one-parameter family of planes
u, v = np.array([1.0]), np.array([0.6, 0.8])
for t1, t2 in [(0.3, 1.2), (-0.4, 0.9)]:
    A = SpacelikePlane(np.tanh(t1) * np.outer(u, v))
    B = SpacelikePlane(np.tanh(t2) * np.outer(u, v))
    print(f"d(A(t={t1}), A(t={t2})) = {distance(A, B):.12f}  (expect {abs(t1 - t2)})")

# the Gauss map of the hyperbolic plane is an isometry: a geodesic sphere
# of intrinsic radius a maps to a sphere of radius a in the plane space
gm = GraphMap.from_strings(2, ["sqrt(1 + x1^2 + x2^2)"])
ref = gauss_map(gm, [0.0, 0.0])
print("\nhyperboloid Gauss-map modulus over geodesic spheres:")
for a in (0.5, 1.0, 1.5):
    R = np.sinh(a)
    samples = [[R * np.cos(t), R * np.sin(t)] for t in np.linspace(0, 2 * np.pi, 60)]
    print(f"  radius {a}: max modulus {max_modulus(gm, samples, ref):.6f}")

# differential of the Gauss map: finite-difference stretch against the
# second-fundamental-form prediction
rep = pullback_check(gm, [0.4, 0.1], 0)
print("\npullback stretch along e_1: fd", rep.stretch_fd, " formula", rep.stretch_formula,
      f" rel error {rep.rel_error:.2e}")
