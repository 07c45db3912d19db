"""Pseudo-distance and the completeness probe.

z = <X, X> is nonnegative on space-like graphs through the origin, with
closed-form gradient, Hessian and Laplacian in adapted frames.  The
gradient estimate |grad z| <= b (z + 1) integrates to exponential
control of z along geodesics; the probe measures both sides empirically.
"""

import numpy as np

from spacelike import GraphMap, completeness_probe, pseudo_distance

gm = GraphMap.from_strings(1, ["0.6*x1"])
pd = pseudo_distance(gm, [1.0])
print("tilted line, x = 1:  z =", pd.z, " |grad z| =", pd.grad_norm,
      " ratio =", pd.ratio, "(hand: 0.64, 1.6, 1.6/1.64)")

hyp = GraphMap.from_strings(2, ["sqrt(1 + x1^2 + x2^2)"]).with_base_point()
pd = pseudo_distance(hyp, [1.0, 0.0])
print("shifted hyperboloid, r = 1:  z =", pd.z, "(hand: 2*sqrt(2) - 2 =",
      2 * np.sqrt(2) - 2, ")")
print("trace Hess z =", np.trace(pd.hess), " Lap z =", pd.lap)

print("\ngeodesic probes from the origin (unit speed, parameter up to T = 3):")
for name, g in (("flat", GraphMap.from_strings(2, ["0.5*x1"])), ("hyperboloid", hyp)):
    (rep,) = completeness_probe(g, [np.array([1.0, 0.0])], T=3.0, n_samples=100)
    print(f"  {name:12s} b_emp = {rep.b_emp:.4f}  sampled sup |grad z|/(z+1) = "
          f"{rep.ratio_sup:.4f}  (b_emp must not exceed the sup)")
    print(f"  {name:12s} z(T) = {rep.z[-1]:.4f}")
