"""Estimate drift with tail length for a Weibull-type tail.

A Weibull tail with exponent 0.5 lies in the exponential (xi = 0) domain of
attraction, yet its upper order statistics look heavy-tailed.  Fitting
noise-free order statistics of a sample of 200 shows the estimate growing
with the number k of points used, and the k' back-extrapolation towards
small k counters part of that drift.
"""

import numpy as np

from curvetail.construction import Convention, ScaledTail
from curvetail.estimator import estimate_xi, kprime_estimate, kprime_sequence
from curvetail.zoo import weibull_analytic_u

N, TAU = 200, 0.5
positions = (np.arange(1, N + 1) - 0.5) / N
for k in (20, 100, 200):
    u = weibull_analytic_u(np.arange(1, k + 1), k // 2, k, TAU, positions)
    xi = estimate_xi(ScaledTail(u, k, Convention.K_HALF, N)).xi
    print(f"k={k:3d}  xi_hat={xi:.3f}")

values = (-np.log(positions)) ** (1 / TAU)
kps, est = kprime_sequence(values, 200)
print("\nk' sequence:", " ".join(f"{k}:{x:.3f}" for k, x in zip(kps, est)))
print(f"weighted intercept at k'=0: {kprime_estimate(values, 200):.3f}")
