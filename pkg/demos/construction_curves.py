"""Where samples sit on the scaled-tail construction.

Prints the background curve ordinates for a few shapes and then the
coordinates of one GPD sample, showing that the sample scatters around the
curve of its own shape.  Pipe `curvetail curves` into a plotter for the
pictures.
"""

import numpy as np

from curvetail.construction import Convention, curve_points, scale_tail, xy_coords
from curvetail.estimator import estimate_xi
from curvetail.gpd import GpdParams, gpd_sample

K = 20
R = np.array([0.1, 0.25, 0.5, 0.75, 0.9])

_r, _x, y = curve_points(0.0, K, Convention.BASIC, K, R)
print("ordinate Y depends only on the index ratio r")
print("      " + "  ".join(f"{v:7.3f}" for v in y))
print("abscissa X = log(1 + u) at the same r, by shape")
for xi in (-2.0, -1.0, 0.0, 1.0, 2.0):
    _r, x, _y = curve_points(xi, K, Convention.BASIC, K, R)
    print(f"{xi:5.1f} " + "  ".join(f"{v:7.3f}" for v in x))
_r, x, y = curve_points(0.0, K, Convention.BASIC, K, R)
print("xi = 0 lies on Y = -X:", bool(np.allclose(y, -x, rtol=0, atol=1e-12)))

sample = gpd_sample(K, GpdParams(xi=1.0), np.random.default_rng(7))
tail = scale_tail(sample, K, Convention.BASIC)
i = np.arange(1, K // 2)
x, y = xy_coords(tail.u[: K // 2 - 1], i, K, Convention.BASIC, K)
print("\none xi=1 sample, top half of the tail")
for row in zip(i, tail.u, x, y):
    print("  i={:2d}  u={:7.3f}  X={:6.3f}  Y={:6.3f}".format(*row))
print("curve-fit estimate:", round(float(estimate_xi(tail).xi), 3))
