"""Geodesics of the second-order circle system and its simpler relative.

The circle system traces unit circles from unit-speed data. The simpler
system differs by a multiple of the velocity, so it traces the same oriented
paths under a different parametrization, but its speed blows up after
arc length pi/2 from the standard jet. Both facts are printed below.

    python3 demos/circle_geodesics.py [out.csv]
"""
import sys

import numpy as np

from jetpaths import fixtures as fx
from jetpaths.geod import arclength_resample, circle_fit, hausdorff, integrate, std_init
from jetpaths.homog import are_proj_equivalent, lambda_extract
from jetpaths.symexpr import evaluate

circle, simple = fx.circle_system(2), fx.circle_simple(2)
q = np.array([[0.0, 0.0], [1.0, 0.5], [0.3, 0.7]])
for name, f in (("circle", circle), ("simple", simple)):
    rep = lambda_extract(f)
    at_q = [float(evaluate(l, q)) for l in rep.lambdas]
    print(f"{name}: homogeneous={rep.homogeneous} lambda identically zero={rep.lambda_zero} "
          f"lambda at q={np.round(at_q, 6)}")
print("3(y1.y2)/|y1|^2 at q =", round(3 * (q[1] @ q[2]) / (q[1] @ q[1]), 6))
print("projectively equivalent:", bool(are_proj_equivalent(circle, simple)))

y0 = std_init(2, 2)
tr = integrate(circle, y0, 2 * np.pi, 1e-3)
fit = circle_fit(arclength_resample(tr, 1e-2))
print(f"circle geodesic: centre {fit.center.round(9)}, radius {fit.radius:.12f}, "
      f"Richardson error {tr.error_estimate:.1e}")

tr_s = integrate(simple, y0, 2.0, 1e-4, max_speed=10.0, richardson=False)
s = tr_s.arclength()[-1]
print(f"simple system: stopped ({tr_s.status}) at t={tr_s.t[-1]:.4f}, arc length {s:.4f}")
a = arclength_resample(tr, 1e-3, length=s)
b = arclength_resample(tr_s, 1e-3, length=s)
print(f"Hausdorff distance on the shared arc: {hausdorff(a, b):.2e}")

if len(sys.argv) > 1:
    tr.to_csv(sys.argv[1])
    print("wrote", sys.argv[1])
