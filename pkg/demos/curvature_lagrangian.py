"""The squared-curvature Lagrangian k^2 |y_1| in the plane.

Checks the reparametrization conditions, builds the Hilbert and
Euler-Lagrange forms, confirms the bundled fourth-order field solves the
equations, measures the kernel of d(theta), and integrates one extremal to
watch the conserved vector.

    python3 demos/curvature_lagrangian.py
"""
import numpy as np

from jetpaths import fixtures as fx
from jetpaths.geod import conserved_vector, integrate, std_init, tangency_drift
from jetpaths.homog import lambda_extract
from jetpaths.symexpr import to_string
from jetpaths.varcalc import el_identity_report, regularity_rank, verify_el_field, zermelo_check

m = 2
lag, field = fx.curvature_lagrangian(m), fx.curvature_field(m)
print("L =", to_string(lag.L))
print("Zermelo residuals:", {r: f"{v:.1e}" for r, v in zermelo_check(lag).items()})
rep = el_identity_report(lag)
print(f"S eps {rep.s_eps:.1e}, i_T theta - L {rep.i_t_theta:.1e}, i_T dtheta + eps {rep.i_t_dtheta:.1e}")
print(f"field residual in eps: {verify_el_field(lag, field):.1e}")

hom = lambda_extract(field)
print("field homogeneous:", hom.homogeneous, "lambda^1 zero:", hom.lambda_zero[0])

p = std_init(m, 3)
p[2] += [0.2, 0.0]
p[3] = [0.1, -0.4]
rank = regularity_rank(lag, p, field)
print(f"dim ker dtheta = {rank.kernel_dim} of {rank.dim}, spectral gap {rank.gap:.1e}")

tr = integrate(field, std_init(m, 3), 3.0, 1e-3)
print(f"extremal: conserved-vector drift {conserved_vector(tr):.1e}, "
      f"tangency drift {max(tangency_drift(tr).values()):.1e}")
print("end point", np.round(tr.positions[-1], 6))
