"""Jet-group arithmetic with exact rationals.

Composes two 3-jets of diffeomorphisms of the line, checks the result
against composing the Taylor polynomials directly, then walks the
exponential and logarithm on the kernel of the projection to first order.

    python3 demos/jet_group_arithmetic.py
"""
from fractions import Fraction as F
from math import factorial

from jetpaths.jetgroup import AlgebraElement, b_matrix, exp_k, inv, log_k, mul


def taylor_compose(xi, eta):
    """Derivatives at 0 of x -> xi(eta(x)), truncated at the jet order."""
    n = len(xi)
    inner = [F(0)] + [F(c) / factorial(k) for k, c in enumerate(eta, 1)]
    out = [F(0)] * (n + 1)
    power = [F(1)] + [F(0)] * n  # eta(x)^k, truncated
    for k, c in enumerate(xi, 1):
        power = [sum(power[i] * inner[j - i] for i in range(j + 1)) for j in range(n + 1)]
        out = [o + F(c) / factorial(k) * q for o, q in zip(out, power)]
    return tuple(out[k] * factorial(k) for k in range(1, n + 1))


xi = (F(2), F(1), F(-3))
eta = (F(1, 2), F(4), F(1, 3))
prod = mul(xi, eta)
print("xi . eta        =", [str(c) for c in prod.coords])
print("composition     =", [str(c) for c in taylor_compose(xi, eta)])
print("B(eta) =")
for row in b_matrix(eta):
    print("   ", [str(c) for c in row])
print("xi^-1           =", [str(c) for c in inv(xi).coords])
print("xi . xi^-1      =", [str(c) for c in mul(xi, inv(xi)).coords])

# the kernel of the first-order projection is reached by exponentials
k = AlgebraElement((0, F(1, 2), F(-1, 3), F(2)))
y = exp_k(k)
print("exp(kappa)      =", [str(c) for c in y.coords])
print("log(exp(kappa)) =", [str(c) for c in log_k(y).coeffs])
