"""The jet groups L^n of n-jets at 0 of local diffeomorphisms of R fixing 0.

An element is stored by its derivatives ``(phi'(0), ..., phi^(n)(0))``.
The product ``xi . eta`` is the jet of ``xi o eta`` and equals the row
vector ``xi`` times the upper triangular Bell matrix ``B(eta)``.

All routines are generic over the coordinate type: floats, ``Fraction``
(exact) and :class:`~jetpaths.symexpr.Expr` (symbolic) all work.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import factorial

import numpy as np


def _zero_like(x):
    return x * 0


def _series_mul(a, b, n):
    """Truncated product of power series given by coefficient lists
    a[0..n], b[0..n]."""
    out = []
    for k in range(n + 1):
        acc = None
        for j in range(k + 1):
            if a[j] is None or b[k - j] is None:
                continue
            t = a[j] * b[k - j]
            acc = t if acc is None else acc + t
        out.append(acc)
    return out


def bell(n: int, r: int, eta):
    """Partial Bell polynomial ``B_n^r(eta_1, ..., eta_{n+1-r})``.

    Computed as ``n!/r!`` times the coefficient of ``x^n`` in
    ``(sum_p eta_p x^p / p!)^r``. Extra trailing entries of ``eta`` are
    ignored since they cannot contribute.
    """
    if not 1 <= r <= n:
        raise IndexError(f"need 1 <= r <= n, got n={n}, r={r}")
    eta = list(eta)
    need = n + 1 - r
    if len(eta) < need:
        raise IndexError(f"B_{n}^{r} needs {need} arguments, got {len(eta)}")
    # coefficient list indexed by power of x; None marks a structural zero
    base = [None] + [eta[p - 1] * Fraction(1, factorial(p)) for p in range(1, need + 1)]
    base += [None] * (n + 1 - len(base))
    acc = base
    for _ in range(r - 1):
        acc = _series_mul(acc, base, n)
    c = acc[n]
    if c is None:
        return _zero_like(eta[0])
    return c * Fraction(factorial(n), factorial(r))


def b_matrix(eta, n: int | None = None) -> np.ndarray:
    """Upper triangular n x n matrix with (p, q) entry ``B_q^p(eta)``
    (1-based p, q)."""
    eta = list(eta)
    n = len(eta) if n is None else n
    zero = _zero_like(eta[0])
    out = np.empty((n, n), dtype=object)
    for p in range(1, n + 1):
        for q in range(1, n + 1):
            out[p - 1, q - 1] = bell(q, p, eta) if q >= p else zero
    if all(isinstance(x, float) for x in eta):
        return out.astype(float)
    return out


@dataclass(frozen=True)
class JetElement:
    """Element of L^n with coordinates ``(y_1, ..., y_n)``, ``y_1 != 0``."""

    coords: tuple

    def __post_init__(self):
        c = tuple(self.coords)
        object.__setattr__(self, "coords", c)
        if not c:
            raise ValueError("empty jet")
        try:
            zero = c[0] == 0
        except TypeError:
            zero = False
        if isinstance(zero, bool) and zero:
            raise ValueError("first coordinate of a jet group element must be nonzero")

    @property
    def order(self) -> int:
        return len(self.coords)

    @property
    def positive(self) -> bool:
        """Whether the element lies in the identity component L^{n+}."""
        return float(self.coords[0]) > 0

    def __mul__(self, other: "JetElement") -> "JetElement":
        return mul(self, other)

    def __getitem__(self, k):
        return self.coords[k]

    def __iter__(self):
        return iter(self.coords)

    def __len__(self):
        return len(self.coords)

    def as_array(self) -> np.ndarray:
        return np.array([float(x) for x in self.coords])

    @classmethod
    def identity(cls, n: int, one=1.0) -> "JetElement":
        return cls((one,) + (one * 0,) * (n - 1))


def _as_element(x) -> JetElement:
    return x if isinstance(x, JetElement) else JetElement(tuple(x))


def mul(xi, eta) -> JetElement:
    """Product ``xi . eta``, the jet of ``xi o eta``."""
    xi, eta = _as_element(xi), _as_element(eta)
    if xi.order != eta.order:
        raise ValueError(f"order mismatch: {xi.order} vs {eta.order}")
    n = xi.order
    out = []
    for q in range(1, n + 1):
        acc = None
        for p in range(1, q + 1):
            t = xi.coords[p - 1] * bell(q, p, eta.coords)
            acc = t if acc is None else acc + t
        out.append(acc)
    return JetElement(tuple(out))


def inv(xi) -> JetElement:
    """Group inverse by forward substitution.

    At level q the only unknown entering ``(xi B(eta))_q = 0`` is
    ``eta_q``, through ``B_q^1 = eta_q``.
    """
    xi = _as_element(xi)
    n = xi.order
    eta = [1 / xi.coords[0] if not isinstance(xi.coords[0], int) else Fraction(1, xi.coords[0])]
    for q in range(2, n + 1):
        trial = eta + [_zero_like(eta[0])] * (n - len(eta))
        acc = None
        for p in range(2, q + 1):
            t = xi.coords[p - 1] * bell(q, p, trial)
            acc = t if acc is None else acc + t
        eta.append(-acc / xi.coords[0])
    return JetElement(tuple(eta))


def project(xi, n_new: int) -> JetElement:
    """The homomorphism L^n -> L^{n'} truncating to the first n' coordinates."""
    xi = _as_element(xi)
    if not 1 <= n_new < xi.order:
        raise ValueError(f"cannot project order {xi.order} to {n_new}")
    return JetElement(xi.coords[:n_new])


def in_kernel(xi, tol: float = 0.0) -> bool:
    """Membership in K^n, the kernel of the projection to L^1."""
    return abs(float(_as_element(xi).coords[0]) - 1) <= tol


def embed_l1(a, n: int) -> JetElement:
    """Jet of the dilation x -> a x."""
    if a == 0:
        raise ValueError("a must be nonzero")
    return JetElement((a,) + (a * 0,) * (n - 1))


def embed_l2(a, b, n: int) -> JetElement:
    """n-jet of the Moebius map x -> a x / (1 - b x / a), whose r-th
    derivative at 0 is ``r! b^(r-1) / a^(r-2)``."""
    if a == 0:
        raise ValueError("a must be nonzero")
    return JetElement(tuple(factorial(r) * b ** (r - 1) * a ** 2 / a ** r for r in range(1, n + 1)))


# -- Lie algebra -------------------------------------------------------------

@dataclass(frozen=True)
class AlgebraElement:
    """``sum_r c_r delta^r`` in the Lie algebra of L^n."""

    coeffs: tuple

    def __post_init__(self):
        object.__setattr__(self, "coeffs", tuple(self.coeffs))

    @property
    def order(self) -> int:
        return len(self.coeffs)

    @property
    def in_kernel_algebra(self) -> bool:
        return self.coeffs[0] == 0

    def __add__(self, other):
        return AlgebraElement(tuple(a + b for a, b in zip(self.coeffs, other.coeffs)))

    def __rmul__(self, s):
        return AlgebraElement(tuple(s * c for c in self.coeffs))

    def __neg__(self):
        return AlgebraElement(tuple(-c for c in self.coeffs))

    @classmethod
    def basis(cls, r: int, n: int) -> "AlgebraElement":
        return cls(tuple(1 if k == r else 0 for k in range(1, n + 1)))


def algebra_bracket(r: int, s: int, n: int) -> AlgebraElement:
    """``[delta^r, delta^s] = (r-s) delta^{r+s-1}`` if r+s <= n+1, else 0."""
    if not (1 <= r <= n and 1 <= s <= n):
        raise IndexError("generator index out of range")
    c = [0] * n
    if r + s <= n + 1:
        c[r + s - 2] = r - s
    return AlgebraElement(tuple(c))


def bracket(u: AlgebraElement, v: AlgebraElement) -> AlgebraElement:
    """Bracket of general algebra elements, extended bilinearly."""
    n = u.order
    if v.order != n:
        raise ValueError("order mismatch")
    out = [0] * n
    for r, a in enumerate(u.coeffs, 1):
        if a == 0:
            continue
        for s, b in enumerate(v.coeffs, 1):
            if b == 0 or r + s > n + 1:
                continue
            out[r + s - 2] = out[r + s - 2] + (r - s) * a * b
    return AlgebraElement(tuple(out))


def k_matrix(kappa) -> np.ndarray:
    """Strictly lower triangular K_n with ``(K_n)_{rs} = r!/(s-1)! k_{r+1-s}``
    for r > s; the ``k_1`` diagonal is zero for kernel elements."""
    c = kappa.coeffs if isinstance(kappa, AlgebraElement) else tuple(kappa)
    n = len(c)
    zero = c[0] * 0
    out = np.empty((n, n), dtype=object)
    for r in range(1, n + 1):
        for s in range(1, n + 1):
            out[r - 1, s - 1] = Fraction(factorial(r), factorial(s - 1)) * c[r - s] if r >= s else zero
    return out


def exp_k(kappa: AlgebraElement) -> JetElement:
    """Exponential of an element with ``c_1 = 0``: left column of exp(K_n).

    K_n is nilpotent, so the series stops after n terms."""
    if kappa.coeffs[0] != 0:
        raise ValueError("exp_k needs an element of the kernel algebra (c_1 = 0)")
    n = kappa.order
    K = k_matrix(kappa)
    col = np.empty(n, dtype=object)
    col[:] = [kappa.coeffs[0] * 0 + 1] + [kappa.coeffs[0] * 0] * (n - 1)
    term = col.copy()
    total = col.copy()
    for j in range(1, n):
        term = K.dot(term) * Fraction(1, j)
        total = total + term
    vals = tuple(total.tolist())
    if all(isinstance(x, float) for x in kappa.coeffs[1:]) and n > 1:
        vals = tuple(float(x) for x in vals)
    return JetElement(vals)


def log_k(y) -> AlgebraElement:
    """Inverse of :func:`exp_k` on K^n, built level by level: with
    k_2..k_{q-1} fixed, ``k_q = (y_q - p(k_2..k_{q-1})) / q!``."""
    y = _as_element(y)
    if y.coords[0] != 1:
        raise ValueError("log_k needs an element of K^n (y_1 = 1)")
    n = y.order
    zero = y.coords[0] * 0
    k = [zero]
    for q in range(2, n + 1):
        trial = AlgebraElement(tuple(k + [zero]))
        p = exp_k(trial).coords[q - 1]
        k.append((y.coords[q - 1] - p) / factorial(q))
    return AlgebraElement(tuple(k))


def phi_map(coeffs, n: int) -> AlgebraElement:
    """Send the vector field ``X(x) d/dx`` with ``X = sum_j a_j x^j`` to
    ``sum_{p=1}^n X^(p)(0)/p! delta^p = sum_p a_p delta^p``."""
    a = list(coeffs)
    if a and a[0] != 0:
        raise ValueError("vector field must vanish at the origin")
    a = a + [0] * (n + 1 - len(a))
    return AlgebraElement(tuple(a[1:n + 1]))


def poly_field_bracket(x, y) -> list:
    """Ordinary bracket ``[X d/dx, Y d/dx] = (X Y' - Y X') d/dx`` of
    polynomial fields given by coefficient lists."""
    px = np.polynomial.Polynomial(x)
    py = np.polynomial.Polynomial(y)
    return list((px * py.deriv() - py * px.deriv()).coef)
