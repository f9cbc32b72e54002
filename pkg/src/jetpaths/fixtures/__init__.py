"""Worked systems on Euclidean R^m: the circle systems, the curvature
Lagrangian and its fourth-order Euler-Lagrange field.

The JSON files beside this module encode the m = 2 (circle) and m = 3
(curvature) versions as expression strings for the command line.
"""
from __future__ import annotations

import json
from importlib import resources

from ..symexpr import Expr, balanced_sum, row, sqrt


def _dot(a, b) -> Expr:
    return balanced_sum(x * y for x, y in zip(a, b))


def circle_system(m: int = 2):
    """Third-order field with lambda^1 = lambda^2 = 0; geodesics are circles."""
    from ..homog import DEField

    y1, y2 = row(1, m), row(2, m)
    A, a, B = _dot(y1, y1), _dot(y1, y2), _dot(y2, y2)
    c1 = -(2 * A * B + a ** 2) / (2 * A ** 2)
    c2 = 3 * a / A
    return DEField(m, 2, tuple(c1 * u + c2 * v for u, v in zip(y1, y2)))


def circle_simple(m: int = 2):
    """The projectively equivalent field ``3 (y1.y2)/|y1|^2 y2``."""
    from ..homog import DEField

    y1, y2 = row(1, m), row(2, m)
    c2 = 3 * _dot(y1, y2) / _dot(y1, y1)
    return DEField(m, 2, tuple(c2 * v for v in y2))


def curvature_lagrangian(m: int = 2):
    """``L = (|y1|^2 |y2|^2 - (y1.y2)^2) / |y1|^5``, i.e. kappa^2 |y1|."""
    from ..varcalc import Lagrangian

    y1, y2 = row(1, m), row(2, m)
    A = _dot(y1, y1)
    L = (A * _dot(y2, y2) - _dot(y1, y2) ** 2) / A ** 2 / sqrt(A)
    return Lagrangian(m, 2, L)


def curvature_field(m: int = 2):
    """Fourth-order Euler-Lagrange field of the curvature Lagrangian."""
    from ..homog import DEField

    y1, y2, y3 = row(1, m), row(2, m), row(3, m)
    A = _dot(y1, y1)
    a12, a13, a23 = _dot(y1, y2), _dot(y1, y3), _dot(y2, y3)
    B = _dot(y2, y2)
    c1 = -3 * a23 / A
    c2 = (5 * A * B - 35 * a12 ** 2 + 8 * A * a13) / (2 * A ** 2)
    c3 = 6 * a12 / A
    return DEField(m, 3, tuple(c1 * u + c2 * v + c3 * w for u, v, w in zip(y1, y2, y3)))


def nonhomogeneous(m: int = 2):
    """``Gamma^i = y^i_0`` at order three; fails the homogeneity test."""
    from ..homog import DEField

    return DEField(m, 2, tuple(row(0, m)))


FILES = ("circle.json", "circle_simple.json", "curvature.json", "curvature_field.json", "nonhom.json")


def load_json(name: str) -> dict:
    return json.loads(resources.files(__package__).joinpath(name).read_text())


def path(name: str):
    return resources.files(__package__).joinpath(name)
