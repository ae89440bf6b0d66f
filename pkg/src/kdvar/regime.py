"""Constraint-space geometry for the pair (a, b) = (E2, E3).

A nonzero H2 function with E2 = a and E3 = b exists iff a > 0 and
b >= -mu * a^(5/3) with mu = (36/5) (1/12)^(5/3).  Within that feasible
set the minimization of E4 splits into three regimes:

    Case1  b = -mu a^(5/3)                      single soliton, C = (a/12)^(2/3)
    Case2  -mu a^(5/3) < b < -mu a^(5/3)/2^(2/3) unique pair 0 < C1 < C2
    Case3  b >= -mu a^(5/3) / 2^(2/3)            no minimizer exists

Case boundaries are classified with relative tolerance 1e-9 on b; Case1
owns its boundary curve and Case3 owns b = -mu a^(5/3)/2^(2/3).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from . import powersum
from .errors import DomainError, InvalidInputError
from .soliton import closed_form_energy

BOUNDARY_RTOL = 1e-9

REGIME_INFEASIBLE = "Infeasible"
REGIME_CASE1 = "Case1"
REGIME_CASE2 = "Case2"
REGIME_CASE3 = "Case3"


class NoMinimizer:
    """Marker: the infimum exists but is not attained (Case3)."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "NoMinimizer"


NO_MINIMIZER = NoMinimizer()


def mu_const() -> float:
    """mu = (36/5) * (1/12)^(5/3), the feasibility-boundary constant."""
    return (36.0 / 5.0) * 12.0 ** (-5.0 / 3.0)


MU = mu_const()


@dataclass(frozen=True)
class ConstraintPoint:
    """An (a, b) pair with its regime tag and recovered speeds."""

    a: float
    b: float
    regime: str
    speeds: tuple[float, ...] = ()


def classify(a: float, b: float) -> ConstraintPoint:
    """Regime of (a, b); infeasible points are classified, not errors."""
    if not (math.isfinite(a) and math.isfinite(b)):
        raise InvalidInputError("constraint values must be finite")
    if a <= 0.0:
        return ConstraintPoint(a, b, REGIME_INFEASIBLE)
    b_floor = -MU * a ** (5.0 / 3.0)
    b_split = b_floor / 2.0 ** (2.0 / 3.0)
    tol = BOUNDARY_RTOL * abs(b_floor)
    if abs(b - b_floor) <= tol:
        return ConstraintPoint(a, b, REGIME_CASE1, ((a / 12.0) ** (2.0 / 3.0),))
    if b < b_floor:
        return ConstraintPoint(a, b, REGIME_INFEASIBLE)
    if b >= b_split - tol:
        return ConstraintPoint(a, b, REGIME_CASE3)
    return ConstraintPoint(a, b, REGIME_CASE2, invert(a, b, _checked=True))


def forward(speeds) -> tuple[float, float]:
    """(E2, E3) of the soliton family with the given speeds."""
    return (closed_form_energy(2, speeds), closed_form_energy(3, speeds))


def invert(a: float, b: float, _checked: bool = False) -> tuple[float, float]:
    """The unique pair 0 < C1 < C2 with forward((C1, C2)) = (a, b).

    Reduces to the one_one two-term system for (sqrt(C2), sqrt(C1)):
    A^3 = a/12 and B^5 = -5b/36.
    """
    if not _checked:
        point = classify(a, b)
        if point.regime != REGIME_CASE2:
            raise DomainError(
                f"(a, b) = ({a:.6g}, {b:.6g}) is {point.regime}, not Case2")
    a_pow = (a / 12.0) ** (1.0 / 3.0)
    b_pow = (-5.0 * b / 36.0) ** (1.0 / 5.0)
    theta = powersum._bisect_decreasing(
        powersum.g_fn, (b_pow / a_pow) ** 15, 0.0, 1.0)
    y_big = a_pow / (1.0 + theta**3) ** (1.0 / 3.0)
    y_small = theta * y_big
    return (y_small**2, y_big**2)


def j_value(a: float, b: float):
    """Infimum of E4 under the constraints: the closed-form soliton value
    in Case1/Case2, a :data:`NO_MINIMIZER` marker in Case3."""
    point = classify(a, b)
    if point.regime == REGIME_INFEASIBLE:
        raise DomainError(f"(a, b) = ({a:.6g}, {b:.6g}) is infeasible")
    if point.regime == REGIME_CASE3:
        return NO_MINIMIZER
    return closed_form_energy(4, point.speeds)
