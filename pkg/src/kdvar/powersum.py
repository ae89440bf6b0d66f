"""Two-term power-sum systems and the minimum function m(A, B).

The central objects are the constrained systems (for A, B > 0)

    one_one:   y1^3 + y2^3 = A^3,    y1^5 + y2^5 = B^5
    two_one: 2 y1^3 + y2^3 = A^3,  2 y1^5 + y2^5 = B^5

over the closed first quadrant.  Writing theta = y2/y1 reduces each to a
scalar equation g(theta) = (B/A)^15 resp. h(theta) = (B/A)^15 with

    g(t) = (1 + t^5)^3 / (1 + t^3)^5,
    h(t) = (2 + t^5)^3 / (2 + t^3)^5,

both strictly decreasing on [0, 1] and strictly increasing on [1, inf),
which makes bracketed bisection unconditionally convergent.  The ratio
B/A classifies the solution count:

    one_one: two solutions for 2^(-2/15) < B/A < 1, the symmetric pair at
             B/A = 2^(-2/15), the axis points (0,A), (A,0) at B/A = 1,
             none below 2^(-2/15);
    two_one: one solution for 2^(-2/15) < B/A < 1, two for
             3^(-2/15) < B/A < 2^(-2/15), boundary cases at the ends.

m(A, B) = y1^7 + y2^7 at the one_one solution with y1 <= y2; it is
degree-7 homogeneous.  The excess E(x1, x2, x3) measures how much a
three-part split exceeds the two-part floor and is strictly positive.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, InfeasibleRatioError, InvalidInputError

#: lower endpoint of the feasible ratio interval for the two-term system
RATIO_TWO = 2.0 ** (-2.0 / 15.0)
#: lower endpoint for the three-term (two_one) system
RATIO_THREE = 3.0 ** (-2.0 / 15.0)

#: relative tolerance for classifying B/A against the case boundaries
BOUNDARY_RTOL = 1e-12

BISECT_ITERS = 64

SYSTEMS = ("one_one", "two_one")


def g_fn(t: float) -> float:
    """(1 + t^5)^3 / (1 + t^3)^5 for t >= 0; g(1) = 1/4."""
    if t < 0:
        raise InvalidInputError("g is defined for t >= 0")
    return (1.0 + t**5) ** 3 / (1.0 + t**3) ** 5


def h_fn(t: float) -> float:
    """(2 + t^5)^3 / (2 + t^3)^5 for t >= 0; h(0) = 1/4, h(1) = 1/9."""
    if t < 0:
        raise InvalidInputError("h is defined for t >= 0")
    return (2.0 + t**5) ** 3 / (2.0 + t**3) ** 5


def k_fn(t: float) -> float:
    """(1 + t^7)^5 / (1 + t^5)^7; same monotone shape as g and h."""
    if t < 0:
        raise InvalidInputError("k is defined for t >= 0")
    return (1.0 + t**7) ** 5 / (1.0 + t**5) ** 7


def _h_reciprocal(s: float) -> float:
    """h(1/s) = (1 + 2 s^5)^3 / (1 + 2 s^3)^5, monotone decreasing on (0, 1]."""
    return (1.0 + 2.0 * s**5) ** 3 / (1.0 + 2.0 * s**3) ** 5


def _bisect_decreasing(fn, target: float, lo: float, hi: float) -> float:
    """Root of fn(t) = target on [lo, hi] where fn is strictly decreasing."""
    for _ in range(BISECT_ITERS):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if fn(mid) > target:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


@dataclass(frozen=True)
class PowerSumSolution:
    """A nonnegative solution (y1, y2) of a two-term system.

    ``theta`` is the solved ratio y2/y1 (inf when y1 = 0).
    """

    y1: float
    y2: float
    system: str
    theta: float

    def residuals(self, a_value: float, b_value: float) -> tuple[float, float]:
        """Relative residuals of the cubic and quintic equations."""
        w = 2.0 if self.system == "two_one" else 1.0
        r3 = (w * self.y1**3 + self.y2**3 - a_value**3) / a_value**3
        r5 = (w * self.y1**5 + self.y2**5 - b_value**5) / b_value**5
        return r3, r5


@dataclass(frozen=True)
class RatioDomain:
    """An (A, B) pair with its constraint ratio."""

    a_value: float
    b_value: float

    def __post_init__(self):
        if self.a_value <= 0 or self.b_value <= 0:
            raise InvalidInputError("A and B must be positive")

    @property
    def ratio(self) -> float:
        return self.b_value / self.a_value

    @property
    def in_t(self) -> bool:
        """Membership in T = {2^(-2/15) <= B/A <= 1} up to tolerance."""
        r = self.ratio
        return (r >= RATIO_TWO * (1.0 - BOUNDARY_RTOL)
                and r <= 1.0 + BOUNDARY_RTOL)


def _close(value: float, ref: float) -> bool:
    return abs(value - ref) <= BOUNDARY_RTOL * ref


def solve_two_term(system: str, a_value: float, b_value: float
                   ) -> list[PowerSumSolution]:
    """All first-quadrant solutions of the requested system.

    Raises :class:`InfeasibleRatioError` for B/A > 1; ratios below the
    system's solvability threshold return an empty list.
    """
    if system not in SYSTEMS:
        raise InvalidInputError(f"unknown system {system!r}; use one of {SYSTEMS}")
    if a_value <= 0 or b_value <= 0 or not (
            math.isfinite(a_value) and math.isfinite(b_value)):
        raise InvalidInputError("A and B must be positive and finite")
    ratio = b_value / a_value
    if ratio > 1.0 + BOUNDARY_RTOL:
        raise InfeasibleRatioError(
            f"B/A = {ratio:.6g} > 1; no nonnegative solutions exist")
    target = min(ratio, 1.0) ** 15

    if system == "one_one":
        return _solve_one_one(a_value, ratio, target)
    return _solve_two_one(a_value, ratio, target)


def _one_one_from_theta(a_value: float, theta: float) -> PowerSumSolution:
    y1 = a_value / (1.0 + theta**3) ** (1.0 / 3.0)
    return PowerSumSolution(y1, theta * y1, "one_one", theta)


def _two_one_from_theta(a_value: float, theta: float) -> PowerSumSolution:
    y1 = a_value / (2.0 + theta**3) ** (1.0 / 3.0)
    return PowerSumSolution(y1, theta * y1, "two_one", theta)


def _solve_one_one(a_value, ratio, target) -> list[PowerSumSolution]:
    if _close(ratio, 1.0):
        return [PowerSumSolution(0.0, a_value, "one_one", math.inf),
                PowerSumSolution(a_value, 0.0, "one_one", 0.0)]
    if _close(ratio, RATIO_TWO):
        y = a_value / 2.0 ** (1.0 / 3.0)
        return [PowerSumSolution(y, y, "one_one", 1.0)]
    if ratio < RATIO_TWO:
        return []
    # two roots: theta in (0, 1) and its reciprocal (g(1/t) = g(t))
    theta_low = _bisect_decreasing(g_fn, target, 0.0, 1.0)
    return [_one_one_from_theta(a_value, 1.0 / theta_low),
            _one_one_from_theta(a_value, theta_low)]


def _solve_two_one(a_value, ratio, target) -> list[PowerSumSolution]:
    if _close(ratio, 1.0):
        return [PowerSumSolution(0.0, a_value, "two_one", math.inf)]
    if _close(ratio, RATIO_THREE):
        y = a_value / 3.0 ** (1.0 / 3.0)
        return [PowerSumSolution(y, y, "two_one", 1.0)]
    if ratio < RATIO_THREE:
        return []
    # the branch on [1, inf) always carries one root here; solve it on
    # the reciprocal variable s = 1/theta where h(1/s) is decreasing
    s = _bisect_decreasing(_h_reciprocal, target, 0.0, 1.0)
    upper = _two_one_from_theta(a_value, 1.0 / s)
    if _close(ratio, RATIO_TWO):
        return [PowerSumSolution(a_value / 2.0 ** (1.0 / 3.0), 0.0,
                                 "two_one", 0.0), upper]
    if ratio > RATIO_TWO:
        return [upper]
    # 3^(-2/15) < B/A < 2^(-2/15): additional root with theta in (0, 1)
    theta_low = _bisect_decreasing(h_fn, target, 0.0, 1.0)
    return [upper, _two_one_from_theta(a_value, theta_low)]


def m_value(a_value: float, b_value: float) -> float:
    """y1^7 + y2^7 at the one_one solution with 0 <= y1 <= y2.

    Defined on T = {(A, B): A, B > 0, 2^(-2/15) <= B/A <= 1}.
    """
    dom = RatioDomain(a_value, b_value)
    if not dom.in_t:
        raise DomainError(
            f"(A, B) with B/A = {dom.ratio:.6g} lies outside "
            f"[{RATIO_TWO:.6g}, 1]")
    ratio = min(dom.ratio, 1.0)
    theta = _bisect_decreasing(g_fn, ratio**15, 0.0, 1.0)
    y2 = a_value / (1.0 + theta**3) ** (1.0 / 3.0)
    y1 = theta * y2
    return y1**7 + y2**7


def excess_e(x1: float, x2: float, x3: float) -> float:
    """x1^7 + x2^7 + x3^7 minus the two-part floor of its own power sums.

    Requires x1 >= x2 >= x3 > 0 with the induced constraint ratio inside
    T; strictly positive there.
    """
    if not (x1 >= x2 >= x3 > 0):
        raise InvalidInputError("need x1 >= x2 >= x3 > 0")
    a_t = (x1**3 + x2**3 + x3**3) ** (1.0 / 3.0)
    b_t = (x1**5 + x2**5 + x3**5) ** (1.0 / 5.0)
    return x1**7 + x2**7 + x3**7 - m_value(a_t, b_t)


def ratio_bound_check(k: int, a_value: float, b_value: float) -> bool:
    """Necessary solvability bound (1/k)^(2/15) <= B/A <= 1 for the
    k-term system, with boundary tolerance."""
    if k < 1 or int(k) != k:
        raise InvalidInputError("k must be a positive integer")
    if a_value <= 0 or b_value <= 0:
        raise InvalidInputError("A and B must be positive")
    ratio = b_value / a_value
    lo = (1.0 / k) ** (2.0 / 15.0)
    return (ratio >= lo * (1.0 - BOUNDARY_RTOL)
            and ratio <= 1.0 + BOUNDARY_RTOL)


def brute_force_min_x7(a_value: float, b_value: float, n: int,
                       resolution: int = 400, return_point: bool = False):
    """Approximate minimum of sum x_i^7 over the inequality-constrained set

        sum x_i^3 <= A^3,  sum x_i^5 >= B^5,  x1 >= ... >= xn >= 0,

    by dense search over scaling directions plus golden-section
    refinement.  Independent oracle used only by tests and `verify`.

    For a direction d (d1 = 1 >= d2 >= ... >= dn >= 0) the best radius
    saturates the quintic constraint, giving objective
    B^7 * sum(d^7) / (sum d^5)^(7/5), feasible iff
    (sum d^3)^(1/3) / (sum d^5)^(1/5) <= A/B.
    """
    if not 2 <= n <= 6:
        raise InvalidInputError("n must be in 2..6")
    if resolution < 8:
        raise InvalidInputError("resolution too small")
    if (resolution + 1) ** max(n - 2, 1) > 2e7:
        raise InvalidInputError(
            f"lattice of {(resolution + 1) ** (n - 2):.2g} points per slice "
            "is too large; lower the resolution")
    if not ratio_bound_check(n, a_value, b_value):
        raise DomainError(
            f"B/A = {b_value / a_value:.6g} violates the {n}-term bound")

    limit = a_value / b_value

    def objective_and_feasible(d_tail: np.ndarray):
        """d_tail: (m, n-1) array of directions below the leading 1."""
        s3 = 1.0 + np.sum(d_tail**3, axis=1)
        s5 = 1.0 + np.sum(d_tail**5, axis=1)
        s7 = 1.0 + np.sum(d_tail**7, axis=1)
        feasible = s3 ** (1.0 / 3.0) / s5 ** (1.0 / 5.0) <= limit
        obj = b_value**7 * s7 / s5 ** (7.0 / 5.0)
        return np.where(feasible, obj, np.inf), feasible

    grid = np.linspace(0.0, 1.0, resolution + 1)
    best_val = np.inf
    best_tail = np.zeros(n - 1)
    if n == 2:
        tails = grid[:, None]
        vals, _ = objective_and_feasible(tails)
        i = int(np.argmin(vals))
        best_val, best_tail = float(vals[i]), tails[i]
    else:
        # iterate over d2; vectorize the remaining coordinates in blocks
        inner_dims = n - 2
        for d2 in grid:
            sub = grid[grid <= d2]
            mesh = np.meshgrid(*([sub] * inner_dims), indexing="ij")
            tail = np.stack([m.ravel() for m in mesh], axis=1)
            # enforce decreasing order d3 >= d4 >= ...
            if inner_dims > 1:
                keep = np.all(tail[:, :-1] >= tail[:, 1:], axis=1)
                tail = tail[keep]
            full = np.concatenate(
                [np.full((tail.shape[0], 1), d2), tail], axis=1)
            vals, _ = objective_and_feasible(full)
            i = int(np.argmin(vals))
            if vals[i] < best_val:
                best_val, best_tail = float(vals[i]), full[i]
    if not np.isfinite(best_val):
        raise DomainError("no feasible direction found on the lattice")

    # golden-section sweeps, one coordinate at a time
    inv_phi = (math.sqrt(5.0) - 1.0) / 2.0

    def scalar_obj(tail):
        v, _ = objective_and_feasible(tail[None, :])
        return float(v[0])

    tail = best_tail.copy()
    for _ in range(3):
        for j in range(n - 1):
            lo = 0.0
            hi = 1.0 if j == 0 else tail[j - 1]
            c1 = hi - inv_phi * (hi - lo)
            c2 = lo + inv_phi * (hi - lo)
            t1, t2 = tail.copy(), tail.copy()
            t1[j], t2[j] = c1, c2
            f1, f2 = scalar_obj(t1), scalar_obj(t2)
            for _ in range(60):
                if f1 < f2:
                    hi, c2, f2 = c2, c1, f1
                    c1 = hi - inv_phi * (hi - lo)
                    t1[j] = c1
                    f1 = scalar_obj(t1)
                else:
                    lo, c1, f1 = c1, c2, f2
                    c2 = lo + inv_phi * (hi - lo)
                    t2[j] = c2
                    f2 = scalar_obj(t2)
            tail[j] = 0.5 * (lo + hi)
            if scalar_obj(tail) > best_val:
                tail[j] = best_tail[j]
        if scalar_obj(tail) < best_val:
            best_val = scalar_obj(tail)
            best_tail = tail.copy()

    if not return_point:
        return best_val
    s5 = 1.0 + float(np.sum(best_tail**5))
    r = b_value / s5 ** 0.2
    point = sorted((r * d for d in np.concatenate([[1.0], best_tail])),
                   reverse=True)
    return best_val, tuple(point)


def hessian_det(gamma: float, delta: float) -> tuple[float, float]:
    """Determinant of the bordered 5x5 second-order test matrix at the
    symmetric critical point Q = (gamma, gamma, delta), together with its
    closed form 6300 * gamma^7 delta^4 (gamma^2 - delta^2)^3.

    The matrix is [[0, B], [B^T, D]]: B holds the (negated) gradients of
    the cubic and quintic constraints at Q, and D is the Hessian of the
    Lagrangian of f = sum x^7 with multipliers solved from the
    criticality conditions 7 x^6 = 3 l1 x^2 + 5 l2 x^4 at x = gamma and
    x = delta.
    """
    if not 0 < gamma < delta:
        raise InvalidInputError("need 0 < gamma < delta")
    lam = np.linalg.solve(
        np.array([[3.0 * gamma**2, 5.0 * gamma**4],
                  [3.0 * delta**2, 5.0 * delta**4]]),
        np.array([7.0 * gamma**6, 7.0 * delta**6]))
    q = np.array([gamma, gamma, delta])
    d_diag = 42.0 * q**5 - 6.0 * lam[0] * q - 20.0 * lam[1] * q**3
    b_block = np.vstack([-3.0 * q**2, -5.0 * q**4])
    h = np.zeros((5, 5))
    h[:2, 2:] = b_block
    h[2:, :2] = b_block.T
    h[2:, 2:] = np.diag(d_diag)
    numeric = float(np.linalg.det(h))
    closed = 6300.0 * gamma**7 * delta**4 * (gamma**2 - delta**2) ** 3
    return numeric, closed
