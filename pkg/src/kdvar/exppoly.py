"""Exact algebra for exponential polynomials  sum_k c_k * exp(mu_k * x).

The tau-functions of soliton profiles and all their derivatives live in
this class of functions, which is closed under addition, multiplication,
and differentiation.  Working with the exact term lists (rather than
sampled values) gives derivatives of any order without differencing
noise.

Canonical form: terms sorted by strictly increasing rate, no duplicate
rates, no zero coefficients; the empty term list is the zero function.
Rates are merged by exact bitwise equality only -- every rate in this
package is built identically from a finite set of speed parameters, so
no fuzzy matching is needed (and fuzzy merging would make results
depend on term order).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError

# Coefficients below this magnitude are dropped during canonicalization.
# Long products of tau-function factors cancel exactly in theory; this
# sweeps up the subnormal dust such cancellations can leave behind.
COEFF_FLOOR = 1e-300


@dataclass(frozen=True)
class ExpPoly:
    """A finite sum of real exponential terms, in canonical form.

    ``terms`` is a tuple of (coefficient, rate) pairs.  Instances are
    immutable; build them with :func:`canonicalize` or the arithmetic
    operators, not by hand.
    """

    terms: tuple[tuple[float, float], ...]

    def __add__(self, other: "ExpPoly") -> "ExpPoly":
        return canonicalize(list(self.terms) + list(other.terms))

    def __sub__(self, other: "ExpPoly") -> "ExpPoly":
        return self + (-other)

    def __neg__(self) -> "ExpPoly":
        return ExpPoly(tuple((-c, r) for c, r in self.terms))

    def __mul__(self, other: "ExpPoly") -> "ExpPoly":
        return mul(self, other)

    def scale(self, factor: float) -> "ExpPoly":
        if factor == 0.0:
            return ZERO
        return canonicalize([(c * factor, r) for c, r in self.terms])

    @property
    def is_zero(self) -> bool:
        return not self.terms

    def derivative(self, order: int = 1) -> "ExpPoly":
        return derivative(self, order)

    def eval(self, x):
        return eval_poly(self, x)

    def eval_scaled(self, x):
        return eval_scaled(self, x)


ZERO = ExpPoly(())
ONE = ExpPoly(((1.0, 0.0),))


def canonicalize(terms) -> ExpPoly:
    """Merge terms with equal rates, drop zeros, sort by rate ascending.

    Raises :class:`InvalidInputError` on non-finite coefficients or rates.
    """
    acc: dict[float, float] = {}
    for coeff, rate in terms:
        coeff = float(coeff)
        rate = float(rate)
        if not (math.isfinite(coeff) and math.isfinite(rate)):
            raise InvalidInputError(
                f"non-finite exponential term ({coeff}, {rate})")
        acc[rate] = acc.get(rate, 0.0) + coeff
    kept = [(c, r) for r, c in acc.items() if c != 0.0 and abs(c) >= COEFF_FLOOR]
    kept.sort(key=lambda t: t[1])
    return ExpPoly(tuple(kept))


def add(p: ExpPoly, q: ExpPoly) -> ExpPoly:
    return p + q


def mul(p: ExpPoly, q: ExpPoly) -> ExpPoly:
    """Product: rates add, coefficients multiply, like rates merge."""
    if p.is_zero or q.is_zero:
        return ZERO
    out: dict[float, float] = {}
    for cp, rp in p.terms:
        for cq, rq in q.terms:
            r = rp + rq
            out[r] = out.get(r, 0.0) + cp * cq
    poly = canonicalize(out.items())
    for c, _ in poly.terms:
        if not math.isfinite(c):
            raise InvalidInputError("coefficient overflow in product")
    return poly


def derivative(p: ExpPoly, order: int = 1) -> ExpPoly:
    """Exact derivative: each term (c, mu) maps to (c * mu**order, mu)."""
    if order < 0 or order != int(order):
        raise InvalidInputError(f"derivative order must be a nonneg int, got {order}")
    if order == 0:
        return p
    return canonicalize([(c * r**order, r) for c, r in p.terms])


def eval_poly(p: ExpPoly, x):
    """Direct evaluation.  May overflow to inf for large rate*x; use
    :func:`eval_scaled` when that matters."""
    if p.is_zero:
        return np.zeros_like(x, dtype=float) if isinstance(x, np.ndarray) else 0.0
    coeffs = np.array([c for c, _ in p.terms])
    rates = np.array([r for _, r in p.terms])
    with np.errstate(over="ignore"):
        vals = np.exp(np.multiply.outer(np.asarray(x, dtype=float), rates)) @ coeffs
    return vals if isinstance(x, np.ndarray) else float(vals)


def eval_scaled(p: ExpPoly, x):
    """Evaluate as (mantissa, log_offset) with value = mantissa * exp(log_offset).

    The offset is max_k(mu_k * x), so |mantissa| <= sum|c_k| and ratios
    of two polynomials can be formed without overflow whenever the true
    ratio is representable.
    """
    scalar = not isinstance(x, np.ndarray)
    xa = np.asarray(x, dtype=float)
    if p.is_zero:
        zero = np.zeros_like(xa)
        return (0.0, 0.0) if scalar else (zero, zero.copy())
    coeffs = np.array([c for c, _ in p.terms])
    rates = np.array([r for _, r in p.terms])
    rx = np.multiply.outer(xa, rates)
    offset = rx.max(axis=-1)
    mant = np.exp(rx - offset[..., None]) @ coeffs
    if scalar:
        return float(mant), float(offset)
    return mant, offset


def eval_ratio(num: ExpPoly, den: ExpPoly, x):
    """Evaluate num/den through the scaled form; underflows to 0, never NaN."""
    mn, sn = eval_scaled(num, x)
    md, sd = eval_scaled(den, x)
    with np.errstate(under="ignore"):
        return (mn / md) * np.exp(sn - sd)
