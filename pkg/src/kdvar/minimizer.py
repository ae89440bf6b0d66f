"""Constrained minimization of E4 on the manifold {E2 = a, E3 = b}.

The solver is projected gradient descent.  Each step:

1. assembles the true projected gradient d = grad E4 - l2 grad E2
   - l3 grad E3 with (l2, l3) the L2 least-squares multipliers (this is
   the Euler-Lagrange residual field, and ||d|| is the convergence
   measure);
2. forms the search direction by applying the spectral preconditioner
   (1 + k^4)^(-1) to d and re-orthogonalizing against the constraint
   gradients in L2 (plain descent is also available, but its stable step
   is capped near 2/k_max^4 by the fourth-order term, which is
   impractically small on a 2048-point grid);
3. backtracks with an Armijo test from the running step size, halving on
   rejection and growing by 1.2x after acceptance;
4. re-projects onto the constraint manifold with a two-parameter Newton
   iteration along the constraint gradients.

Runs in the regime with no minimizer (Case3) do not converge; they
fragment into separating solitons, which :mod:`kdvar.massdecomp`
detects on the recorded checkpoints.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from . import massdecomp, regime
from .errors import DomainError, InvalidInputError, ProjectionFailureError
from .functionals import (ELFit, GridFunction, el_residual, energy,
                          fit_single_soliton, fit_two_soliton, gradient,
                          grid_points, inner, l2_norm)
from .soliton import SolitonParams, sample_profile

PROJECTION_TOL = 1e-11
PROJECTION_MAX_STEPS = 50
ARMIJO = 1e-4
STEP_GROWTH = 1.2
STEP_CAP = 1.0
STEP_FLOOR = 1e-14


@dataclass(frozen=True)
class ScaledSech:
    """Cold start: a sech^2 bump amplitude-matched to E2 = a, then
    dilated along the E2-preserving family to reach E3 = b."""


@dataclass(frozen=True)
class SolitonGuess:
    speeds: tuple[float, ...]
    phases: tuple[float, ...]


@dataclass(frozen=True)
class Perturbed:
    """Soliton guess of the classified speeds plus a seeded smooth bump
    field of the given relative sup-norm amplitude."""

    seed: int
    amplitude: float
    speeds: tuple[float, ...] | None = None
    phases: tuple[float, ...] | None = None


InitSpec = ScaledSech | SolitonGuess | Perturbed


@dataclass(frozen=True)
class MinimizeConfig:
    a: float
    b: float
    half_width: float = 60.0
    points: int = 2048
    init: InitSpec = field(default_factory=ScaledSech)
    step0: float = 1e-2
    grad_tol: float = 1e-6
    max_iters: int = 20000
    checkpoint_every: int = 0
    precondition: bool = True
    fit_final: bool = True

    def __post_init__(self):
        if self.grad_tol <= 0:
            raise InvalidInputError("grad_tol must be positive")
        if self.step0 <= 0:
            raise InvalidInputError("step0 must be positive")
        if self.max_iters < 0:
            raise InvalidInputError("max_iters must be nonnegative")


@dataclass(frozen=True)
class SolitonFit:
    speeds: tuple[float, ...]
    phases: tuple[float, ...]
    distance: float


@dataclass
class MinimizeResult:
    final: GridFunction
    e4_history: list[float]
    el: ELFit
    fitted: SolitonFit | None
    converged: bool
    stagnated: bool
    iterations: int
    history: list[tuple[int, float, float, float, float]]  # iter, E2, E3, E4, |d|
    checkpoints: list[tuple[int, GridFunction]]
    regime_tag: str


@lru_cache(maxsize=8)
def _preconditioner(points: int, half_width: float) -> np.ndarray:
    h = 2.0 * half_width / points
    k = 2.0 * np.pi * np.fft.rfftfreq(points, d=h)
    return 1.0 / (1.0 + k**4)


def _apply_preconditioner(samples: np.ndarray, half_width: float) -> np.ndarray:
    p = _preconditioner(samples.shape[0], half_width)
    return np.fft.irfft(np.fft.rfft(samples) * p, n=samples.shape[0])


def project_to_constraints(u: GridFunction, a: float, b: float) -> GridFunction:
    """Newton iteration for v = u + s1 grad E2(u) + s2 grad E3(u) with
    E2(v) = a and E3(v) = b, to |error| < 1e-11 max(1, |a|, |b|)."""
    d2 = gradient(2, u).samples
    d3 = gradient(3, u).samples
    if float(np.abs(d2).max(initial=0.0)) == 0.0:
        raise ProjectionFailureError("constraint gradients vanish (u = 0)")
    tol = PROJECTION_TOL * max(1.0, abs(a), abs(b))
    h = u.spacing
    v = u.samples.copy()
    for _ in range(PROJECTION_MAX_STEPS):
        vg = GridFunction(v, u.half_width)
        c = np.array([energy(2, vg) - a, energy(3, vg) - b])
        if max(abs(c[0]), abs(c[1])) < tol:
            return vg
        g2v = gradient(2, vg).samples
        g3v = gradient(3, vg).samples
        jac = h * np.array([[np.dot(g2v, d2), np.dot(g2v, d3)],
                            [np.dot(g3v, d2), np.dot(g3v, d3)]])
        step, *_ = np.linalg.lstsq(jac, -c, rcond=1e-12)
        if not np.isfinite(step).all():
            raise ProjectionFailureError("projection Newton step is non-finite")
        v = v + step[0] * d2 + step[1] * d3
        if not np.isfinite(v).all():
            raise ProjectionFailureError("projection iterate is non-finite")
    raise ProjectionFailureError(
        f"no convergence in {PROJECTION_MAX_STEPS} Newton steps")


def _projected_gradient(u: GridFunction) -> tuple[np.ndarray, float, tuple]:
    """(residual field d, ||d||_L2, (gradients, gram pieces)) at u."""
    g2 = gradient(2, u)
    g3 = gradient(3, u)
    g4 = gradient(4, u)
    a22, a23, a33 = inner(g2, g2), inner(g2, g3), inner(g3, g3)
    b2, b3 = inner(g4, g2), inner(g4, g3)
    det = a22 * a33 - a23 * a23
    if det > 1e-10 * a22 * a33:
        lam2 = (b2 * a33 - b3 * a23) / det
        lam3 = (a22 * b3 - a23 * b2) / det
    else:
        lam2, lam3 = 0.0, b3 / a33 if a33 > 0 else 0.0
    d = g4.samples - lam2 * g2.samples - lam3 * g3.samples
    dn = math.sqrt(max(u.spacing * float(np.dot(d, d)), 0.0))
    return d, dn, (g2, g3, a22, a23, a33, det)


def _search_direction(u: GridFunction, d: np.ndarray, pieces,
                      precondition: bool) -> tuple[np.ndarray, float]:
    """Descent direction and its E4 directional slope <d, e>."""
    h = u.spacing
    if not precondition:
        return d, h * float(np.dot(d, d))
    g2, g3, a22, a23, a33, det = pieces
    pd = _apply_preconditioner(d, u.half_width)
    r2 = h * float(np.dot(pd, g2.samples))
    r3 = h * float(np.dot(pd, g3.samples))
    if det > 1e-10 * a22 * a33:
        mu2 = (r2 * a33 - r3 * a23) / det
        mu3 = (a22 * r3 - a23 * r2) / det
    else:
        mu2, mu3 = 0.0, r3 / a33 if a33 > 0 else 0.0
    e = pd - mu2 * g2.samples - mu3 * g3.samples
    slope = h * float(np.dot(d, e))
    if slope <= 0.0:  # preconditioner lost descent; fall back to raw d
        return d, h * float(np.dot(d, d))
    return e, slope


def build_initial(cfg: MinimizeConfig) -> GridFunction:
    """Construct and project the configured initial iterate."""
    point = regime.classify(cfg.a, cfg.b)
    if point.regime == regime.REGIME_INFEASIBLE:
        raise DomainError(
            f"(a, b) = ({cfg.a:.6g}, {cfg.b:.6g}) is infeasible")
    init = cfg.init
    if isinstance(init, ScaledSech):
        u = _scaled_sech(cfg.a, cfg.b, cfg.half_width, cfg.points)
    elif isinstance(init, SolitonGuess):
        u = sample_profile(SolitonParams(tuple(init.speeds), tuple(init.phases)),
                           cfg.half_width, cfg.points)[0]
    elif isinstance(init, Perturbed):
        speeds = init.speeds if init.speeds is not None else point.speeds
        if not speeds:
            raise DomainError(
                "perturbed init needs explicit speeds outside Case1/Case2")
        phases = init.phases if init.phases is not None else (0.0,) * len(speeds)
        base = sample_profile(SolitonParams(tuple(speeds), tuple(phases)),
                              cfg.half_width, cfg.points)[0]
        u = _perturb(base, init.seed, init.amplitude)
    else:
        raise InvalidInputError(f"unknown init spec {init!r}")
    return project_to_constraints(u, cfg.a, cfg.b)


def _scaled_sech(a: float, b: float, half_width: float, points: int
                 ) -> GridFunction:
    x = grid_points(half_width, points)

    def dilated(alpha: float) -> GridFunction:
        v = math.sqrt(alpha) / np.cosh(alpha * x / 2.0) ** 2
        g = GridFunction(v, half_width)
        return GridFunction(v * math.sqrt(a / energy(2, g)), half_width)

    def e3_of(alpha: float) -> float:
        return energy(3, dilated(alpha))

    # E3 along the dilation family is U-shaped; locate its minimum, then
    # bisect on the narrowing branch where E3 increases to b.
    inv_phi = (math.sqrt(5.0) - 1.0) / 2.0
    lo, hi = 1e-2, 32.0
    c1 = hi - inv_phi * (hi - lo)
    c2 = lo + inv_phi * (hi - lo)
    f1, f2 = e3_of(c1), e3_of(c2)
    for _ in range(120):
        if f1 < f2:
            hi, c2, f2 = c2, c1, f1
            c1 = hi - inv_phi * (hi - lo)
            f1 = e3_of(c1)
        else:
            lo, c1, f1 = c1, c2, f2
            c2 = lo + inv_phi * (hi - lo)
            f2 = e3_of(c2)
    alpha_star = 0.5 * (lo + hi)
    if b <= e3_of(alpha_star):
        return dilated(alpha_star)
    lo, hi = alpha_star, alpha_star
    while e3_of(hi) < b:
        hi *= 2.0
        if hi > 1e6:
            raise DomainError("cannot reach the requested E3 by dilation")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if e3_of(mid) > b:
            hi = mid
        else:
            lo = mid
    return dilated(0.5 * (lo + hi))


def _perturb(base: GridFunction, seed: int, amplitude: float) -> GridFunction:
    rng = np.random.default_rng(seed)
    x = base.x
    bump = np.zeros_like(x)
    span = base.half_width / 6.0
    for _ in range(8):
        center = rng.uniform(-span, span)
        width = rng.uniform(1.5, 4.0)
        amp = rng.uniform(-1.0, 1.0)
        bump += amp * np.exp(-((x - center) / width) ** 2)
    peak = float(np.abs(bump).max())
    if peak > 0.0:
        bump *= amplitude * float(np.abs(base.samples).max()) / peak
    return GridFunction(base.samples + bump, base.half_width)


def minimize(cfg: MinimizeConfig) -> MinimizeResult:
    u = build_initial(cfg)
    point = regime.classify(cfg.a, cfg.b)
    step = cfg.step0
    f_curr = energy(4, u)
    e4_history = [f_curr]
    history: list[tuple[int, float, float, float, float]] = []
    checkpoints: list[tuple[int, GridFunction]] = []
    converged = False
    stagnated = False
    it = 0
    while True:
        d, dn, pieces = _projected_gradient(u)
        history.append((it, energy(2, u), energy(3, u), f_curr, dn))
        if dn < cfg.grad_tol:
            converged = True
            break
        if it >= cfg.max_iters:
            break
        e, slope = _search_direction(u, d, pieces, cfg.precondition)
        accepted = False
        s_try = step
        while s_try >= STEP_FLOOR:
            try:
                v = project_to_constraints(
                    GridFunction(u.samples - s_try * e, u.half_width),
                    cfg.a, cfg.b)
            except ProjectionFailureError:
                s_try *= 0.5
                continue
            f_v = energy(4, v)
            if f_v <= f_curr - ARMIJO * s_try * slope:
                u, f_curr = v, f_v
                accepted = True
                break
            s_try *= 0.5
        if not accepted:
            stagnated = True
            break
        step = min(STEP_GROWTH * s_try, STEP_CAP)
        it += 1
        e4_history.append(f_curr)
        if cfg.checkpoint_every and it % cfg.checkpoint_every == 0:
            checkpoints.append((it, u))

    fitted = None
    if cfg.fit_final:
        if point.regime == regime.REGIME_CASE1:
            c = point.speeds[0]
            fit = fit_single_soliton(u, c)
            fitted = SolitonFit((c,), (fit.gamma,), fit.distance)
        elif point.regime == regime.REGIME_CASE2:
            c1, c2 = point.speeds
            fit = fit_two_soliton(u, c1, c2)
            fitted = SolitonFit((c1, c2), (fit.gamma1, fit.gamma2), fit.distance)
    return MinimizeResult(
        final=u,
        e4_history=e4_history,
        el=el_residual(u),
        fitted=fitted,
        converged=converged,
        stagnated=stagnated,
        iterations=it,
        history=history,
        checkpoints=checkpoints,
        regime_tag=point.regime,
    )


def checkpoint_site_spreads(result: MinimizeResult, radius: float = 6.0,
                            eps: float = 0.05) -> list[tuple[int, int, float]]:
    """(iteration, site count, spread) per checkpoint: the dichotomy trace."""
    out = []
    for it, u in result.checkpoints:
        sites, _ = massdecomp.extract_concentrations(
            massdecomp.density(u), radius, eps)
        out.append((it, len(sites), massdecomp.site_spread(sites)))
    return out
