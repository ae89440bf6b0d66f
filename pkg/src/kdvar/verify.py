"""Identity and convergence checks runnable from the CLI (`kdvar verify`)
and reused verbatim by the acceptance test suite.

The fast level covers the closed-form identities, the power-sum suites,
the bordered-Hessian determinant, and the regime classifier; the full
level adds the minimizer convergence and dichotomy runs.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np

from . import massdecomp, minimizer, powersum, regime, soliton
from .functionals import (GridFunction, el_residual, energy, gradient,
                          grid_points, h2_norm, inner)
from .soliton import SolitonParams, closed_form_energy, sample_profile

GRID = dict(half_width=60.0, points=2048)


@dataclass
class CheckResult:
    name: str
    passed: bool
    seconds: float
    detail: str


def _run(name, fn) -> CheckResult:
    start = time.perf_counter()
    try:
        passed, detail = fn()
    except Exception as exc:  # a crash is a failure, not an abort
        passed, detail = False, f"raised {type(exc).__name__}: {exc}"
    return CheckResult(name, passed, time.perf_counter() - start, detail)


def check_convention() -> tuple[bool, str]:
    """Quadrature on sampled solitons reproduces the closed-form E_k; the
    uncalibrated-width profile 3C sech^2(sqrt(C) x) has E3 = 0."""
    rng = np.random.default_rng(11)
    worst = 0.0
    for _ in range(20):
        c = float(rng.uniform(0.25, 6.0))
        u = sample_profile(SolitonParams((c,), (0.0,)), **GRID)[0]
        for k in (2, 3, 4):
            rel = abs(energy(k, u) / closed_form_energy(k, [c]) - 1.0)
            worst = max(worst, rel)
    if worst > 1e-8:
        return False, f"closed-form mismatch: max rel err {worst:.3e}"
    worst_e3 = 0.0
    for c in (0.5, 1.0, 3.0):
        literal = GridFunction.from_callable(
            lambda x, c=c: 3.0 * c / np.cosh(math.sqrt(c) * x) ** 2, **GRID)
        worst_e3 = max(worst_e3, abs(energy(3, literal)))
    if worst_e3 > 1e-8:
        return False, f"wide-profile E3 not zero: {worst_e3:.3e}"
    return True, f"max E_k rel err {worst:.2e}; wide-profile |E3| {worst_e3:.2e}"


def check_two_soliton() -> tuple[bool, str]:
    """2-soliton quadrature identities and stationary-equation multipliers."""
    rng = np.random.default_rng(12)
    worst_e, worst_lam, worst_res = 0.0, 0.0, 0.0
    for _ in range(20):
        c1 = float(rng.uniform(0.25, 5.0))
        c2 = float(rng.uniform(c1 * 1.1 + 0.05, 6.0))
        g1, g2 = rng.uniform(-3.0, 3.0, size=2)
        u = sample_profile(SolitonParams((c1, c2), (float(g1), float(g2))),
                           **GRID)[0]
        for k in (2, 3, 4):
            rel = abs(energy(k, u) / closed_form_energy(k, [c1, c2]) - 1.0)
            worst_e = max(worst_e, rel)
        fit = el_residual(u)
        worst_lam = max(worst_lam,
                        abs(fit.lambda2 / (-c1 * c2) - 1.0),
                        abs(fit.lambda3 / (-(c1 + c2)) - 1.0))
        worst_res = max(worst_res, fit.residual_rel)
    ok = worst_e <= 1e-8 and worst_lam <= 1e-6 and worst_res < 1e-6
    return ok, (f"max E_k rel {worst_e:.2e}, multiplier rel {worst_lam:.2e}, "
                f"residual {worst_res:.2e}")


def check_powersum_exact() -> tuple[bool, str]:
    """Exact evaluation points and the two-term system's closed solutions."""
    if powersum.g_fn(1.0) != 0.25:
        return False, f"g(1) = {powersum.g_fn(1.0)!r} != 1/4"
    if powersum.h_fn(1.0) != 1.0 / 9.0:
        return False, f"h(1) = {powersum.h_fn(1.0)!r} != 1/9"
    a_val, b_val = 9.0 ** (1.0 / 3.0), 33.0 ** (1.0 / 5.0)
    sols = powersum.solve_two_term("one_one", a_val, b_val)
    got = sorted((s.y1, s.y2) for s in sols)
    want = [(1.0, 2.0), (2.0, 1.0)]
    err_sol = max(abs(g[i] - w[i]) for g, w in zip(got, sorted(want))
                  for i in range(2))
    if len(sols) != 2 or err_sol > 1e-12:
        return False, f"solve_two_term off by {err_sol:.2e}"
    m129 = powersum.m_value(a_val, b_val)
    if abs(m129 - 129.0) > 129.0 * 1e-12:
        return False, f"m = {m129!r} != 129"
    rng = np.random.default_rng(13)
    worst = 0.0
    for _ in range(100):
        lam = float(rng.uniform(0.1, 10.0))
        worst = max(worst, abs(powersum.m_value(lam * a_val, lam * b_val)
                               / (lam**7 * m129) - 1.0))
    if worst > 1e-12:
        return False, f"homogeneity violated at rel {worst:.2e}"
    return True, f"solutions within {err_sol:.1e}; homogeneity rel {worst:.1e}"


def check_inequality_oracles() -> tuple[bool, str]:
    """Brute-force suites for the two-term comparison inequality, the
    ratio-chain monotonicity, excess positivity, and the n=4 lattice
    search against m(A, B)."""
    rng = np.random.default_rng(14)
    slack = 1e-10

    # comparison inequality: z-sums dominate => z1^7 + z2^7 >= y1^7 + y2^7
    n_found = 0
    while n_found < 10_000:
        y1 = rng.uniform(0.1, 2.0, size=40_000)
        y2 = rng.uniform(0.0, 1.0, size=40_000) * y1
        z1 = rng.uniform(0.1, 2.0, size=40_000)
        z2 = rng.uniform(0.0, 1.0, size=40_000) * z1
        keep = ((z1**3 + z2**3 <= y1**3 + y2**3)
                & (z1**5 + z2**5 >= y1**5 + y2**5))
        if not keep.any():
            continue
        d7 = (z1**7 + z2**7 - y1**7 - y2**7)[keep]
        if (d7 < -slack).any():
            return False, f"comparison inequality violated by {d7.min():.3e}"
        n_found += int(keep.sum())

    # ratio chain: B_m / A_m nonincreasing along decreasing sequences
    for _ in range(10_000):
        n = int(rng.integers(3, 7))
        x = np.sort(rng.uniform(0.01, 2.0, size=n))[::-1]
        a_m = np.cumsum(x**3) ** (1.0 / 3.0)
        b_m = np.cumsum(x**5) ** (1.0 / 5.0)
        ratios = b_m / a_m
        if (np.diff(ratios) > slack).any():
            return False, f"ratio chain increased: {ratios}"

    # excess positivity on admissible triples
    count = 0
    while count < 10_000:
        x = np.sort(rng.uniform(0.05, 2.0, size=3))[::-1]
        a_t = float(np.sum(x**3)) ** (1.0 / 3.0)
        b_t = float(np.sum(x**5)) ** (1.0 / 5.0)
        if not (powersum.RATIO_TWO <= b_t / a_t <= 1.0):
            continue
        e_val = powersum.excess_e(float(x[0]), float(x[1]), float(x[2]))
        if e_val < -slack:
            return False, f"excess negative: {e_val:.3e} at {x}"
        count += 1

    # lattice oracle with four parts never undercuts the two-part floor
    a_val, b_val = 9.0 ** (1.0 / 3.0), 33.0 ** (1.0 / 5.0)
    m_floor = powersum.m_value(a_val, b_val)
    val2 = powersum.brute_force_min_x7(a_val, b_val, 2, resolution=400)
    val4, point = powersum.brute_force_min_x7(a_val, b_val, 4, resolution=120,
                                              return_point=True)
    if abs(val2 - m_floor) > 1e-4 * m_floor:
        return False, f"n=2 lattice off the floor: {val2} vs {m_floor}"
    if val4 < m_floor - 1e-4 * m_floor:
        return False, f"n=4 lattice undercuts the floor: {val4} vs {m_floor}"
    nonzero = sum(1 for v in point if v > 1e-6 * point[0])
    if nonzero > 2:
        return False, f"n=4 minimizer has {nonzero} nonzero parts: {point}"
    return True, (f"10^4 trials per inequality clean; lattice n=4 floor gap "
                  f"{val4 - m_floor:+.2e}, {nonzero} active parts")


def check_hessian() -> tuple[bool, str]:
    rng = np.random.default_rng(15)
    worst = 0.0
    for _ in range(100):
        gamma = float(rng.uniform(0.1, 4.0))
        delta = gamma * float(rng.uniform(1.05, 4.0))
        numeric, closed = powersum.hessian_det(gamma, delta)
        if closed >= 0.0 or numeric >= 0.0:
            return False, f"determinant not negative at ({gamma}, {delta})"
        worst = max(worst, abs(numeric / closed - 1.0))
    if worst > 1e-9:
        return False, f"determinant mismatch rel {worst:.3e}"
    return True, f"100 points, max rel err {worst:.2e}, all negative"


def check_regime() -> tuple[bool, str]:
    rng = np.random.default_rng(16)
    worst = 0.0
    for _ in range(100):
        c1 = float(rng.uniform(0.1, 9.0))
        c2 = c1 + float(rng.uniform(0.05, 10.0 - min(c1, 9.0)))
        a, b = regime.forward((c1, c2))
        r1, r2 = regime.invert(a, b)
        worst = max(worst, abs(r1 / c1 - 1.0), abs(r2 / c2 - 1.0))
    if worst > 1e-10:
        return False, f"round-trip error {worst:.3e}"
    cases = [
        ((12.0, -7.2), regime.REGIME_CASE1),
        ((108.0, -237.6), regime.REGIME_CASE2),
        ((12.0, -1.0), regime.REGIME_CASE3),
        ((-1.0, 0.0), regime.REGIME_INFEASIBLE),
    ]
    for (a, b), want in cases:
        point = regime.classify(a, b)
        if point.regime != want:
            return False, f"({a}, {b}) classified {point.regime}, want {want}"
    p1 = regime.classify(12.0, -7.2)
    if abs(p1.speeds[0] - 1.0) > 1e-9:
        return False, f"Case1 speed {p1.speeds[0]!r} != 1"
    p2 = regime.classify(108.0, -237.6)
    if max(abs(p2.speeds[0] - 1.0), abs(p2.speeds[1] - 4.0)) > 1e-9:
        return False, f"Case2 speeds {p2.speeds} != (1, 4)"
    for (a, b) in [(12.0, -7.2), (108.0, -237.6)]:
        point = regime.classify(a, b)
        if regime.j_value(a, b) != closed_form_energy(4, point.speeds):
            return False, "j_value does not share the closed-form path"
    if regime.j_value(12.0, -1.0) is not regime.NO_MINIMIZER:
        return False, "Case3 j_value is not the NoMinimizer marker"
    return True, f"round-trip rel {worst:.2e}; boundary examples classified"


def _random_smooth(rng, half_width, points) -> GridFunction:
    x = grid_points(half_width, points)
    out = np.zeros_like(x)
    for _ in range(8):
        out += rng.uniform(-1, 1) * np.exp(
            -((x - rng.uniform(-half_width / 3, half_width / 3))
              / rng.uniform(1.0, 4.0)) ** 2)
    return GridFunction(out, half_width)


def check_gradient_fd() -> tuple[bool, str]:
    """Gradients match central differences of the energies."""
    rng = np.random.default_rng(17)
    eps = 1e-5
    worst = 0.0
    for _ in range(20):
        u = _random_smooth(rng, **GRID)
        v = _random_smooth(rng, **GRID)
        for k in (2, 3, 4):
            up = GridFunction(u.samples + eps * v.samples, u.half_width)
            dn = GridFunction(u.samples - eps * v.samples, u.half_width)
            fd = (energy(k, up) - energy(k, dn)) / (2 * eps)
            ip = inner(gradient(k, u), v)
            worst = max(worst, abs(fd - ip) / max(abs(ip), 1e-12))
    return worst <= 1e-6, f"max directional-derivative rel err {worst:.2e}"


def check_minimize_case2() -> tuple[bool, str]:
    target = 4644.0 / 7.0
    cfg = minimizer.MinimizeConfig(
        a=108.0, b=-237.6,
        init=minimizer.Perturbed(seed=7, amplitude=0.05),
        grad_tol=1e-3, max_iters=2500)
    res = minimizer.minimize(cfg)
    rel = abs(res.e4_history[-1] / target - 1.0)
    if rel > 1e-3:
        return False, f"E4 rel err {rel:.3e} after {res.iterations} iterations"
    fit = res.fitted
    ref = sample_profile(SolitonParams(fit.speeds, fit.phases), **GRID)[0]
    threshold = 1e-2 * h2_norm(ref)
    if fit.distance >= threshold:
        return False, f"fitted distance {fit.distance:.3e} >= {threshold:.3e}"
    return True, (f"E4 rel {rel:.2e} in {res.iterations} iters; "
                  f"distance {fit.distance:.2e} < {threshold:.2e}")


def check_minimize_case1() -> tuple[bool, str]:
    target = 36.0 / 7.0
    cfg = minimizer.MinimizeConfig(
        a=12.0, b=-7.2, init=minimizer.ScaledSech(),
        grad_tol=1e-6, max_iters=2000)
    res = minimizer.minimize(cfg)
    rel = abs(res.e4_history[-1] / target - 1.0)
    if rel > 1e-4:
        return False, f"E4 rel err {rel:.3e}"
    return True, (f"E4 rel {rel:.2e} in {res.iterations} iters; "
                  f"EL residual {res.el.residual_rel:.2e}")


def check_dichotomy() -> tuple[bool, str]:
    cfg = minimizer.MinimizeConfig(
        a=12.0, b=-1.0, init=minimizer.ScaledSech(),
        grad_tol=1e-10, max_iters=4000, checkpoint_every=800,
        fit_final=False)
    res = minimizer.minimize(cfg)
    if res.converged:
        return False, "run converged; expected no minimizer"
    sites, _ = massdecomp.extract_concentrations(
        massdecomp.density(res.final), radius := 6.0, eps=0.05)
    if len(sites) < 2:
        return False, f"only {len(sites)} concentration sites at the end"
    spreads = [s for _, n, s in
               minimizer.checkpoint_site_spreads(res, radius=radius, eps=0.05)
               if n >= 2]
    if len(spreads) < 2 or spreads[-1] <= spreads[0]:
        return False, f"site spread not growing: {spreads}"
    if not all(b >= a - 1e-9 for a, b in zip(spreads, spreads[1:])):
        return False, f"site spread not monotone: {spreads}"
    if not res.e4_history[-1] < res.e4_history[-2]:
        return False, "E4 not decreasing at termination"
    return True, (f"{len(sites)} sites, spread {spreads[0]:.2f} -> "
                  f"{spreads[-1]:.2f}, E4 still falling")


FAST_CHECKS = [
    ("convention_identities", check_convention),
    ("two_soliton_identities", check_two_soliton),
    ("powersum_exact_points", check_powersum_exact),
    ("inequality_oracles", check_inequality_oracles),
    ("hessian_determinant", check_hessian),
    ("regime_classifier", check_regime),
    ("gradient_finite_difference", check_gradient_fd),
]

FULL_CHECKS = FAST_CHECKS + [
    ("minimize_two_soliton", check_minimize_case2),
    ("minimize_single_soliton", check_minimize_case1),
    ("dichotomy_diagnostic", check_dichotomy),
]


def run(level: str = "fast") -> list[CheckResult]:
    if level not in ("fast", "full"):
        raise ValueError(f"level must be 'fast' or 'full', got {level!r}")
    checks = FAST_CHECKS if level == "fast" else FULL_CHECKS
    return [_run(name, fn) for name, fn in checks]
