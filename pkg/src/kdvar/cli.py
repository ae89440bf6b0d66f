"""Command-line front end.

Subcommands: soliton | energy | regime | powersum | minimize |
massdecomp | verify.  Quantitative output is CSV or JSON only; the
optional SVG convergence plot is decoration.

Exit codes: 0 success, 1 domain/precondition error (single-line message
on stderr), 2 malformed arguments.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import massdecomp, minimizer, powersum, regime, verify
from .errors import InvalidInputError, KdvarError
from .functionals import (GridFunction, el_residual, energy, read_grid_csv,
                          write_grid_csv)
from .soliton import SolitonParams, closed_form_energy, profile, sample_profile


def _fmt(value: float) -> str:
    return f"{value:.17g}"


def _parse_floats(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(tok) for tok in text.split(",") if tok.strip())
    except ValueError as exc:
        raise InvalidInputError(f"bad number list {text!r}") from exc


def _emit(payload, out: str | None) -> None:
    text = json.dumps(payload, indent=2)
    if out:
        Path(out).write_text(text + "\n")
    else:
        print(text)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="kdvar",
        description="KdV soliton variational toolkit")
    parser.add_argument("--half-width", type=float, default=60.0,
                        help="grid half-width L (default 60)")
    parser.add_argument("--points", type=int, default=2048,
                        help="grid points M, a power of two (default 2048)")
    parser.add_argument("--out", default=None, help="output file or directory")
    parser.add_argument("--seed", type=int, default=0,
                        help="seed for randomized initializations")
    parser.add_argument("--json", action="store_true",
                        help="force JSON output where CSV is the default")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("soliton", help="export a soliton profile as CSV")
    p.add_argument("--speeds", required=True, help="comma-separated speeds")
    p.add_argument("--phases", default=None, help="comma-separated phases")
    p.add_argument("--max-order", type=int, default=4)

    p = sub.add_parser("energy", help="conserved functionals of a profile")
    p.add_argument("--speeds", default=None)
    p.add_argument("--phases", default=None)
    p.add_argument("--input", default=None, help="grid CSV to evaluate instead")

    p = sub.add_parser("regime", help="feasible-set geometry")
    rsub = p.add_subparsers(dest="regime_command", required=True)
    rc = rsub.add_parser("classify")
    rc.add_argument("--a", type=float, required=True)
    rc.add_argument("--b", type=float, required=True)
    rm = rsub.add_parser("map", help="CSV raster of regimes over a rectangle")
    rm.add_argument("--a-min", type=float, required=True)
    rm.add_argument("--a-max", type=float, required=True)
    rm.add_argument("--b-min", type=float, required=True)
    rm.add_argument("--b-max", type=float, required=True)
    rm.add_argument("--grid", type=int, default=64)

    p = sub.add_parser("powersum", help="two-term power-sum systems")
    psub = p.add_subparsers(dest="powersum_command", required=True)
    ps = psub.add_parser("solve")
    ps.add_argument("--system", choices=powersum.SYSTEMS, required=True)
    ps.add_argument("--A", type=float, required=True, dest="a_value")
    ps.add_argument("--B", type=float, required=True, dest="b_value")
    pm = psub.add_parser("m")
    pm.add_argument("--A", type=float, required=True, dest="a_value")
    pm.add_argument("--B", type=float, required=True, dest="b_value")
    ph = psub.add_parser("hessian")
    ph.add_argument("--gamma", type=float, required=True)
    ph.add_argument("--delta", type=float, required=True)

    p = sub.add_parser("minimize", help="constrained E4 minimization")
    p.add_argument("--config", required=True, help="JSON config file")
    p.add_argument("--svg", action="store_true",
                   help="also write a convergence plot")

    p = sub.add_parser("massdecomp", help="concentration-site extraction")
    p.add_argument("--input", required=True, help="profile CSV")
    p.add_argument("--radius", type=float, default=10.0)
    p.add_argument("--eps", type=float, default=0.01)

    p = sub.add_parser("verify", help="run the identity/convergence suite")
    p.add_argument("--level", choices=("fast", "full"), default="fast")

    return parser


def _cmd_soliton(args) -> int:
    speeds = _parse_floats(args.speeds)
    phases = _parse_floats(args.phases) if args.phases else (0.0,) * len(speeds)
    params = SolitonParams(speeds, phases)
    x = GridFunction.from_callable(lambda v: np.zeros_like(v),
                                   args.half_width, args.points).x
    vals = profile(params, x, max_order=args.max_order)
    header = ["x", "psi"] + [f"psi{i}" for i in range(1, args.max_order + 1)]
    lines = [",".join(header)]
    for i in range(x.shape[0]):
        lines.append(",".join(_fmt(col[i]) for col in [x] + list(vals)))
    text = "\n".join(lines) + "\n"
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return 0


def _cmd_energy(args) -> int:
    if args.input:
        u = read_grid_csv(args.input)
        payload = {f"E{k}": energy(k, u) for k in (2, 3, 4)}
    elif args.speeds:
        speeds = _parse_floats(args.speeds)
        phases = _parse_floats(args.phases) if args.phases \
            else (0.0,) * len(speeds)
        u = sample_profile(SolitonParams(speeds, phases),
                           args.half_width, args.points)[0]
        payload = {}
        for k in (2, 3, 4):
            payload[f"E{k}"] = energy(k, u)
            payload[f"E{k}_closed_form"] = closed_form_energy(k, speeds)
    else:
        raise InvalidInputError("energy needs --speeds or --input")
    _emit(payload, args.out)
    return 0


def _classify_payload(a: float, b: float) -> dict:
    point = regime.classify(a, b)
    payload: dict = {"regime": point.regime, "a": a, "b": b,
                     "speeds": list(point.speeds)}
    if point.regime == regime.REGIME_CASE1:
        payload["C"] = point.speeds[0]
    elif point.regime == regime.REGIME_CASE2:
        payload["C1"], payload["C2"] = point.speeds
    if point.regime in (regime.REGIME_CASE1, regime.REGIME_CASE2):
        payload["J"] = regime.j_value(a, b)
        payload["no_minimizer"] = False
    elif point.regime == regime.REGIME_CASE3:
        payload["J"] = None
        payload["no_minimizer"] = True
    else:
        payload["J"] = None
    return payload


def _cmd_regime(args) -> int:
    if args.regime_command == "classify":
        _emit(_classify_payload(args.a, args.b), args.out)
        return 0
    lines = ["a,b,regime"]
    a_vals = np.linspace(args.a_min, args.a_max, args.grid)
    b_vals = np.linspace(args.b_min, args.b_max, args.grid)
    for a in a_vals:
        for b in b_vals:
            lines.append(f"{_fmt(a)},{_fmt(b)},{regime.classify(a, b).regime}")
    text = "\n".join(lines) + "\n"
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return 0


def _cmd_powersum(args) -> int:
    if args.powersum_command == "solve":
        sols = powersum.solve_two_term(args.system, args.a_value, args.b_value)
        payload = {"system": args.system, "A": args.a_value, "B": args.b_value,
                   "solutions": [
                       {"y1": s.y1, "y2": s.y2,
                        "theta": None if math.isinf(s.theta) else s.theta}
                       for s in sols]}
    elif args.powersum_command == "m":
        payload = {"A": args.a_value, "B": args.b_value,
                   "m": powersum.m_value(args.a_value, args.b_value)}
    else:
        numeric, closed = powersum.hessian_det(args.gamma, args.delta)
        payload = {"gamma": args.gamma, "delta": args.delta,
                   "numeric": numeric, "closed_form": closed}
    _emit(payload, args.out)
    return 0


_INIT_KEYS = {"kind", "speeds", "phases", "seed", "amplitude"}
_CONFIG_KEYS = {"a", "b", "init", "grad_tol", "step0", "max_iters",
                "checkpoint_every", "half_width", "points", "precondition",
                "fit_final"}


def _init_from_json(spec, default_seed: int) -> minimizer.InitSpec:
    if not isinstance(spec, dict) or "kind" not in spec:
        raise InvalidInputError("init must be an object with a 'kind' key")
    unknown = set(spec) - _INIT_KEYS
    if unknown:
        raise InvalidInputError(f"unknown init keys: {sorted(unknown)}")
    kind = spec["kind"]
    if kind == "scaled_sech":
        return minimizer.ScaledSech()
    if kind == "soliton_guess":
        speeds = tuple(float(v) for v in spec["speeds"])
        phases = tuple(float(v) for v in spec.get("phases", (0.0,) * len(speeds)))
        return minimizer.SolitonGuess(speeds, phases)
    if kind == "perturbed":
        return minimizer.Perturbed(
            seed=int(spec.get("seed", default_seed)),
            amplitude=float(spec.get("amplitude", 0.05)),
            speeds=tuple(float(v) for v in spec["speeds"])
            if "speeds" in spec else None,
            phases=tuple(float(v) for v in spec["phases"])
            if "phases" in spec else None)
    raise InvalidInputError(f"unknown init kind {kind!r}")


def _svg_plot(xs, ys, path: Path, width=640, height=360) -> None:
    """Minimal deterministic polyline SVG of ys against xs."""
    pad = 40
    x0, x1 = min(xs), max(xs)
    y0, y1 = min(ys), max(ys)
    if x1 == x0:
        x1 = x0 + 1
    if y1 == y0:
        y1 = y0 + 1

    def sx(v):
        return pad + (v - x0) / (x1 - x0) * (width - 2 * pad)

    def sy(v):
        return height - pad - (v - y0) / (y1 - y0) * (height - 2 * pad)

    pts = " ".join(f"{sx(x):.2f},{sy(y):.2f}" for x, y in zip(xs, ys))
    path.write_text(
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" '
        f'height="{height}">\n'
        f'<rect width="100%" height="100%" fill="white"/>\n'
        f'<polyline points="{pts}" fill="none" stroke="black"/>\n'
        f'<text x="{width // 2}" y="{height - 8}" text-anchor="middle" '
        f'font-size="12">iteration</text>\n'
        f'<text x="12" y="{height // 2}" font-size="12" '
        f'transform="rotate(-90 12 {height // 2})">E4</text>\n'
        "</svg>\n")


def _cmd_minimize(args) -> int:
    try:
        raw = json.loads(Path(args.config).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise InvalidInputError(f"cannot read config {args.config}: {exc}")
    if not isinstance(raw, dict):
        raise InvalidInputError("config must be a JSON object")
    unknown = set(raw) - _CONFIG_KEYS
    if unknown:
        raise InvalidInputError(f"unknown config keys: {sorted(unknown)}")
    if "a" not in raw or "b" not in raw:
        raise InvalidInputError("config needs 'a' and 'b'")
    cfg = minimizer.MinimizeConfig(
        a=float(raw["a"]), b=float(raw["b"]),
        half_width=float(raw.get("half_width", args.half_width)),
        points=int(raw.get("points", args.points)),
        init=_init_from_json(raw.get("init", {"kind": "scaled_sech"}),
                             args.seed),
        step0=float(raw.get("step0", 1e-2)),
        grad_tol=float(raw.get("grad_tol", 1e-6)),
        max_iters=int(raw.get("max_iters", 20000)),
        checkpoint_every=int(raw.get("checkpoint_every", 0)),
        precondition=bool(raw.get("precondition", True)),
        fit_final=bool(raw.get("fit_final", True)))
    result = minimizer.minimize(cfg)

    out_dir = Path(args.out) if args.out else Path(".")
    out_dir.mkdir(parents=True, exist_ok=True)
    rows = ["iter,E2,E3,E4,grad_norm"]
    for it, e2v, e3v, e4v, gn in result.history:
        rows.append(f"{it},{_fmt(e2v)},{_fmt(e3v)},{_fmt(e4v)},{_fmt(gn)}")
    (out_dir / "iterations.csv").write_text("\n".join(rows) + "\n")
    write_grid_csv(result.final, out_dir / "final_profile.csv")
    summary = {
        "converged": result.converged,
        "stagnated": result.stagnated,
        "iterations": result.iterations,
        "regime": result.regime_tag,
        "E4_final": result.e4_history[-1],
        "el_fit": {"lambda2": result.el.lambda2,
                   "lambda3": result.el.lambda3,
                   "residual_rel": result.el.residual_rel,
                   "reduced": result.el.reduced},
    }
    if result.fitted is not None:
        summary["fitted"] = {"speeds": list(result.fitted.speeds),
                             "phases": list(result.fitted.phases),
                             "distance": result.fitted.distance}
    (out_dir / "result.json").write_text(json.dumps(summary, indent=2) + "\n")
    if args.svg:
        _svg_plot(range(len(result.e4_history)), result.e4_history,
                  out_dir / "convergence.svg")
    print(json.dumps(summary, indent=2))
    return 0


def _cmd_massdecomp(args) -> int:
    u = read_grid_csv(args.input)
    d = massdecomp.density(u)
    sites, residual = massdecomp.extract_concentrations(
        d, args.radius, args.eps)
    payload = {
        "total_mass": d.total_mass,
        "radius": args.radius,
        "eps": args.eps,
        "sites": [{"center": s.center, "radius": s.radius, "mass": s.mass}
                  for s in sites],
        "residual_mass": residual,
    }
    _emit(payload, args.out)
    return 0


def _cmd_verify(args) -> int:
    results = verify.run(args.level)
    payload = {
        "level": args.level,
        "passed": all(r.passed for r in results),
        "checks": [{"name": r.name, "passed": r.passed,
                    "seconds": round(r.seconds, 3), "detail": r.detail}
                   for r in results],
    }
    _emit(payload, args.out)
    return 0 if payload["passed"] else 1


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse: 0 for --help, 2 for bad args
        return int(exc.code or 0)
    handlers = {
        "soliton": _cmd_soliton,
        "energy": _cmd_energy,
        "regime": _cmd_regime,
        "powersum": _cmd_powersum,
        "minimize": _cmd_minimize,
        "massdecomp": _cmd_massdecomp,
        "verify": _cmd_verify,
    }
    try:
        return handlers[args.command](args)
    except KdvarError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
