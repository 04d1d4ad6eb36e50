"""Adaptive projection estimates, experiments and tail bounds from the command line.

Exit codes: 0 success, 2 input error, 3 degenerate decay-ratio estimate
(outputs are still written).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from pathlib import Path

from .confidence import (
    BelowThresholdError,
    TailBoundParams,
    confidence_report,
    tail_bound_exponential,
    tail_bound_R1,
    tail_bound_R2,
    theorem_tau_bound,
)
from .estimator import adaptive_estimate, grid_csv
from .harness import ConfigError, ExperimentConfig, coverage_experiment, run_experiment
from .samplers import SamplerError, read_dataset_csv
from .targets import TargetParameterError, make_W_target, make_Z_target

EXIT_OK, EXIT_INPUT, EXIT_DEGENERATE = 0, 2, 3


class InputError(Exception):
    pass


def _write(out: Path, name: str, text: str) -> None:
    out.mkdir(parents=True, exist_ok=True)
    (out / name).write_text(text)


def _float_list(text: str) -> list[float]:
    if text is None or not text.strip():
        return []
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise InputError(f"cannot parse number list {text!r}") from None


def cmd_estimate(args) -> int:
    path = Path(args.input)
    try:
        text = path.read_text()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from None
    try:
        d = read_dataset_csv(text, args.problem.upper() if args.problem else None)
    except SamplerError as exc:
        raise InputError(f"{path}: {exc}") from None
    if d.n < 9:
        raise InputError(f"{path}: need at least 9 observations, got {d.n}")
    est = adaptive_estimate(d)
    conf = confidence_report(est, args.delta, args.r, args.c_free, diagnostics=True)
    out = Path(args.out)
    _write(out, "estimate.json", est.to_json() + "\n")
    _write(out, "grid.csv", grid_csv(est, args.grid_size))
    _write(out, "tau.csv", est.selection.to_csv())
    _write(out, "confidence.json", conf.to_json() + "\n")
    if conf.degenerate:
        print("warning: degenerate decay-ratio estimate; confidence bounds are not informative",
              file=sys.stderr)
        return EXIT_DEGENERATE
    return EXIT_OK


def _load_config(args) -> ExperimentConfig:
    try:
        doc = json.loads(Path(args.config).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read config {args.config}: {exc}") from None
    if not isinstance(doc, dict):
        raise InputError("config must be a JSON object")
    if args.seed is not None:
        doc["base_seed"] = args.seed
    if args.delta is not None:
        doc["delta"] = args.delta
    try:
        return ExperimentConfig.from_dict(doc)
    except ConfigError as exc:
        raise InputError(f"config field {exc}") from None


def cmd_simulate(args) -> int:
    cfg = _load_config(args)
    rep = run_experiment(cfg)
    out = Path(args.out)
    _write(out, "report.json", rep.to_json() + "\n")
    _write(out, "replications.csv", rep.to_csv())
    return EXIT_OK


def cmd_rate(args) -> int:
    cfg = _load_config(args)
    if len(cfg.n_grid) < 3:
        raise InputError("config field n_grid: rate fitting needs at least 3 sample sizes")
    rep = run_experiment(cfg)
    out = Path(args.out)
    _write(out, "report.json", rep.to_json() + "\n")
    _write(out, "replications.csv", rep.to_csv())
    print(f"rate slope {rep.slope:.6f}")
    return EXIT_OK


def cmd_coverage(args) -> int:
    cfg = _load_config(args)
    cov = coverage_experiment(cfg)
    doc = {str(n): v for n, v in cov.items()}
    text = json.dumps(doc, indent=1, sort_keys=True, default=lambda v: None)
    _write(Path(args.out), "coverage.json", text.replace("NaN", "null") + "\n")
    return EXIT_OK


def _bound_fn(args):
    theorem = args.theorem
    if theorem == "r1":
        return lambda u: tail_bound_R1(u, args.mu4)
    if theorem == "r2":
        return lambda u: tail_bound_R2(u, args.k, args.mu2k)
    if theorem in ("r3", "d", "s"):
        if args.N0 is None or args.B is None:
            raise InputError("--N0 and --B are required for exponential bounds")
        try:
            p = TailBoundParams(
                {"r3": "R", "d": "D", "s": "S"}[theorem],
                args.gamma,
                args.N0,
                args.B,
                q=args.q,
                Q=args.Q,
                c_free=args.c_free,
            )
        except ValueError as exc:
            raise InputError(str(exc)) from None
        return lambda u: tail_bound_exponential(u, p)
    return lambda u: theorem_tau_bound(u, lambda s: s, args.c_free)


def cmd_bounds(args) -> int:
    us = _float_list(args.u_grid)
    fn = _bound_fn(args)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["u", "bound"])
    skipped = []
    for u in us:
        try:
            w.writerow([f"{u:.16e}", f"{fn(u):.16e}"])
        except (BelowThresholdError, ValueError) as exc:
            skipped.append(f"u={u}: {exc}")
    _write(Path(args.out), f"bounds_{args.theorem}.csv", buf.getvalue())
    if skipped:
        for note in skipped:
            print(f"skipped {note}", file=sys.stderr)
        return EXIT_INPUT
    return EXIT_OK


def cmd_make_target(args) -> int:
    try:
        if args.cls == "W":
            alpha = 0.0 if args.alpha is None else args.alpha
            beta = 1.0 if args.beta is None else args.beta
            t = make_W_target(args.C, alpha, beta, args.J, args.constraints)
        else:
            alpha = 1.0 if args.alpha is None else args.alpha
            beta = 0.5 if args.beta is None else args.beta
            t = make_Z_target(alpha, beta, args.J, args.constraints)
    except (TargetParameterError, ValueError) as exc:
        raise InputError(str(exc)) from None
    _write(Path(args.out), "target.json", t.to_json() + "\n")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="adaptix", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, config=False):
        sp.add_argument("--out", default=".", help="output directory")
        sp.add_argument("--seed", type=int, default=None)
        sp.add_argument("--delta", type=float, default=None if config else 0.05)
        if config:
            sp.add_argument("--config", required=True)

    e = sub.add_parser("estimate", help="adaptive estimate and confidence report from a CSV")
    common(e)
    e.add_argument("--input", required=True)
    e.add_argument("--problem", choices=["r", "d", "s", "R", "D", "S"], default=None)
    e.add_argument("--r", type=float, default=None, help="tail exponent for u(delta)")
    e.add_argument("--c-free", type=float, default=1.0)
    e.add_argument("--grid-size", type=int, default=512)
    e.set_defaults(func=cmd_estimate)

    for name, fn in (("simulate", cmd_simulate), ("rate", cmd_rate), ("coverage", cmd_coverage)):
        sp = sub.add_parser(name, help=f"{name} experiment from a JSON config")
        common(sp, config=True)
        sp.set_defaults(func=fn)

    b = sub.add_parser("bounds", help="tail-bound evaluations on a u grid")
    common(b)
    b.add_argument("--theorem", choices=["r1", "r2", "r3", "d", "s", "tau"], required=True)
    b.add_argument("--u-grid", default="", help="comma separated u values")
    b.add_argument("--mu4", type=float, default=3.0)
    b.add_argument("--k", type=int, default=3)
    b.add_argument("--mu2k", type=float, default=15.0)
    b.add_argument("--q", type=float, default=2.0)
    b.add_argument("--Q", type=float, default=math.sqrt(2.0))
    b.add_argument("--gamma", type=float, default=0.25)
    b.add_argument("--N0", type=int, default=None)
    b.add_argument("--B", type=float, default=None)
    b.add_argument("--c-free", type=float, default=1.0)
    b.set_defaults(func=cmd_bounds)

    t = sub.add_parser("make-target", help="write a synthetic target as JSON")
    common(t)
    t.add_argument("--class", dest="cls", choices=["W", "Z"], required=True)
    t.add_argument("--C", type=float, default=1.0)
    t.add_argument("--alpha", type=float, default=None, help="W: 0, Z: 1")
    t.add_argument("--beta", type=float, default=None, help="W: 1, Z: 0.5")
    t.add_argument("--J", type=int, default=256)
    t.add_argument("--constraints", choices=["none", "nonnegative", "even"], default="none")
    t.set_defaults(func=cmd_make_target)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    try:
        return args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
