"""Command-line entry point.

Exit codes: 0 success, 1 configuration error, 2 I/O error.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import sys

import numpy as np

from . import experiments, noiselab, problems, theory
from .experiments import ConfigError, ExperimentConfig
from .optimizer import OptimizerConfig, run

EXIT_CONFIG = 1
EXIT_IO = 2


def _config(args) -> ExperimentConfig:
    return experiments.load_config(args.config) if args.config else ExperimentConfig()


def cmd_fig1(args):
    for path in experiments.run_figure1(_config(args), args.out):
        print(path)


def cmd_theory(args):
    ec = _config(args)
    for path in experiments.run_theory_overlay(ec, args.out):
        print(path)
    if args.alpha is not None:
        p = experiments.make_problem(ec, 0, 0)
        c = problems.constants(p)
        msd0 = float(c.minimizer @ c.minimizer)
        mu = args.mu if args.mu is not None else 0.5 * theory.stability_step_limit(c, args.alpha, ec.snapshot_period)
        inputs = theory.BoundInputs(c, args.alpha, mu, ec.snapshot_period, ec.epsilon, msd0)
        report = {
            "nu": c.nu, "delta_sq": c.delta_sq, "sigma_sq": c.sigma_sq, "initial_msd": msd0,
            "alpha": args.alpha, "mu": mu, "m": ec.snapshot_period, "epsilon": ec.epsilon,
            "snapshot_floor": theory.snapshot_period_floor(c, args.alpha),
            "regime": theory.regime(c, ec.epsilon).value,
        }
        bound = theory.convergence_bound(inputs, check=False)
        report.update(contraction_per_epoch=bound.contraction_per_epoch, steady_state=bound.steady_state,
                      bound_valid=bound.valid)
        try:
            report["max_learning_rate"] = theory.max_learning_rate(c, args.alpha, ec.snapshot_period, ec.epsilon)
            report["iteration_complexity"] = theory.iteration_complexity(inputs)
        except theory.ConstraintError as exc:
            report["constraint_error"] = str(exc)
        print(json.dumps(report, indent=2))


def cmd_noise_check(args):
    p = problems.generate(args.n_samples, args.dim, args.noise, args.seed)
    reports = noiselab.check_lemma_bounds(p, args.alphas, args.points, seed=args.seed)
    out = open(args.out, "w", newline="") if args.out else sys.stdout
    try:
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(["alpha", "max_ratio", "violations"])
        for r in reports:
            writer.writerow([repr(r.alpha), repr(float(r.max_ratio)), r.violations])
    finally:
        if args.out:
            out.close()


def cmd_run_one(args):
    p = problems.generate(args.n_samples, args.dim, args.noise, args.seed)
    cfg = OptimizerConfig(args.alpha, args.mu, args.m, args.iterations, np.zeros(p.dim), args.run_seed)
    sys.stdout.write(run(p, p.minimizer, cfg).to_csv())


def _floats(text):
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="alphasvrg", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fig1", help="iteration complexity vs alpha: figure1.csv and figure1.svg")
    p.add_argument("--config", help="flat key = value experiment config")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_fig1)

    p = sub.add_parser("theory", help="closed-form complexity per (noise level, alpha): theory.csv")
    p.add_argument("--config")
    p.add_argument("--out", required=True)
    p.add_argument("--alpha", type=float, help="also print every bound for this alpha as JSON")
    p.add_argument("--mu", type=float, help="step size for the convergence bound (default: half the limit)")
    p.set_defaults(func=cmd_theory)

    p = sub.add_parser("noise-check", help="exact gradient-noise variance vs bound, as CSV")
    p.add_argument("--n-samples", type=int, default=50)
    p.add_argument("--dim", type=int, default=2)
    p.add_argument("--noise", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--points", type=int, default=1000)
    p.add_argument("--alphas", type=_floats, default=[0.0, 0.25, 0.5, 0.75, 1.0])
    p.add_argument("--out")
    p.set_defaults(func=cmd_noise_check)

    p = sub.add_parser("run-one", help="one seeded run; prints iteration,msd CSV")
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--mu", type=float, required=True)
    p.add_argument("--m", type=int, default=50)
    p.add_argument("--noise", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=0, help="data seed")
    p.add_argument("--run-seed", type=int, default=0)
    p.add_argument("--iterations", type=int, default=1000)
    p.add_argument("--n-samples", type=int, default=50)
    p.add_argument("--dim", type=int, default=2)
    p.set_defaults(func=cmd_run_one)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(asctime)s %(name)s %(message)s")
    try:
        args.func(args)
    except (ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    return 0


if __name__ == "__main__":
    sys.exit(main())
