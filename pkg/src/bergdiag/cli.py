"""Command-line entry point: ``bergdiag <experiment> [options]``."""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .experiments import DOMAIN_NAMES, EXPERIMENTS, ExperimentSpec, run

_HELP = {
    "verify-ahs": "half-line series against the sector norm",
    "counterexample": "pole at the crossing corner: finite diagonal sum, divergent norm",
    "equivalence": "one- and two-diagonal sums against domain norms",
    "coverage": "sampled covering of the square by the clipped disk unions",
    "margin": "distance margin along the ellipse boundary",
    "reconstruct": "continuation from diagonal jets, round trip on random points",
    "domain-export": "boundary polylines of a domain",
    "parseval": "weighted-disk moments and the kernel line integral",
    "coefficients": "table of series weights and their asymptotics",
}


def _eps_list(text: str) -> tuple[float, ...]:
    try:
        vals = tuple(float(v) for v in text.split(","))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad eps list {text!r}") from exc
    if any(not 0 < v < 0.25 for v in vals):
        raise argparse.ArgumentTypeError("eps values must lie in (0, 1/4)")
    return vals


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bergdiag", description="Diagonal series for Bergman norms.")
    sub = parser.add_subparsers(dest="experiment", required=True, metavar="experiment")
    for name in EXPERIMENTS:
        p = sub.add_parser(name, help=_HELP[name])
        p.add_argument("--function", help="function in prefix notation, e.g. 'pole -1 2'")
        p.add_argument("--q", type=float, default=4.0)
        p.add_argument("--n-max", type=int, default=2**20)
        p.add_argument("--eps", type=_eps_list, default=(1e-2, 1e-3, 1e-4), help="comma separated")
        p.add_argument("--xmax", type=float, default=50.0)
        p.add_argument("--step", type=float, default=1e-3)
        p.add_argument("--samples", type=int, default=1000)
        p.add_argument("--seed", type=int, default=12345)
        p.add_argument("--domain", default="omega_q", choices=DOMAIN_NAMES)
        p.add_argument("--a", type=float, default=2.0, help="widening parameter of omega_a")
        p.add_argument("--threads", type=int, default=None)
        p.add_argument("--format", choices=("json", "csv"), default="json")
        p.add_argument("--output", type=Path, help="write here instead of stdout")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    kw = dict(name=args.experiment, function=args.function, q=args.q, n_max=args.n_max, eps=args.eps,
              xmax=args.xmax, step=args.step, samples=args.samples, seed=args.seed, domain=args.domain, a=args.a)
    if args.threads is not None:
        kw["threads"] = args.threads
    try:
        report = run(ExperimentSpec(**kw))
    except ValueError as exc:  # BergdiagError and bad parameters
        print(f"bergdiag: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    text = report.to_json() if args.format == "json" else report.to_csv()
    if args.output is None:
        sys.stdout.write(text)
    else:
        args.output.write_text(text)
    for c in report.checks:
        if not c.passed:
            print(f"bergdiag: check {c.name} failed: {c.detail}", file=sys.stderr)
    return 0 if report.passed else 1


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
