"""Command line front end for the experiment runner.

Exit codes: 0 success, 2 configuration error, 3 numeric non-convergence.
Worker count is controlled by the SIGNSPECTRA_WORKERS environment variable.
"""

from __future__ import annotations

import argparse
import sys

from .errors import ConfigurationError, NumericError
from .experiments import ExperimentConfig, run


def _floats(text: str) -> tuple[float, ...]:
    return tuple(float(v) for v in text.split(","))


def _ints(text: str) -> tuple[int, ...]:
    return tuple(int(v) for v in text.split(","))


def _grid(text: str) -> tuple[float, float, int]:
    parts = text.split(",")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError("grid must be x_min,x_max,points")
    return (float(parts[0]), float(parts[1]), int(parts[2]))


def _add_common(sp, *, dist=False, nsamples=False, reps=True):
    if nsamples:
        sp.add_argument("--n", type=int, required=True, help="sample size")
        sp.add_argument("--p", type=int, required=True, help="dimension")
    if dist:
        sp.add_argument("--alpha", type=float, help="tail index / degrees of freedom")
        sp.add_argument("--dist", default="t", choices=("t", "pareto", "gaussian"))
        sp.add_argument("--theta", type=float, default=1.0, help="Pareto scale")
        sp.add_argument("--raw", action="store_true", help="do not standardize to unit variance")
    sp.add_argument("--sigma", default="identity",
                    help="identity | two-atom:v1,v2 | file:PATH (CSV, p x p)")
    if reps:
        sp.add_argument("--reps", type=int, default=1, help="number of replications")
    sp.add_argument("--seed", type=int, default=0, help="master seed")
    sp.add_argument("--out", default=".", help="output directory")
    sp.add_argument("--format", default="csv", choices=("csv", "json"))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="signspectra",
        description="Spectral experiments for spatial-sign covariance matrices.",
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)

    sp = sub.add_parser("esd", help="empirical eigenvalue spectra of B with pooled histogram")
    _add_common(sp, dist=True, nsamples=True)
    sp.add_argument("--bins", type=int, default=50)

    sp = sub.add_parser("ks-curve", help="Kolmogorov distance to the limiting law over (p, alpha)")
    sp.add_argument("--alpha", type=_floats, required=True, dest="alphas",
                    help="comma-separated tail indices")
    sp.add_argument("--p", type=_ints, required=True, dest="ps",
                    help="comma-separated dimensions")
    sp.add_argument("--y", type=float, required=True, help="aspect ratio p/n")
    sp.add_argument("--dist", default="t", choices=("t", "pareto", "gaussian"))
    sp.add_argument("--theta", type=float, default=1.0)
    sp.add_argument("--raw", action="store_true")
    _add_common(sp)

    sp = sub.add_parser("clt", help="centered tr(B^2) statistic across replications")
    _add_common(sp, dist=True, nsamples=True)

    sp = sub.add_parser("mp-curve", help="limiting density and CDF on a grid")
    sp.add_argument("--y", type=float, required=True, help="aspect ratio")
    sp.add_argument("--grid", type=_grid, help="x_min,x_max,points")
    _add_common(sp, reps=False)

    sp = sub.add_parser("moments", help="self-normalized product moment, MC vs integral")
    sp.add_argument("--spec", type=_ints, required=True, help="comma-separated exponents")
    sp.add_argument("--p", type=int, required=True)
    _add_common(sp, dist=True)

    sp = sub.add_parser("quadform", help="quadratic-form covariance, MC vs formula")
    sp.add_argument("--p", type=int, required=True)
    _add_common(sp, dist=True)
    return parser


def config_from_args(argv: list[str] | None = None) -> ExperimentConfig:
    args = vars(build_parser().parse_args(argv))
    args = {k: v for k, v in args.items() if v is not None}
    return ExperimentConfig(**args)


def main(argv: list[str] | None = None) -> int:
    try:
        config = config_from_args(argv)
        result = run(config)
    except ConfigurationError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except NumericError as exc:
        print(f"numeric error: {exc}", file=sys.stderr)
        return 3
    for path in result.files:
        print(path)
    for key in sorted(result.metrics):
        print(f"{key} = {result.metrics[key]:.6g}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
