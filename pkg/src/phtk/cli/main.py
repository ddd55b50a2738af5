"""Command-line entry point: ``phtk analyze|model|sweep|verify``."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from phtk import config
from phtk.cli.commands import ENSEMBLES, SWEEP_LOWEST, cmd_analyze, cmd_model, cmd_sweep, cmd_verify
from phtk.cli.report import format_summary
from phtk.errors import (
    ConfigError,
    NotDiagonalizable,
    NuOutOfRange,
    ParseError,
    PhtkError,
    QuadratureTooCoarse,
    RangeError,
    ShapeMismatch,
)

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_INPUT = 2

INPUT_ERRORS = (ParseError, RangeError, NuOutOfRange, QuadratureTooCoarse, NotDiagonalizable, ConfigError, ShapeMismatch)


def _output(path: Path | None) -> Path | None:
    return None if path is None else config.resolve_output(path)


def _progress(event: dict) -> None:
    logger.info("%s %d/%d", event["step"], event["current"], event["total"])


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="phtk", description="Pseudo-Hermitian operator toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    analyze = sub.add_parser("analyze", help="Analyze a matrix file or model bundle")
    analyze.add_argument("path", type=Path, help="JSON matrix or model bundle")
    analyze.add_argument(
        "--profile",
        default=None,
        help=f"Tolerance profile (strict|spectral; default: bundle's own, else {config.DEFAULT_PROFILE})",
    )
    analyze.add_argument("--out", type=Path, default=None, help="Write the JSON report here instead of stdout")
    analyze.add_argument(
        "--no-metadata", action="store_true", help="Omit the timestamped metadata section",
    )

    model = sub.add_parser("model", help="Build a truncated H_nu model bundle")
    model.add_argument("--nu", type=float, required=True, help="Exponent nu in [0, 2)")
    model.add_argument("--basis", type=int, required=True, help="Number of Hermite functions N")
    model.add_argument("--quad", type=int, default=None, help="Quadrature nodes M (default: 2N)")
    model.add_argument("--out", type=Path, required=True, help="Bundle output path")

    sweep = sub.add_parser("sweep", help="Lowest eigenvalues of H_nu over a nu grid (CSV)")
    sweep.add_argument("--nu-min", type=float, required=True)
    sweep.add_argument("--nu-max", type=float, required=True)
    sweep.add_argument("--steps", type=int, required=True)
    sweep.add_argument("--basis", type=int, required=True)
    sweep.add_argument("--k", type=int, default=SWEEP_LOWEST, help="Eigenvalues per row")
    sweep.add_argument("--threads", type=int, default=None, help="Worker cap (default: PHTK_THREADS)")
    sweep.add_argument("--out", type=Path, default=None, help="CSV output path (default: stdout)")

    verify = sub.add_parser("verify", help="Run the invariant suite over a seeded random ensemble")
    verify.add_argument("--seed", type=int, default=config.DEFAULT_SEED)
    verify.add_argument("--count", type=int, default=1)
    verify.add_argument("--dim", type=int, default=4)
    verify.add_argument("--ensemble", choices=ENSEMBLES, default="quasi")
    verify.add_argument("--profile", default=None)
    verify.add_argument("--threads", type=int, default=None, help="Worker cap (default: PHTK_THREADS)")
    return parser


def _run(args: argparse.Namespace) -> int:
    if args.command == "analyze":
        report, text = cmd_analyze(
            args.path, args.profile, _output(args.out), include_metadata=not args.no_metadata,
        )
        if args.out is None:
            sys.stdout.write(text)
        print(format_summary(report), file=sys.stderr)
        return report.exit_code

    if args.command == "model":
        out = _output(args.out)
        model = cmd_model(args.nu, args.basis, out, args.quad)
        print(f"Wrote model bundle (nu={model.nu:g}, N={model.N}, M={model.quadrature_nodes}) to {out}")
        return EXIT_OK

    if args.command == "sweep":
        text = cmd_sweep(
            args.nu_min, args.nu_max, args.steps, args.basis, _output(args.out),
            k=args.k, threads=args.threads, on_progress=_progress,
        )
        if args.out is None:
            sys.stdout.write(text)
        return EXIT_OK

    summary = cmd_verify(
        args.seed, args.count, args.dim, args.ensemble, args.profile, args.threads, on_progress=_progress,
    )
    print(summary.format())
    return summary.exit_code


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=getattr(logging, config.LOG_LEVEL, logging.INFO),
        format="%(asctime)s %(levelname)-5s [%(name)s] %(message)s",
        datefmt="%H:%M:%S",
    )
    try:
        return _run(args)
    except INPUT_ERRORS as e:
        print(f"Error: {e}", file=sys.stderr)
        return EXIT_INPUT
    except PhtkError as e:
        print(f"Error: {e}", file=sys.stderr)
        return EXIT_FAILED


if __name__ == "__main__":
    sys.exit(main())
