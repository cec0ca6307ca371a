"""Command-line entry point: ``wvdst --experiment fig1 --reps 100 --out fig1.csv``.

Exit codes: 0 success, 1 usage error, 2 estimation failure, 3 missing calibration.
Errors are reported as a single ``error: kind=<kind> message=<json string>`` line
on stderr.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import fields
from pathlib import Path

from .dst import EstimationError
from .harness import EXPERIMENTS, ExperimentConfig, MissingCalibrationError, run_experiment

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_ESTIMATION = 2
EXIT_CALIBRATION = 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _parse_angle(token: str) -> float:
    token = token.strip()
    if token.endswith("pi"):
        coeff = token[:-2].rstrip("*") or "1"
        return float(coeff) * math.pi
    return float(token)


def parse_theta_grid(text: str) -> list[float]:
    """Comma-separated angles in radians; a ``pi`` suffix multiplies by pi (``0.5pi``)."""
    try:
        return [_parse_angle(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise UsageError(f"invalid theta grid {text!r}") from None


def parse_dim_grid(text: str) -> list[int]:
    """Comma-separated dimensions; ``a-b`` expands to an inclusive range."""
    dims: list[int] = []
    try:
        for token in filter(None, (t.strip() for t in text.split(","))):
            if "-" in token:
                lo, hi = token.split("-")
                dims.extend(range(int(lo), int(hi) + 1))
            else:
                dims.append(int(token))
    except ValueError:
        raise UsageError(f"invalid dimension grid {text!r}") from None
    return dims


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="wvdst", description="Weak-value direct state tomography simulations.")
    p.add_argument("--experiment", choices=EXPERIMENTS)
    p.add_argument("--config", help="JSON file with ExperimentConfig keys; flags override it")
    p.add_argument("--dim", type=int)
    p.add_argument("--copies", type=int, help="total copy budget N (per dimension for fig3/calibrate/single-run)")
    p.add_argument("--n1", type=int, help="copies for the original-DST stage")
    p.add_argument("--n2", type=int, help="copies for the revised-DST stage")
    p.add_argument("--g1", type=float, help="coupling of the original stage (fig1: the only coupling)")
    p.add_argument("--g2", type=float, help="coupling of the revised stage (fig3 default: tabulated per d)")
    p.add_argument("--reps", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--theta-grid", type=str)
    p.add_argument("--dim-grid", type=str)
    p.add_argument("--out")
    p.add_argument("--format", choices=("csv", "json"))
    p.add_argument("--calibration-file")
    p.add_argument("--jobs", type=int)
    p.add_argument("--reference-row", help="'argmax' (default) or a fixed row index")
    return p


def config_from_args(argv: list[str]) -> ExperimentConfig:
    args = build_parser().parse_args(argv)
    values: dict = {}
    if args.config:
        try:
            values.update(json.loads(Path(args.config).read_text()))
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config file {args.config}: {exc}") from None
    known = {f.name for f in fields(ExperimentConfig)}
    unknown = set(values) - known
    if unknown:
        raise UsageError(f"unknown config keys: {', '.join(sorted(unknown))}")
    flags = {
        "experiment": args.experiment,
        "dim": args.dim,
        "copies": args.copies,
        "n1": args.n1,
        "n2": args.n2,
        "g1": args.g1,
        "g2": args.g2,
        "reps": args.reps,
        "seed": args.seed,
        "theta_grid": parse_theta_grid(args.theta_grid) if args.theta_grid is not None else None,
        "dim_grid": parse_dim_grid(args.dim_grid) if args.dim_grid is not None else None,
        "out": args.out,
        "format": args.format,
        "calibration_file": args.calibration_file,
        "jobs": args.jobs,
        "reference_row": args.reference_row,
    }
    values.update({k: v for k, v in flags.items() if v is not None})
    if "experiment" not in values:
        raise UsageError("--experiment is required")
    row = values.get("reference_row", "argmax")
    if row != "argmax":
        try:
            values["reference_row"] = int(row)
        except ValueError:
            raise UsageError(f"invalid reference row {row!r}") from None
    try:
        return ExperimentConfig(**values)
    except (TypeError, ValueError) as exc:
        raise UsageError(str(exc)) from None


def _fail(kind: str, message: str, code: int) -> int:
    print(f"error: kind={kind} message={json.dumps(message)}", file=sys.stderr)
    return code


def main(argv: list[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        config = config_from_args(argv)
        text = run_experiment(config)
    except UsageError as exc:
        return _fail("usage", str(exc), EXIT_USAGE)
    except MissingCalibrationError as exc:
        return _fail("missing-calibration", str(exc), EXIT_CALIBRATION)
    except EstimationError as exc:
        return _fail("estimation", str(exc), EXIT_ESTIMATION)
    except ValueError as exc:
        return _fail("usage", str(exc), EXIT_USAGE)
    if not config.out:
        sys.stdout.write(text)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
