"""Command-line front end: decay curves, the fit workflow, and the no-go search.

Subcommands
-----------
decay        Write a CSV of the corrected (or uncorrected) decay curve, with
             an optional Monte Carlo column and its standard error.
fit          Estimate the decay rate of an uncorrected curve from the log of
             its amplitudes, predict the corrected curve, and optionally
             compare a measured corrected series against the prediction.
nogo         Search the ancilla-mixture simplex for zeros of the initial
             decay slope.
derivatives  Print the survival factor's derivatives at t = 0 and, for the
             named models, the inflection point.

All CSV output is UTF-8 with a header row, '.' decimal separator, and 17
significant digits, written atomically (write-then-rename) with a JSON run
manifest beside each file.  Exit codes: 0 success, 2 invalid parameters,
3 file I/O failure.  The environment variable TRIQEC_SEED supplies the
default Monte Carlo seed.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import subprocess
import sys
import tempfile
from pathlib import Path

import numpy as np

from . import __version__
from .analytics import (
    DecayCurve,
    curve_correlation,
    fit_exponential_rate,
    inflection_point,
    predict_corrected_curve,
    scale_to_rms,
    survival_derivatives_at_zero,
    survival_factor,
    uncorrected_decay,
)
from .noise import CovarianceError, NoiseChannel, effective_covariance
from .protocol import PipelineConfig, ancilla_mixture_nogo_search, run_pipeline_mc

SEED_ENV = "TRIQEC_SEED"
MODELS = ("correlated", "totally-correlated", "uncorrelated", "custom")


class CommandError(Exception):
    """A failure with a message and a process exit code."""

    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.code = code


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def read_covariance_file(path: str) -> np.ndarray:
    """Parse a covariance file: three rows of three reals, '#' comments."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise CommandError(f"cannot read covariance file {path}: {exc}", 3)
    rows = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        parts = body.split()
        if len(parts) != 3:
            raise CommandError(
                f"{path}:{lineno}: expected 3 numbers per row, got {len(parts)}", 2
            )
        try:
            rows.append([float(p) for p in parts])
        except ValueError:
            raise CommandError(f"{path}:{lineno}: could not parse {body!r}", 2)
    if len(rows) != 3:
        raise CommandError(f"{path}: expected 3 covariance rows, got {len(rows)}", 2)
    return np.array(rows)


def _resolve_covariance(args) -> np.ndarray:
    if getattr(args, "cov", None):
        matrix = read_covariance_file(args.cov)
        try:
            return effective_covariance("custom", matrix=matrix)
        except (CovarianceError, ValueError) as exc:
            raise CommandError(str(exc), 2)
    if args.model is None or args.model == "custom":
        raise CommandError("give --cov FILE or --model with --tau", 2)
    try:
        return effective_covariance(args.model, tau=args.tau)
    except ValueError as exc:
        raise CommandError(str(exc), 2)


def _resolve_seed(args) -> int:
    if getattr(args, "seed", None) is not None:
        return args.seed
    raw = os.environ.get(SEED_ENV)
    if raw is not None:
        try:
            return int(raw)
        except ValueError:
            raise CommandError(f"{SEED_ENV}={raw!r} is not an integer", 2)
    return 0


def _git_commit() -> str | None:
    try:
        out = subprocess.run(
            ["git", "rev-parse", "HEAD"], capture_output=True, text=True, timeout=5
        )
    except (OSError, subprocess.SubprocessError):
        return None
    return out.stdout.strip() if out.returncode == 0 else None


def _write_file_atomic(path: str, text: str) -> None:
    target = Path(path)
    try:
        fd, tmp_name = tempfile.mkstemp(dir=target.parent or Path("."), suffix=".tmp")
        try:
            with os.fdopen(fd, "w", encoding="utf-8", newline="") as handle:
                handle.write(text)
            os.replace(tmp_name, target)
        except BaseException:
            os.unlink(tmp_name)
            raise
    except OSError as exc:
        raise CommandError(f"cannot write {path}: {exc}", 3)


def _write_outputs(command: str, parameters: dict, tables: dict[str, tuple]) -> None:
    """Write every CSV atomically plus one manifest per output file."""
    manifest = {
        "command": command,
        "parameters": parameters,
        "seed": parameters.get("seed"),
        "samples": parameters.get("mc"),
        "version": __version__,
        "git_commit": _git_commit(),
        "outputs": sorted(tables),
    }
    manifest_text = json.dumps(manifest, indent=2, sort_keys=True) + "\n"
    for path, (header, rows) in tables.items():
        lines = [",".join(header)]
        lines += [",".join(_fmt(x) for x in row) for row in rows]
        _write_file_atomic(path, "\n".join(lines) + "\n")
        _write_file_atomic(str(path) + ".manifest.json", manifest_text)


def read_curve_csv(path: str) -> DecayCurve:
    """Read a (t, value) curve from the first two CSV columns."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise CommandError(f"cannot read {path}: {exc}", 3)
    reader = csv.reader(text.splitlines())
    times, values = [], []
    for row in reader:
        if not row or len(row) < 2:
            continue
        try:
            t, v = float(row[0]), float(row[1])
        except ValueError:
            continue  # header row
        times.append(t)
        values.append(v)
    if len(times) < 2:
        raise CommandError(f"{path}: expected at least two (t, value) rows", 2)
    try:
        return DecayCurve(np.array(times), np.array(values), provenance="monte-carlo")
    except ValueError as exc:
        raise CommandError(f"{path}: {exc}", 2)


def cmd_decay(args) -> int:
    cov = _resolve_covariance(args)
    seed = _resolve_seed(args)
    if args.points < 1:
        raise CommandError(f"--points must be >= 1, got {args.points}", 2)
    if args.tmax <= 0:
        raise CommandError(f"--tmax must be positive, got {args.tmax}", 2)
    if args.mc is not None and args.mc < 1:
        raise CommandError(f"--mc must be >= 1, got {args.mc}", 2)
    times = np.linspace(0.0, args.tmax, args.points)
    corrected = args.correction == "on"
    if corrected:
        analytic = np.atleast_1d(survival_factor(cov, times))
    else:
        analytic = np.atleast_1d(uncorrected_decay(cov, times))

    header = ["t", "theta_analytic"]
    columns = [times, analytic]
    if args.mc:
        channel = NoiseChannel(covariance=cov, axis="x")
        config = PipelineConfig(channel=channel, bloch=(0.0, 0.0, 1.0), correction=corrected)
        mc_vals, mc_errs = [], []
        for index, t in enumerate(times):
            result = run_pipeline_mc(
                config,
                float(t),
                samples=args.mc,
                seed=np.random.SeedSequence([seed, index]),
                workers=args.workers,
            )
            mc_vals.append(result.survival)
            mc_errs.append(result.survival_stderr)
        header += ["theta_mc", "mc_stderr"]
        columns += [np.array(mc_vals), np.array(mc_errs)]

    rows = list(zip(*columns))
    parameters = {
        "model": args.model,
        "tau": args.tau,
        "cov": args.cov,
        "points": args.points,
        "tmax": args.tmax,
        "correction": args.correction,
        "mc": args.mc,
        "seed": seed if args.mc else None,
        "workers": args.workers,
    }
    _write_outputs("decay", parameters, {args.out: (header, rows)})
    return 0


def cmd_fit(args) -> int:
    model = args.model
    if model == "custom" or model is None:
        raise CommandError("fit needs a named model (correlated or uncorrelated)", 2)
    measured = read_curve_csv(args.infile)
    if (measured.values <= 0).any():
        bad = float(measured.values.min())
        raise CommandError(
            f"all amplitudes must be positive for a log-linear fit (found {bad!r}); "
            "truncate the curve first",
            2,
        )
    fit = fit_exponential_rate(measured)
    print(f"rate = {_fmt(fit.rate)}")
    print(f"log_fit_correlation = {_fmt(fit.correlation)}")
    if fit.rate <= 0:
        raise CommandError(f"fitted rate {fit.rate!r} is not positive; not a decay", 2)
    predicted = predict_corrected_curve(fit.rate, model, measured.times)

    header = ["t", "theta_predicted"]
    columns = [predicted.times, predicted.values]
    if args.corrected:
        corrected = read_curve_csv(args.corrected)
        try:
            scaled = scale_to_rms(corrected, predicted)
        except ValueError as exc:
            raise CommandError(str(exc), 2)
        print(f"prediction_correlation = {_fmt(curve_correlation(scaled, predicted))}")
        header.append("corrected_scaled")
        columns.append(scaled.values)

    rows = list(zip(*columns))
    parameters = {
        "infile": args.infile,
        "model": model,
        "corrected": args.corrected,
    }
    _write_outputs("fit", parameters, {args.out: (header, rows)})
    return 0


def cmd_nogo(args) -> int:
    cov = _resolve_covariance(args)
    if cov[0, 0] <= 0:
        raise CommandError(
            "the no-go search requires a positive data-spin variance c11", 2
        )
    if not (0 < args.step <= 1):
        raise CommandError(f"--step must be in (0, 1], got {args.step}", 2)
    cert = ancilla_mixture_nogo_search(cov, grid_step=args.step)
    for zero in cert.zeros:
        print("zero-slope mixture: (" + ", ".join(_fmt(w) for w in zero) + ")")
    print(f"unique_ground_zero = {str(cert.unique_ground_zero).lower()}")
    print(f"min_margin_off_vertex = {_fmt(cert.min_margin)}")
    print("argmin_mixture = (" + ", ".join(_fmt(w) for w in cert.argmin) + ")")
    print(f"max_margin = {_fmt(cert.max_margin)}")
    return 0


def cmd_derivatives(args) -> int:
    cov = _resolve_covariance(args)
    first, second, third = survival_derivatives_at_zero(cov)
    print(f"first_derivative_at_zero = {_fmt(first)}")
    print(f"second_derivative_at_zero = {_fmt(second)}")
    print(f"third_derivative_at_zero = {_fmt(third)}")
    if args.model in ("correlated", "totally-correlated", "uncorrelated") and args.tau:
        print(f"inflection_point = {_fmt(inflection_point(args.model, args.tau))}")
    return 0


def _add_model_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--model", choices=MODELS, help="noise model")
    parser.add_argument("--tau", type=float, help="decay time constant for named models")
    parser.add_argument("--cov", help="covariance file (3x3, '#' comments)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="triqec",
        description="Three-spin error-corrected dephasing: decay curves, fits, no-go search.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_decay = sub.add_parser("decay", help="write a decay-curve CSV")
    _add_model_arguments(p_decay)
    p_decay.add_argument("--points", type=int, default=32, help="time grid size (default 32)")
    p_decay.add_argument("--tmax", type=float, default=1.2, help="last time point (s)")
    p_decay.add_argument("--correction", choices=("on", "off"), default="on")
    p_decay.add_argument("--mc", type=int, help="add a Monte Carlo column with this many samples")
    p_decay.add_argument("--seed", type=int, help=f"Monte Carlo seed (default ${SEED_ENV} or 0)")
    p_decay.add_argument("--workers", type=int, default=1, help="Monte Carlo worker threads")
    p_decay.add_argument("--out", required=True, help="output CSV path")
    p_decay.set_defaults(func=cmd_decay)

    p_fit = sub.add_parser("fit", help="fit an uncorrected curve, predict the corrected one")
    p_fit.add_argument("--in", dest="infile", required=True, help="uncorrected curve CSV")
    p_fit.add_argument("--model", choices=MODELS, required=True)
    p_fit.add_argument("--corrected", help="measured corrected curve CSV to compare")
    p_fit.add_argument("--out", required=True, help="output CSV path")
    p_fit.set_defaults(func=cmd_fit)

    p_nogo = sub.add_parser("nogo", help="search ancilla mixtures for zero initial slope")
    _add_model_arguments(p_nogo)
    p_nogo.add_argument("--step", type=float, default=0.01, help="simplex grid step")
    p_nogo.set_defaults(func=cmd_nogo)

    p_der = sub.add_parser("derivatives", help="print decay-law derivatives at t = 0")
    _add_model_arguments(p_der)
    p_der.set_defaults(func=cmd_derivatives)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CommandError as exc:
        print(f"triqec {args.command}: {exc}", file=sys.stderr)
        return exc.code
    except (ValueError, CovarianceError) as exc:
        print(f"triqec {args.command}: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"triqec {args.command}: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
