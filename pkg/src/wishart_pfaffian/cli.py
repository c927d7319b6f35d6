"""Command-line interface: ``wishart-pfaffian {pdf,validate,sweep}``.

Exit codes: 0 success, 1 goodness-of-fit check failed, 2 usage or
parameter error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import contextlib
import logging
import math
import sys
import time
from pathlib import Path

import numpy as np

from . import files
from .errors import ParameterError, WishartError
from .extremes import evaluate_curve
from .model import ModelParams
from .special import reg_upper_gamma
from .validation import (
    EmpiricalSample,
    clipped_fraction,
    histogram_deviation,
    ks_statistic,
    sample_extreme_pairs,
)

log = logging.getLogger("wishart_pfaffian")

EXIT_OK, EXIT_FIT, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2, 3
AUTO_POINTS = 400
TAIL_MASS = 1e-6
NEGATIVE_TOL = 1e-8
KS_CONFIDENCE = 1.63  # 99% asymptotic KS critical value


class UsageError(Exception):
    pass


# ---------------------------------------------------------------------------
# argument helpers

def parse_m_list(text: str) -> list[int]:
    items = [s.strip() for s in str(text).split(",") if s.strip()]
    if not items:
        raise UsageError("M list is empty")
    try:
        return [int(s) for s in items]
    except ValueError:
        raise UsageError(f"M list must be comma-separated integers, got {text!r}") from None


def parse_grid(text: str):
    """``min:max:points`` -> array, or ``"auto"`` -> None."""
    if text == "auto":
        return None
    parts = text.split(":")
    if len(parts) != 3:
        raise UsageError(f"grid must be 'min:max:points' or 'auto', got {text!r}")
    try:
        lo, hi, n = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError:
        raise UsageError(f"cannot parse grid {text!r}") from None
    if lo < 0:
        raise UsageError("grid min must be >= 0")
    if n < 2:
        raise UsageError("grid needs at least 2 points")
    if not hi > lo:
        raise UsageError("grid max must exceed grid min")
    return np.linspace(lo, hi, n)


def tail_bound(p: ModelParams, mass: float = TAIL_MASS) -> float:
    """An eigenvalue level q with P(lambda_max > q) < ``mass``.

    Two envelopes, whichever is tighter: lambda_max <= trace W with
    trace W / rho ~ chi-square(MK), and the Gaussian concentration bound
    P(s_max(A) > sqrt(rho) (sqrt M + sqrt K + t)) <= exp(-t^2 / 2).
    """
    dof = p.M * p.K
    lo, hi = 0.0, 2.0 * dof + 10.0
    while reg_upper_gamma(dof / 2.0, hi / 2.0) >= mass:
        hi *= 2.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if reg_upper_gamma(dof / 2.0, mid / 2.0) < mass:
            hi = mid
        else:
            lo = mid
    chi2 = p.rho * hi
    t = math.sqrt(2.0 * math.log(1.0 / mass))
    gauss = p.rho * (math.sqrt(p.M) + math.sqrt(p.K) + t) ** 2
    return min(chi2, gauss)


def auto_grid(p: ModelParams, points: int = AUTO_POINTS) -> np.ndarray:
    return np.linspace(0.0, tail_bound(p), points)


def resolve_rho(args, M: int) -> float:
    if args.rho_mode == "inverse-M":
        return 1.0 / M
    return args.rho


def expand_which(which: str):
    return ("largest", "smallest") if which == "both" else (which,)


def make_params(K, M, rho) -> ModelParams:
    try:
        return ModelParams(K, M, rho)
    except ParameterError as exc:
        raise UsageError(str(exc)) from None


def _open_out(path):
    if path is None or path == "-":
        return contextlib.nullcontext(sys.stdout)
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    return open(path, "w", newline="")


def _curve_status(curve) -> int:
    # A mass far from 1 usually means a short or coarse grid and is only
    # warned about; invalid points or clearly negative values mean the
    # evaluation itself broke down.
    if not curve.valid.all():
        return EXIT_NUMERIC
    peak = float(np.max(np.abs(curve.pdf))) if curve.pdf.size else 0.0
    if np.any(curve.pdf < -NEGATIVE_TOL * peak):
        return EXIT_NUMERIC
    return EXIT_OK


def _emit_warnings(messages):
    for m in messages:
        print(f"warning: {m}", file=sys.stderr)


# ---------------------------------------------------------------------------
# commands

def cmd_pdf(args) -> int:
    Ms = parse_m_list(args.M)
    jobs = []
    for M in Ms:
        p = make_params(args.K, M, resolve_rho(args, M))
        grid = parse_grid(args.grid)
        for which in expand_which(args.which):
            jobs.append((which, p, auto_grid(p) if grid is None else grid))

    single = len(jobs) == 1
    if not single and args.output in (None, "-"):
        raise UsageError("several curves requested: --output must name a directory")
    status = EXIT_OK
    for which, p, grid in jobs:
        t0 = time.perf_counter()
        curve = evaluate_curve(which, grid, p)
        runtime_ms = (time.perf_counter() - t0) * 1e3
        _emit_warnings(curve.warnings)
        status = max(status, _curve_status(curve))
        if single:
            target = args.output
        else:
            target = Path(args.output) / f"{which}_K{p.K}_M{p.M}.{args.format}"
        with _open_out(target) as fh:
            if args.format == "csv":
                files.write_curve_csv(curve, fh)
            else:
                files.dump_json(files.curve_payload(curve, runtime_ms), fh)
    if status:
        print("error: numerical failure (invalid points or negative density values)",
              file=sys.stderr)
    return status


def validation_report(p: ModelParams, whiches, grid, n_samples: int, seed: int,
                      ks_threshold: float) -> tuple[dict, int]:
    """Run the Monte Carlo comparison and build the JSON report."""
    t0 = time.perf_counter()
    big, small, retries = sample_extreme_pairs(p, n_samples, seed)
    threshold = max(ks_threshold, KS_CONFIDENCE / math.sqrt(n_samples))
    flags = []
    if n_samples < 100:
        flags.append("insufficient-samples")
    report = {
        "schema_version": files.SCHEMA_VERSION,
        "params": p.as_dict(),
        "which": list(whiches),
        "grid": files.jsonable(grid),
        "pdf": {},
        "cdf": {},
        "ks": {},
        "ks_threshold": threshold,
        "histogram_max_deviation": {},
        "clipped_fraction": {},
        "n_samples": n_samples,
        "seed": seed,
        "eigensolver_retries": retries,
        "warnings": [],
        "flags": flags,
    }
    numeric_ok = True
    for which in whiches:
        curve = evaluate_curve(which, grid, p)
        values = big if which == "largest" else small
        sample = EmpiricalSample(which, values, n_samples, seed, p, retries)
        ks = ks_statistic(sample, curve)
        report["pdf"][which] = files.jsonable(curve.pdf)
        report["cdf"][which] = files.jsonable(curve.cdf)
        report["ks"][which] = ks
        report["histogram_max_deviation"][which] = histogram_deviation(sample, curve)
        report["clipped_fraction"][which] = clipped_fraction(sample, curve)
        report["warnings"].extend(curve.warnings)
        numeric_ok &= _curve_status(curve) == EXIT_OK
        if ks >= threshold:
            flags.append(f"ks-exceeded:{which}")
    passed = not flags and numeric_ok
    report["passed"] = passed
    report["runtime_ms"] = (time.perf_counter() - t0) * 1e3
    if not numeric_ok:
        status = EXIT_NUMERIC
    else:
        status = EXIT_OK if passed else EXIT_FIT
    return report, status


def cmd_validate(args) -> int:
    Ms = parse_m_list(args.M)
    if len(Ms) != 1:
        raise UsageError("validate takes a single M")
    if args.samples < 1:
        raise UsageError("--samples must be >= 1")
    p = make_params(args.K, Ms[0], resolve_rho(args, Ms[0]))
    grid = parse_grid(args.grid)
    grid = auto_grid(p) if grid is None else grid
    report, status = validation_report(p, expand_which(args.which), grid, args.samples,
                                       args.seed, args.ks_threshold)
    _emit_warnings(report["warnings"])
    with _open_out(args.output) as fh:
        files.dump_json(report, fh)
    return status


def cmd_sweep(args) -> int:
    Ms = parse_m_list(args.M)
    grid_arg = parse_grid(args.grid)
    params = [make_params(args.K, M, resolve_rho(args, M)) for M in Ms]
    curves = []
    status = EXIT_OK
    for p in params:
        grid = auto_grid(p) if grid_arg is None else grid_arg
        for which in expand_which(args.which):
            curve = evaluate_curve(which, grid, p)
            _emit_warnings(curve.warnings)
            status = max(status, _curve_status(curve))
            curves.append(curve)
    with _open_out(args.output) as fh:
        if args.format == "csv":
            fh.write("M,which,lambda,pdf,cdf\n")
            for c in curves:
                for lam, f, cdf in files.curve_rows(c):
                    fh.write(f"{c.params.M},{c.which},{lam},{f},{cdf}\n")
        else:
            files.dump_json({
                "schema_version": files.SCHEMA_VERSION,
                "params": {"K": args.K, "rho_mode": args.rho_mode,
                           "rho": None if args.rho_mode == "inverse-M" else args.rho},
                "curves": [
                    {"M": c.params.M, "rho": c.params.rho, "which": c.which,
                     "grid": files.jsonable(c.grid), "pdf": files.jsonable(c.pdf),
                     "cdf": files.jsonable(c.cdf), "warnings": list(c.warnings)}
                    for c in curves
                ],
            }, fh)
    return status


# ---------------------------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="wishart-pfaffian",
                     description="Extreme-eigenvalue densities of real Wishart matrices.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp, which_default):
        sp.add_argument("--K", type=int, required=True, help="matrix order")
        sp.add_argument("--M", required=True, help="degrees of freedom (comma list allowed)")
        sp.add_argument("--rho", type=float, default=1.0, help="scale, Sigma = rho I")
        sp.add_argument("--rho-mode", choices=("fixed", "inverse-M"), default="fixed")
        sp.add_argument("--which", choices=("largest", "smallest", "both"), default=which_default)
        sp.add_argument("--grid", default="auto", help="'min:max:points' or 'auto'")
        sp.add_argument("--output", default=None, help="output file ('-' = stdout) or directory")

    sp = sub.add_parser("pdf", help="tabulate pdf and cdf")
    common(sp, "largest")
    sp.add_argument("--format", choices=("csv", "json"), default="csv")
    sp.set_defaults(func=cmd_pdf)

    sp = sub.add_parser("validate", help="compare against Monte Carlo samples")
    common(sp, "both")
    sp.add_argument("--samples", type=int, default=10_000)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--ks-threshold", type=float, default=0.02)
    sp.set_defaults(func=cmd_validate)

    sp = sub.add_parser("sweep", help="several M values in one long-format table")
    common(sp, "largest")
    sp.add_argument("--format", choices=("csv", "json"), default="csv")
    sp.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None) -> int:
    logging.basicConfig(level=logging.ERROR, format="%(levelname)s: %(message)s")
    try:
        args = build_parser().parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (WishartError, ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
