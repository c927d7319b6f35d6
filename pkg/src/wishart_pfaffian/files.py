"""CSV/JSON serialization of density curves and reports."""

from __future__ import annotations

import csv
import json
import math

import numpy as np

from .extremes import DensityCurve
from .model import ModelParams

SCHEMA_VERSION = 1
CSV_HEADER = ("lambda", "pdf", "cdf")


def fmt(x: float) -> str:
    """17 significant digits: lossless for doubles."""
    return f"{x:.17g}"


def jsonable(values):
    """Float list with NaN/inf mapped to None (JSON has no NaN)."""
    return [float(v) if math.isfinite(v) else None for v in np.asarray(values, dtype=float)]


def curve_rows(curve: DensityCurve):
    for lam, f, c in zip(curve.grid, curve.pdf, curve.cdf):
        yield fmt(lam), fmt(f), fmt(c)


def write_curve_csv(curve: DensityCurve, stream) -> None:
    w = csv.writer(stream, lineterminator="\n")
    w.writerow(CSV_HEADER)
    w.writerows(curve_rows(curve))


def read_curve_csv(stream, which: str, params: ModelParams) -> DensityCurve:
    r = csv.reader(stream)
    header = tuple(next(r))
    if header != CSV_HEADER:
        raise ValueError(f"unexpected CSV header {header}")
    data = np.array([[float(x) for x in row] for row in r if row], dtype=float)
    if data.size == 0:
        raise ValueError("CSV holds no rows")
    return DensityCurve(which, params, data[:, 0], data[:, 1], data[:, 2],
                        valid=np.isfinite(data[:, 1]))


def curve_payload(curve: DensityCurve, runtime_ms: float | None = None) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "params": curve.params.as_dict(),
        "which": curve.which,
        "grid": jsonable(curve.grid),
        "pdf": jsonable(curve.pdf),
        "cdf": jsonable(curve.cdf),
        "ks": None,
        "warnings": list(curve.warnings),
        "seed": None,
        "runtime_ms": runtime_ms,
    }


def dump_json(payload: dict, stream) -> None:
    json.dump(payload, stream, sort_keys=True, indent=1, allow_nan=False)
    stream.write("\n")
