"""Independent checks for the extreme-eigenvalue densities.

Three routes that share nothing with the Pfaffian code path:

* Monte Carlo: draw ``A`` (M x K, iid N(0, rho)), form ``W = A^T A`` and
  keep its extreme eigenvalues.
* Brute force: nested 1-D quadrature of the joint eigenvalue density over
  the ordered region (K <= 4).
* Kolmogorov-Smirnov distance between a sample and a tabulated cdf.

Reproducibility: draw ``i`` of a run with seed ``s`` comes from a Philox
counter-based generator keyed by ``s`` whose counter starts at
``[0, 0, i, attempt]``, so every draw owns an independent sub-stream and
the result does not depend on how draws are split across threads.
Gaussians come from numpy's ``Generator.standard_normal`` (ziggurat).
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import StructuralError, UnsupportedScaleError
from .extremes import DensityCurve, thread_count
from .model import ModelParams, joint_density
from .quadrature import QuadSpec, integrate_finite, integrate_semi_infinite

__all__ = [
    "EmpiricalSample",
    "sample_extreme_eigs",
    "sample_extreme_pairs",
    "brute_force_pdf",
    "ks_statistic",
    "clipped_fraction",
    "histogram_deviation",
    "sample_from_curve",
]

log = logging.getLogger(__name__)

MAX_RETRIES = 8
_SEED_MASK = (1 << 64) - 1


@dataclass(frozen=True)
class EmpiricalSample:
    which: str
    values: np.ndarray
    n_samples: int
    seed: int
    params: ModelParams
    retries: int = 0

    def __post_init__(self):
        v = np.sort(np.asarray(self.values, dtype=float))
        if v.size != self.n_samples:
            raise StructuralError("values length must equal n_samples")
        if np.any(v < 0):
            raise StructuralError("eigenvalue samples must be nonnegative")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)


def _generator(seed: int, index: int, attempt: int) -> np.random.Generator:
    bitgen = np.random.Philox(key=seed & _SEED_MASK, counter=[0, 0, index, attempt])
    return np.random.Generator(bitgen)


def _draw_matrix(p: ModelParams, seed: int, index: int, attempt: int) -> np.ndarray:
    return math.sqrt(p.rho) * _generator(seed, index, attempt).standard_normal((p.M, p.K))


def _extremes_of(a: np.ndarray):
    w = a.T @ a
    ev = np.linalg.eigvalsh(w)
    return ev[-1], ev[0]


def _draw_block(p: ModelParams, seed: int, start: int, stop: int):
    """Largest/smallest eigenvalue for draws start..stop-1 plus retry count."""
    n = stop - start
    a = np.empty((n, p.M, p.K))
    for k in range(n):
        a[k] = _draw_matrix(p, seed, start + k, 0)
    retries = 0
    try:
        w = np.swapaxes(a, 1, 2) @ a
        ev = np.linalg.eigvalsh(w)
        return ev[:, -1].copy(), ev[:, 0].copy(), 0
    except np.linalg.LinAlgError:
        pass
    big = np.empty(n)
    small = np.empty(n)
    for k in range(n):
        for attempt in range(MAX_RETRIES):
            mat = a[k] if attempt == 0 else _draw_matrix(p, seed, start + k, attempt)
            try:
                big[k], small[k] = _extremes_of(mat)
                break
            except np.linalg.LinAlgError:
                retries += 1
        else:
            raise np.linalg.LinAlgError(f"eigen-solver failed {MAX_RETRIES} times on draw {start + k}")
    return big, small, retries


def sample_extreme_pairs(p: ModelParams, n_samples: int, seed: int, n_jobs: int | None = None):
    """Largest and smallest eigenvalue of each of ``n_samples`` draws.

    Returns ``(largest, smallest, retries)`` in draw order (unsorted).
    """
    if int(n_samples) != n_samples or n_samples < 1:
        raise ValueError(f"n_samples must be a positive integer, got {n_samples}")
    n_samples = int(n_samples)
    n_jobs = n_jobs or thread_count()
    chunk = 2048
    bounds = [(s, min(s + chunk, n_samples)) for s in range(0, n_samples, chunk)]
    if n_jobs > 1 and len(bounds) > 1:
        with ThreadPoolExecutor(max_workers=n_jobs) as pool:
            parts = list(pool.map(lambda b: _draw_block(p, seed, *b), bounds))
    else:
        parts = [_draw_block(p, seed, *b) for b in bounds]
    big = np.concatenate([x[0] for x in parts])
    small = np.concatenate([x[1] for x in parts])
    retries = sum(x[2] for x in parts)
    if retries:
        log.warning("eigen-solver retried %d draw(s)", retries)
    # W is PSD; clip rounding noise below zero
    return np.maximum(big, 0.0), np.maximum(small, 0.0), retries


def sample_extreme_eigs(p: ModelParams, n_samples: int, seed: int, which: str,
                        n_jobs: int | None = None) -> EmpiricalSample:
    if which not in ("largest", "smallest"):
        raise ValueError(f"which must be 'largest' or 'smallest', got {which!r}")
    big, small, retries = sample_extreme_pairs(p, n_samples, seed, n_jobs)
    values = big if which == "largest" else small
    return EmpiricalSample(which, values, int(n_samples), int(seed), p, retries)


# ---------------------------------------------------------------------------
# brute-force ordered-region quadrature

def _density_or_zero(lams, p):
    lams = np.asarray(lams, dtype=float)
    if np.any(np.diff(lams) >= 0) or lams[-1] < 0:
        return 0.0
    return joint_density(lams, p)


def brute_force_pdf(lam: float, p: ModelParams, which: str, spec: QuadSpec | None = None) -> float:
    """Marginal density of an extreme eigenvalue by nested quadrature.

    Integrates the joint density over the remaining K-1 ordered
    eigenvalues, one adaptive 1-D rule per level.  The innermost level uses
    ``spec.rel_tol`` (default 1e-9); each enclosing level is one decade
    looser, since it integrates the inner levels' quadrature noise.
    """
    if which not in ("largest", "smallest"):
        raise ValueError(f"which must be 'largest' or 'smallest', got {which!r}")
    if not 2 <= p.K <= 4:
        raise UnsupportedScaleError(f"brute-force oracle supports 2 <= K <= 4, got K={p.K}")
    lam = float(lam)
    base = spec or QuadSpec(rel_tol=1e-9, abs_tol=1e-30)
    depth_total = p.K - 1

    def spec_at(depth):
        # depth 1 = outermost
        loosen = 10.0 ** (depth_total - depth)
        return QuadSpec(base.rel_tol * loosen, base.abs_tol, base.max_subdivisions)

    if which == "largest":
        def level(prefix, depth):
            def f(nodes):
                if depth == depth_total:
                    return np.array([_density_or_zero(prefix + [x], p) for x in nodes])
                return np.array([level(prefix + [x], depth + 1) for x in nodes])
            return integrate_finite(f, 0.0, prefix[-1], spec_at(depth))[0]

        if lam == 0.0:
            return 0.0
        return float(level([lam], 1))

    pts = lam + 2.0 * p.rho * np.array([1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0]) * max(1.0, p.M / 4.0)

    def level(suffix, depth):
        lower = suffix[0]

        def f(nodes):
            if depth == depth_total:
                return np.array([_density_or_zero([x] + suffix, p) for x in nodes])
            return np.array([level([x] + suffix, depth + 1) for x in nodes])

        return integrate_semi_infinite(f, lower, spec_at(depth), points=pts)[0]

    return float(level([lam], 1))


# ---------------------------------------------------------------------------
# goodness of fit

def _curve_cdf(curve: DensityCurve, x):
    return np.interp(x, curve.grid, curve.cdf, left=0.0, right=curve.cdf[-1])


def ks_statistic(sample: EmpiricalSample, curve: DensityCurve) -> float:
    """Sup distance between the sample's empirical cdf and the curve's cdf.

    The curve cdf is linearly interpolated between grid points, taken as 0
    below the grid and as its final value above it; see
    :func:`clipped_fraction` for how much of the sample falls outside.
    """
    x = np.asarray(sample.values, dtype=float)
    n = x.size
    if n == 0:
        raise StructuralError("KS statistic of an empty sample")
    f = _curve_cdf(curve, np.sort(x))
    i = np.arange(1, n + 1)
    d_plus = np.max(i / n - f)
    d_minus = np.max(f - (i - 1) / n)
    return float(min(1.0, max(d_plus, d_minus, 0.0)))


def clipped_fraction(sample: EmpiricalSample, curve: DensityCurve) -> float:
    x = np.asarray(sample.values)
    if x.size == 0:
        return 0.0
    return float(np.mean((x < curve.grid[0]) | (x > curve.grid[-1])))


def histogram_deviation(sample: EmpiricalSample, curve: DensityCurve, bins: int = 50) -> float:
    """Largest |histogram density - pdf| over bin centres inside the grid."""
    x = np.asarray(sample.values)
    lo, hi = curve.grid[0], curve.grid[-1]
    inside = x[(x >= lo) & (x <= hi)]
    if inside.size == 0:
        return math.nan
    edges = np.linspace(inside.min(), inside.max(), bins + 1)
    counts, _ = np.histogram(inside, bins=edges)
    dens = counts / (x.size * np.diff(edges))
    centres = 0.5 * (edges[1:] + edges[:-1])
    ref = np.interp(centres, curve.grid, np.nan_to_num(curve.pdf))
    return float(np.max(np.abs(dens - ref)))


def sample_from_curve(curve: DensityCurve, n: int, seed: int) -> EmpiricalSample:
    """Inverse-transform sample from a curve's (normalized) cdf."""
    c = curve.cdf / curve.cdf[-1]
    keep = np.concatenate([[True], np.diff(c) > 0])
    u = np.random.default_rng(seed).random(n)
    values = np.interp(u, c[keep], curve.grid[keep])
    return EmpiricalSample(curve.which, values, n, seed, curve.params)
