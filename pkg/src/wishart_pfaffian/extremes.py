"""Densities of the largest and smallest eigenvalue of a real Wishart matrix.

For the largest eigenvalue the Vandermonde determinant is expanded along the
row of lambda_1, leaving K terms

    f(l1) = c * sum_n (-1)^(n+1) l1^(K-n) xi(l1) * I_n(l1),

where I_n is a (K-1)-fold ordered integral of a determinant whose columns
are theta_i(x) = x^{r(n,i)} xi(x).  De Bruijn's identity turns each I_n
into the Pfaffian of a skew matrix B_n of pairwise signed double integrals

    b_ij = int int theta_i(x) theta_j(y) sgn(y - x) dx dy   over [0, l1]^2,

augmented by the single integrals int theta_i when K-1 is odd.  The inner
integral is a lower incomplete gamma, so every entry costs one outer
quadrature.  The smallest eigenvalue is identical with [lK, inf) in place
of [0, l1], upper incomplete gammas, and the expansion along the last row.

De Bruijn's identity is stated for ascending variables; the eigenvalues are
descending, so every Pfaffian picks up the reversal parity
(-1)^{N(N-1)/2}, N = K-1.

Numerics.  Entry (i, j) carries a factor g_i g_j with
g = (2 rho)^a Gamma(a), a = r + (M-K+1)/2.  The factors are pulled out by
congruence (Pf(D A D) = det(D) Pf(A)) into ``SkewMatrix.log_scale``; the
remaining normalized entries are integrals of a gamma pdf against
regularized incomplete gammas and lie in [-1, 1].  All B_n for one
eigenvalue are sub-matrices of a single K x K table indexed by the power r,
which is integrated once as a vector-valued integrand.
"""

from __future__ import annotations

import logging
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import StructuralError, WishartError
from .logvalue import SignedLogValue, signed_logsumexp
from .model import ModelParams, _weighted_power, exponent_r, log_norm_constant
from .pfaffian import SkewMatrix, pfaffian
from .quadrature import QuadSpec, integrate_finite, integrate_semi_infinite
from .special import reg_lower_gamma, reg_upper_gamma

__all__ = [
    "DensityCurve",
    "KernelTable",
    "kernel_table",
    "kernel_entry_largest",
    "kernel_entry_smallest",
    "aug_entry_largest",
    "aug_entry_smallest",
    "assemble_skew_largest",
    "assemble_skew_smallest",
    "log_pdf",
    "pdf_largest",
    "pdf_smallest",
    "evaluate_curve",
    "default_quad_spec",
    "thread_count",
]

log = logging.getLogger(__name__)

WHICH = ("largest", "smallest")
AUGMENTATIONS = ("de_bruijn", "two_column")
NORMALIZATION_WARN = 1e-3


def default_quad_spec(p: ModelParams) -> QuadSpec:
    """Entry tolerance: 1e-10, relaxed to 1e-8 above K = 20."""
    return QuadSpec(rel_tol=1e-8) if p.K > 20 else QuadSpec()


def thread_count() -> int:
    """Fan-out cap from ``WISHART_THREADS`` (default 1)."""
    raw = os.environ.get("WISHART_THREADS", "1")
    try:
        n = int(raw)
    except ValueError:
        raise ValueError(f"WISHART_THREADS must be an integer >= 1, got {raw!r}") from None
    if n < 1:
        raise ValueError(f"WISHART_THREADS must be an integer >= 1, got {raw!r}")
    return n


def _check_which(which):
    if which not in WHICH:
        raise ValueError(f"which must be 'largest' or 'smallest', got {which!r}")


# ---------------------------------------------------------------------------
# gamma ladders on a node array

def _shapes(p: ModelParams, powers=None) -> np.ndarray:
    powers = np.arange(p.K) if powers is None else np.asarray(powers)
    return p.gamma_shape_offset + powers


def _log_entry_scales(shapes: np.ndarray, rho: float) -> np.ndarray:
    # ln g = a ln(2 rho) + ln Gamma(a)
    return np.array([a * math.log(2.0 * rho) + math.lgamma(a) for a in shapes])


def _log_pdf_terms(shapes, t):
    # ln(t^(a-1) e^-t / Gamma(a)) for every node (rows) and shape (cols); t > 0
    lg = np.array([math.lgamma(a) for a in shapes])
    return (shapes[None, :] - 1.0) * np.log(t)[:, None] - t[:, None] - lg[None, :]


def _lower_ladder(shapes, t):
    """P(a_k, t) for consecutive shapes a_k = a_0 + k; downward recursion."""
    t = np.atleast_1d(np.asarray(t, dtype=float))
    out = np.zeros((t.size, shapes.size))
    pos = t > 0
    if not np.any(pos):
        return out
    tp = t[pos]
    col = reg_lower_gamma(shapes[-1], tp)
    out[pos, -1] = col
    logt = np.log(tp)
    for k in range(shapes.size - 2, -1, -1):
        a = shapes[k]
        # P(a) = P(a+1) + t^a e^-t / Gamma(a+1)
        col = col + np.exp(a * logt - tp - math.lgamma(a + 1.0))
        out[pos, k] = col
    return np.minimum(out, 1.0)


def _upper_ladder(shapes, x):
    """Q(a_k, x) for consecutive shapes a_k = a_0 + k; upward recursion."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    out = np.ones((x.size, shapes.size))
    pos = x > 0
    if not np.any(pos):
        return out
    xp = x[pos]
    col = reg_upper_gamma(shapes[0], xp)
    out[pos, 0] = col
    logx = np.log(xp)
    for k in range(1, shapes.size):
        a = shapes[k - 1]
        # Q(a+1) = Q(a) + x^a e^-x / Gamma(a+1)
        col = col + np.exp(a * logx - xp - math.lgamma(a + 1.0))
        out[pos, k] = col
    return np.minimum(out, 1.0)


def _breakpoints(shapes, lo, hi=None):
    """Initial partition covering the gamma-pdf mass of every shape."""
    a_min, a_max = float(np.min(shapes)), float(np.max(shapes))
    left = max(lo, a_min - 1.0 - 8.0 * math.sqrt(a_max))
    right = a_max + 12.0 * math.sqrt(a_max) + 12.0
    if hi is not None:
        right = min(right, hi)
    if right <= left:
        return None
    step = max(1.0, math.sqrt(a_min))
    n = int(min(64, max(2, math.ceil((right - left) / step))))
    return np.linspace(left, right, n + 1)


# ---------------------------------------------------------------------------
# kernel tables

@dataclass(frozen=True)
class KernelTable:
    """All normalized kernel integrals for one eigenvalue ``lam``.

    ``entries[p, q]`` is the normalized signed double integral between the
    power-p and power-q weights (p feeds the incomplete gamma, q the outer
    integrand); ``aug[p]`` is the normalized single integral; the true
    values carry ``exp(log_scales[p] + log_scales[q])`` and
    ``exp(log_scales[p])`` respectively.
    """

    which: str
    params: ModelParams
    lam: float
    entries: np.ndarray
    aug: np.ndarray
    log_scales: np.ndarray


def kernel_table(which: str, lam: float, p: ModelParams, spec: QuadSpec | None = None) -> KernelTable:
    _check_which(which)
    lam = float(lam)
    if not lam >= 0.0:
        raise ValueError(f"eigenvalue must be >= 0, got {lam}")
    spec = spec or default_quad_spec(p)
    K = p.K
    shapes = _shapes(p)
    log_scales = _log_entry_scales(shapes, p.rho)
    T = lam / (2.0 * p.rho)
    rows, cols = np.triu_indices(K, 1)
    entries = np.zeros((K, K))

    if which == "largest":
        edge = _lower_ladder(shapes, T)[0]

        def integrand(t):
            inc = _lower_ladder(shapes, t)
            dens = np.exp(_log_pdf_terms(shapes, t))
            return dens[:, cols] * (2.0 * inc[:, rows] - edge[rows])

        if rows.size and T > 0.0:
            vals, _ = integrate_finite(integrand, 0.0, T, spec, points=_breakpoints(shapes, 0.0, T))
            entries[rows, cols] = vals
    else:
        edge = _upper_ladder(shapes, T)[0]

        def integrand(x):
            inc = _upper_ladder(shapes, x)
            dens = np.exp(_log_pdf_terms(shapes, x))
            return dens[:, cols] * (edge[rows] - 2.0 * inc[:, rows])

        if rows.size:
            vals, _ = integrate_semi_infinite(integrand, T, spec, points=_breakpoints(shapes, T))
            entries[rows, cols] = vals

    entries[cols, rows] = -entries[rows, cols]
    return KernelTable(which, p, lam, entries, edge.copy(), log_scales)


def _single_entry(which, n, i, j, lam, p, spec):
    K = p.K
    a_i = _shapes(p, [exponent_r(n, i, K)])
    a_j = _shapes(p, [exponent_r(n, j, K)])
    if i == j:
        return SignedLogValue.zero()
    spec = spec or default_quad_spec(p)
    T = float(lam) / (2.0 * p.rho)
    ai = float(a_i[0])
    both = np.concatenate([a_i, a_j])
    log_scale = float(np.sum(_log_entry_scales(both, p.rho)))
    if which == "largest":
        edge = reg_lower_gamma(ai, T)

        def f(t):
            return np.exp(_log_pdf_terms(a_j, t)[:, 0]) * (2.0 * reg_lower_gamma(ai, t) - edge)

        val, _ = integrate_finite(f, 0.0, T, spec, points=_breakpoints(both, 0.0, T))
    else:
        edge = reg_upper_gamma(ai, T)

        def f(x):
            return np.exp(_log_pdf_terms(a_j, x)[:, 0]) * (edge - 2.0 * reg_upper_gamma(ai, x))

        val, _ = integrate_semi_infinite(f, T, spec, points=_breakpoints(both, T))
    return SignedLogValue.from_float(val).scaled(log_scale)


def kernel_entry_largest(n, i, j, lambda1, p: ModelParams, spec: QuadSpec | None = None) -> SignedLogValue:
    """b_ij for the largest-eigenvalue matrix B_n, by a single quadrature."""
    return _single_entry("largest", n, i, j, lambda1, p, spec)


def kernel_entry_smallest(n, i, j, lambdaK, p: ModelParams, spec: QuadSpec | None = None) -> SignedLogValue:
    """d_ij for the smallest-eigenvalue matrix D_n, by a single quadrature."""
    return _single_entry("smallest", n, i, j, lambdaK, p, spec)


def aug_entry_largest(n, i, lambda1, p: ModelParams) -> SignedLogValue:
    """int_0^lambda1 theta_i = (2 rho)^a gamma(a, lambda1 / 2 rho)."""
    a = float(_shapes(p, [exponent_r(n, i, p.K)])[0])
    val = reg_lower_gamma(a, float(lambda1) / (2.0 * p.rho))
    return SignedLogValue.from_float(val).scaled(float(_log_entry_scales(np.array([a]), p.rho)[0]))


def aug_entry_smallest(n, i, lambdaK, p: ModelParams) -> SignedLogValue:
    """int_lambdaK^inf theta_i = (2 rho)^a Gamma(a, lambdaK / 2 rho)."""
    a = float(_shapes(p, [exponent_r(n, i, p.K)])[0])
    val = reg_upper_gamma(a, float(lambdaK) / (2.0 * p.rho))
    return SignedLogValue.from_float(val).scaled(float(_log_entry_scales(np.array([a]), p.rho)[0]))


def skew_from_table(table: KernelTable, n: int, augmentation: str = "de_bruijn") -> SkewMatrix:
    """Cut B_n (or D_n) out of a kernel table.

    ``augmentation="de_bruijn"`` (default) borders an odd-order block with
    one column of single integrals.  ``"two_column"`` builds the two-column variant
    (a column of ones plus a column of single integrals, order K+1); that
    order is odd for even K, so its Pfaffian is rejected downstream.  It is
    kept for regression checks only.
    """
    if augmentation not in AUGMENTATIONS:
        raise ValueError(f"augmentation must be one of {AUGMENTATIONS}, got {augmentation!r}")
    K = table.params.K
    if not 1 <= n <= K:
        raise ValueError(f"n must lie in [1, {K}], got {n}")
    powers = [exponent_r(n, i, K) for i in range(1, K)]
    block = table.entries[np.ix_(powers, powers)]
    logs = list(table.log_scales[powers])
    if len(powers) % 2 == 1:
        u = table.aug[powers]
        if augmentation == "de_bruijn":
            extra = [u]
            logs += [0.0]
        else:
            ones = np.exp(-table.log_scales[powers])
            extra = [ones, np.append(u, 0.0)]
            logs += [0.0, 0.0]
        for col in extra:
            m = block.shape[0]
            col = np.resize(col, m)
            block = np.block([[block, col[:, None]], [-col[None, :], np.zeros((1, 1))]])
    order = block.shape[0]
    log_scale = 2.0 / order * math.fsum(logs) if order else 0.0
    return SkewMatrix(block, log_scale)


def assemble_skew_largest(n, lambda1, p: ModelParams, spec: QuadSpec | None = None,
                          augmentation: str = "de_bruijn") -> SkewMatrix:
    return skew_from_table(kernel_table("largest", lambda1, p, spec), n, augmentation)


def assemble_skew_smallest(n, lambdaK, p: ModelParams, spec: QuadSpec | None = None,
                           augmentation: str = "de_bruijn") -> SkewMatrix:
    return skew_from_table(kernel_table("smallest", lambdaK, p, spec), n, augmentation)


# ---------------------------------------------------------------------------
# densities

def _reversal_parity(K: int) -> int:
    N = K - 1
    return -1 if (N * (N - 1) // 2) % 2 else 1


def log_pdf(which: str, lam: float, p: ModelParams, spec: QuadSpec | None = None,
            augmentation: str = "de_bruijn") -> SignedLogValue:
    """Extreme-eigenvalue density at ``lam`` as a SignedLogValue."""
    _check_which(which)
    lam = float(lam)
    if not lam >= 0.0:
        raise ValueError(f"eigenvalue must be >= 0, got {lam}")
    K = p.K
    if which == "largest" and lam == 0.0 and K >= 2:
        return SignedLogValue.zero()
    table = kernel_table(which, lam, p, spec)
    parity = _reversal_parity(K)
    terms = []
    for n in range(1, K + 1):
        weight = _weighted_power(K - n, lam, p)
        if weight.is_zero:
            continue
        sign = (-1) ** (n + 1) if which == "largest" else (-1) ** (n + K)
        pf = pfaffian(skew_from_table(table, n, augmentation))
        terms.append(pf * weight * (sign * parity))
    return signed_logsumexp(terms) * log_norm_constant(p)


def pdf_largest(lambda1, p: ModelParams, spec: QuadSpec | None = None, augmentation: str = "de_bruijn") -> float:
    return log_pdf("largest", lambda1, p, spec, augmentation).to_float()


def pdf_smallest(lambdaK, p: ModelParams, spec: QuadSpec | None = None, augmentation: str = "de_bruijn") -> float:
    return log_pdf("smallest", lambdaK, p, spec, augmentation).to_float()


# ---------------------------------------------------------------------------
# curves

@dataclass(frozen=True)
class DensityCurve:
    """A density sampled on a grid with its trapezoidal cdf."""

    which: str
    params: ModelParams
    grid: np.ndarray
    pdf: np.ndarray
    cdf: np.ndarray
    valid: np.ndarray = None
    warnings: tuple = field(default_factory=tuple)

    def __post_init__(self):
        _check_which(self.which)
        grid = np.asarray(self.grid, dtype=float)
        pdf = np.asarray(self.pdf, dtype=float)
        cdf = np.asarray(self.cdf, dtype=float)
        if grid.ndim != 1 or grid.size == 0:
            raise StructuralError("grid must be a non-empty 1-D array")
        if pdf.shape != grid.shape or cdf.shape != grid.shape:
            raise StructuralError("grid, pdf and cdf must have the same length")
        if np.any(np.diff(grid) <= 0):
            raise StructuralError("grid must be strictly increasing")
        valid = np.ones(grid.size, bool) if self.valid is None else np.asarray(self.valid, bool)
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "pdf", pdf)
        object.__setattr__(self, "cdf", cdf)
        object.__setattr__(self, "valid", valid)
        object.__setattr__(self, "warnings", tuple(self.warnings))

    @property
    def total_mass(self) -> float:
        return float(self.cdf[-1])

    def mean(self) -> float:
        """Trapezoidal mean of the sampled density."""
        g, f = self.grid, np.nan_to_num(self.pdf)
        return float(np.trapezoid(g * f, g) / np.trapezoid(f, g))

    def quantile(self, q: float) -> float:
        """Inverse of the (normalized) cdf by linear interpolation."""
        c = self.cdf / self.cdf[-1]
        c = np.maximum.accumulate(c)
        return float(np.interp(q, c, self.grid))

    def mode(self) -> float:
        return float(self.grid[int(np.nanargmax(self.pdf))])


def trapezoid_cdf(grid, pdf) -> np.ndarray:
    grid = np.asarray(grid, dtype=float)
    pdf = np.asarray(pdf, dtype=float)
    # broken curves can hold +-inf; let them propagate quietly
    with np.errstate(invalid="ignore", over="ignore"):
        steps = 0.5 * np.diff(grid) * (pdf[1:] + pdf[:-1])
        return np.concatenate([[0.0], np.cumsum(steps)])


def evaluate_curve(which: str, grid, p: ModelParams, spec: QuadSpec | None = None,
                   n_jobs: int | None = None) -> DensityCurve:
    """Evaluate one extreme density on ``grid``.

    Grid points are independent and may be spread over ``n_jobs`` threads
    (default: ``WISHART_THREADS``); results are merged in grid order, so the
    output does not depend on the thread count.  A point whose evaluation
    fails is marked invalid and bridged linearly for the cdf.
    """
    _check_which(which)
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or grid.size == 0:
        raise StructuralError("grid must be a non-empty 1-D array")
    if np.any(np.diff(grid) <= 0):
        raise StructuralError("grid must be strictly increasing")
    if grid[0] < 0:
        raise StructuralError("grid must start at a nonnegative eigenvalue")
    spec = spec or default_quad_spec(p)
    n_jobs = n_jobs or thread_count()

    def point(lam):
        try:
            return log_pdf(which, lam, p, spec).to_float(), None
        except (WishartError, FloatingPointError) as exc:
            return math.nan, f"{which} pdf failed at lambda={lam:.17g}: {exc}"

    if n_jobs > 1 and grid.size > 1:
        with ThreadPoolExecutor(max_workers=n_jobs) as pool:
            results = list(pool.map(point, grid))
    else:
        results = [point(lam) for lam in grid]

    pdf = np.array([r[0] for r in results])
    messages = [r[1] for r in results if r[1]]
    valid = np.isfinite(pdf)
    filled = pdf.copy()
    if not valid.all():
        if valid.any():
            filled[~valid] = np.interp(grid[~valid], grid[valid], pdf[valid])
        else:
            filled[:] = 0.0
    cdf = trapezoid_cdf(grid, filled)
    if abs(cdf[-1] - 1.0) > NORMALIZATION_WARN:
        messages.append(
            f"{which} curve for K={p.K}, M={p.M}, rho={p.rho:g} integrates to "
            f"{cdf[-1]:.6g} over [{grid[0]:g}, {grid[-1]:g}]"
        )
    for msg in messages:
        log.warning(msg)
    return DensityCurve(which, p, grid, pdf, cdf, valid, tuple(messages))
