"""Sign-preserving Pfaffians of dense skew-symmetric matrices.

The Pfaffian is evaluated by Parlett-Reid elimination: the matrix is
reduced to tridiagonal skew form with Gaussian-style updates and row/column
pivoting, and the Pfaffian is the product of the super-diagonal pivots times
the parity of the pivoting permutation.  The product is accumulated as a
:class:`~wishart_pfaffian.logvalue.SignedLogValue` so neither the sign nor
very large/small magnitudes are lost.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, StructuralError, ValidationError
from .logvalue import SignedLogValue

__all__ = ["SkewMatrix", "pfaffian", "congruence_scale", "equilibration_scales"]

SKEW_RTOL = 1e-12
PIVOT_THRESHOLD = 1e-300
EQUILIBRATE_RATIO = 1e8


@dataclass(frozen=True)
class SkewMatrix:
    """Dense skew-symmetric matrix scaled by ``exp(log_scale)``.

    The represented matrix is ``exp(log_scale) * entries``, so its Pfaffian
    is ``exp(order/2 * log_scale) * Pf(entries)``.
    """

    entries: np.ndarray
    log_scale: float = 0.0
    order: int = field(init=False)

    def __post_init__(self):
        a = np.array(self.entries, dtype=float)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise StructuralError(f"skew matrix must be square, got shape {a.shape}")
        if not np.all(np.isfinite(a)):
            raise ValidationError("skew matrix has non-finite entries")
        if np.any(np.diag(a) != 0.0):
            raise ValidationError("skew matrix diagonal must be exactly zero")
        if a.size:
            peak = np.max(np.abs(a))
            if np.max(np.abs(a + a.T)) > SKEW_RTOL * peak:
                raise ValidationError("matrix is not skew-symmetric within tolerance")
        if not math.isfinite(self.log_scale):
            raise ValidationError("log_scale must be finite")
        a.setflags(write=False)
        object.__setattr__(self, "entries", a)
        object.__setattr__(self, "order", a.shape[0])


def congruence_scale(m: SkewMatrix, d) -> SkewMatrix:
    """Return ``D A D`` with ``D = diag(d)``, keeping the Pfaffian unchanged.

    Uses Pf(D A D) = det(D) Pf(A); the ``det(D)`` factor is removed again
    through ``log_scale``.
    """
    d = np.asarray(d, dtype=float)
    if d.shape != (m.order,):
        raise StructuralError(f"need {m.order} scale factors, got shape {d.shape}")
    if np.any(~(d > 0.0)) or not np.all(np.isfinite(d)):
        raise DomainError("congruence scale factors must be positive and finite")
    if m.order == 0:
        return m
    entries = d[:, None] * m.entries * d[None, :]
    log_scale = m.log_scale - 2.0 / m.order * float(np.sum(np.log(d)))
    return SkewMatrix(entries, log_scale)


def equilibration_scales(m: SkewMatrix) -> np.ndarray:
    """Symmetric scales ``1/sqrt(rowmax)`` (1 for all-zero rows)."""
    rowmax = np.max(np.abs(m.entries), axis=1) if m.order else np.zeros(0)
    d = np.ones(m.order)
    nz = rowmax > 0.0
    d[nz] = 1.0 / np.sqrt(rowmax[nz])
    return d


def _needs_equilibration(m: SkewMatrix) -> bool:
    rowmax = np.max(np.abs(m.entries), axis=1)
    nz = rowmax[rowmax > 0.0]
    return nz.size > 1 and math.log(nz.max()) - math.log(nz.min()) > math.log(EQUILIBRATE_RATIO)


def pfaffian(m: SkewMatrix) -> SignedLogValue:
    """Pfaffian of ``m`` as a SignedLogValue.

    Odd orders are rejected (their Pfaffian is identically zero and in this
    package always signals a construction mistake).  The empty matrix has
    Pfaffian 1.
    """
    if not isinstance(m, SkewMatrix):
        m = SkewMatrix(np.asarray(m, dtype=float))
    n = m.order
    if n % 2:
        raise StructuralError(f"Pfaffian requires even order, got {n}")
    if n == 0:
        return SignedLogValue.one()
    if _needs_equilibration(m):
        m = congruence_scale(m, equilibration_scales(m))

    a = np.array(m.entries, dtype=float)
    sign = 1
    log_mag = 0.0
    for k in range(0, n - 1, 2):
        kp = k + 1 + int(np.argmax(np.abs(a[k + 1:, k])))
        if kp != k + 1:
            a[[k + 1, kp], :] = a[[kp, k + 1], :]
            a[:, [k + 1, kp]] = a[:, [kp, k + 1]]
            sign = -sign
        piv = a[k, k + 1]
        if abs(piv) < PIVOT_THRESHOLD:
            return SignedLogValue.zero()
        if piv < 0:
            sign = -sign
        log_mag += math.log(abs(piv))
        if k + 2 < n:
            tau = a[k, k + 2:] / piv
            col = a[k + 2:, k + 1].copy()
            a[k + 2:, k + 2:] += np.outer(tau, col) - np.outer(col, tau)
    return SignedLogValue(sign, log_mag + 0.5 * n * m.log_scale)
