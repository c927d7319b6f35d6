"""Real Wishart model W = A^T A with A an M x K Gaussian matrix, Sigma = rho I.

Everything overflow-prone is assembled in the log domain and exponentiated
once at the end.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ParameterError, ValidationError
from .logvalue import SignedLogValue
from .special import log_multivariate_gamma

__all__ = [
    "ModelParams",
    "KernelIndex",
    "log_norm_constant",
    "xi",
    "exponent_r",
    "theta",
    "vandermonde_det",
    "joint_density",
]


@dataclass(frozen=True)
class ModelParams:
    """Matrix order ``K``, degrees of freedom ``M`` and scale ``rho``.

    Only the full-rank regime ``K < M`` is supported.
    """

    K: int
    M: int
    rho: float = 1.0

    def __post_init__(self):
        for name in ("K", "M"):
            v = getattr(self, name)
            if isinstance(v, bool) or int(v) != v:
                raise ParameterError(f"{name} must be an integer, got {v!r}")
            object.__setattr__(self, name, int(v))
        if self.K < 1:
            raise ParameterError(f"K must be >= 1, got {self.K}")
        if not self.K < self.M:
            raise ParameterError(f"the model requires K < M (full rank), got K={self.K}, M={self.M}")
        rho = float(self.rho)
        if not (rho > 0.0 and math.isfinite(rho)):
            raise ParameterError(f"rho must be positive and finite, got {self.rho!r}")
        object.__setattr__(self, "rho", rho)

    @property
    def xi_power(self) -> float:
        """Exponent (M-K-1)/2 of lambda in the weight xi."""
        return (self.M - self.K - 1) / 2.0

    @property
    def gamma_shape_offset(self) -> float:
        """(M-K+1)/2; kernel gamma shapes are this plus an integer power."""
        return (self.M - self.K + 1) / 2.0

    def as_dict(self) -> dict:
        return {"K": self.K, "M": self.M, "rho": self.rho}


@dataclass(frozen=True)
class KernelIndex:
    """Expansion term ``n`` in [1, K] and kernel row ``i`` in [1, K-1]."""

    n: int
    i: int
    K: int

    def __post_init__(self):
        if not 1 <= self.n <= self.K:
            raise ValueError(f"n must lie in [1, {self.K}], got {self.n}")
        if not 1 <= self.i <= self.K - 1:
            raise ValueError(f"i must lie in [1, {self.K - 1}], got {self.i}")


def log_norm_constant(p: ModelParams) -> SignedLogValue:
    K, M = p.K, p.M
    log_c = (
        K * K / 2.0 * math.log(math.pi)
        - K * M / 2.0 * math.log(2.0 * p.rho)
        - log_multivariate_gamma(K, M / 2.0)
        - log_multivariate_gamma(K, K / 2.0)
    )
    return SignedLogValue(1, log_c)


def _log_power(lam: float, power: float) -> SignedLogValue:
    # lam**power with 0**0 == 1
    if lam == 0.0:
        return SignedLogValue.one() if power == 0 else SignedLogValue.zero()
    return SignedLogValue(1, power * math.log(lam))


def _weighted_power(power: float, lam: float, p: ModelParams) -> SignedLogValue:
    """lam^power * xi(lam); shared by xi (power 0) and theta."""
    lam = float(lam)
    if lam < 0.0:
        raise ValueError(f"lambda must be >= 0, got {lam}")
    return _log_power(lam, power + p.xi_power).scaled(-lam / (2.0 * p.rho))


def xi(lam: float, p: ModelParams) -> SignedLogValue:
    """Eigenvalue weight lam^{(M-K-1)/2} exp(-lam / 2 rho)."""
    return _weighted_power(0, lam, p)


def exponent_r(n: int, i: int, K: int) -> int:
    """Power of lambda left in column ``i`` after deleting Vandermonde column ``n``."""
    if not 1 <= n <= K:
        raise ValueError(f"n must lie in [1, {K}], got {n}")
    if not 1 <= i <= K - 1:
        raise ValueError(f"i must lie in [1, {K - 1}], got {i}")
    return K - i if i < n else K - 1 - i


def theta(idx: KernelIndex, lam: float, p: ModelParams) -> SignedLogValue:
    if idx.K != p.K:
        raise ValueError("KernelIndex and ModelParams disagree on K")
    return _weighted_power(exponent_r(idx.n, idx.i, p.K), lam, p)


def vandermonde_det(lambdas) -> float:
    """prod_{i<j} (lambda_i - lambda_j)."""
    lam = np.asarray(lambdas, dtype=float).ravel()
    out = 1.0
    for i in range(lam.size):
        for j in range(i + 1, lam.size):
            out *= lam[i] - lam[j]
    return float(out)


def joint_density(lambdas, p: ModelParams) -> float:
    """Joint density of the ordered eigenvalues at ``lambdas``.

    ``lambdas`` must be strictly descending (exact comparison) with the last
    entry >= 0; permutations are rejected, never symmetrized.
    """
    lam = np.asarray(lambdas, dtype=float).ravel()
    if lam.size != p.K:
        raise ValidationError(f"expected {p.K} eigenvalues, got {lam.size}")
    if np.any(np.diff(lam) >= 0.0):
        raise ValidationError("eigenvalues must be strictly descending")
    if lam[-1] < 0.0:
        raise ValidationError("eigenvalues must be nonnegative")
    total = log_norm_constant(p)
    for i in range(p.K):
        total = total * xi(lam[i], p)
        for j in range(i + 1, p.K):
            total = total.scaled(math.log(lam[i] - lam[j]))
    return total.to_float()
