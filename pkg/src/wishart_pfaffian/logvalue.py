"""Signed values stored as (sign, log|x|) to survive overflow and underflow."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable

__all__ = ["SignedLogValue", "signed_logsumexp"]


@dataclass(frozen=True)
class SignedLogValue:
    """The real number ``sign * exp(log_mag)``.

    ``sign`` is one of -1, 0, +1.  Zero is stored with ``log_mag == 0``.
    """

    sign: int
    log_mag: float = 0.0

    def __post_init__(self):
        if self.sign not in (-1, 0, 1):
            raise ValueError(f"sign must be -1, 0 or +1, got {self.sign!r}")
        if self.sign == 0:
            object.__setattr__(self, "log_mag", 0.0)
        elif math.isnan(self.log_mag):
            raise ValueError("log_mag is NaN")
        elif self.log_mag == -math.inf:
            object.__setattr__(self, "sign", 0)
            object.__setattr__(self, "log_mag", 0.0)

    @classmethod
    def zero(cls) -> SignedLogValue:
        return cls(0, 0.0)

    @classmethod
    def one(cls) -> SignedLogValue:
        return cls(1, 0.0)

    @classmethod
    def from_float(cls, x: float) -> SignedLogValue:
        x = float(x)
        if math.isnan(x):
            raise ValueError("cannot represent NaN")
        if x == 0.0:
            return cls.zero()
        return cls(1 if x > 0 else -1, math.log(abs(x)))

    @property
    def is_zero(self) -> bool:
        return self.sign == 0

    def to_float(self) -> float:
        """Convert to a float; saturates to +-inf and flushes to 0."""
        if self.sign == 0:
            return 0.0
        if self.log_mag > 709.78:
            return self.sign * math.inf
        return self.sign * math.exp(self.log_mag)

    def __float__(self) -> float:
        return self.to_float()

    def scaled(self, log_factor: float) -> SignedLogValue:
        """Multiply by ``exp(log_factor)``."""
        if self.sign == 0:
            return self
        return SignedLogValue(self.sign, self.log_mag + log_factor)

    def __neg__(self) -> SignedLogValue:
        return SignedLogValue(-self.sign, self.log_mag)

    def __mul__(self, other) -> SignedLogValue:
        if not isinstance(other, SignedLogValue):
            other = SignedLogValue.from_float(other)
        if self.sign == 0 or other.sign == 0:
            return SignedLogValue.zero()
        return SignedLogValue(self.sign * other.sign, self.log_mag + other.log_mag)

    __rmul__ = __mul__

    def __truediv__(self, other) -> SignedLogValue:
        if not isinstance(other, SignedLogValue):
            other = SignedLogValue.from_float(other)
        if other.sign == 0:
            raise ZeroDivisionError("division by a zero SignedLogValue")
        if self.sign == 0:
            return self
        return SignedLogValue(self.sign * other.sign, self.log_mag - other.log_mag)

    def __add__(self, other) -> SignedLogValue:
        if not isinstance(other, SignedLogValue):
            other = SignedLogValue.from_float(other)
        return signed_logsumexp((self, other))

    __radd__ = __add__

    def __sub__(self, other) -> SignedLogValue:
        if not isinstance(other, SignedLogValue):
            other = SignedLogValue.from_float(other)
        return signed_logsumexp((self, -other))


def signed_logsumexp(values: Iterable[SignedLogValue]) -> SignedLogValue:
    """Sum signed log-values without leaving the log domain.

    Positive and negative parts are accumulated separately relative to the
    largest magnitude, then combined once.  Exact cancellation gives zero.
    """
    items = [v for v in values if v.sign != 0]
    if not items:
        return SignedLogValue.zero()
    peak = max(v.log_mag for v in items)
    pos = math.fsum(math.exp(v.log_mag - peak) for v in items if v.sign > 0)
    neg = math.fsum(math.exp(v.log_mag - peak) for v in items if v.sign < 0)
    diff = pos - neg
    if diff == 0.0:
        return SignedLogValue.zero()
    return SignedLogValue(1 if diff > 0 else -1, peak + math.log(abs(diff)))
