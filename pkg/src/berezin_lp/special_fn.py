"""Log-domain special functions.

Everything downstream (factorials, powers of N, Gaussian moments) is
assembled as a :class:`LogReal` and only exponentiated when a plain float
is actually needed.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

LOG_FLOAT_MAX = math.log(1.7976931348623157e308)
LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)


@dataclass(frozen=True)
class LogReal:
    """A real number stored as ``sign * exp(log_mag)``."""

    sign: int
    log_mag: float = 0.0

    def __post_init__(self):
        if self.sign not in (-1, 0, 1):
            raise ValueError(f"sign must be -1, 0 or 1, got {self.sign!r}")
        if self.sign == 0:
            object.__setattr__(self, "log_mag", -math.inf)

    @classmethod
    def from_float(cls, x: float) -> "LogReal":
        if x == 0:
            return cls(0)
        return cls(1 if x > 0 else -1, math.log(abs(x)))

    @classmethod
    def exp(cls, log_mag: float) -> "LogReal":
        return cls(1, float(log_mag))

    @classmethod
    def one(cls) -> "LogReal":
        return cls(1, 0.0)

    def __mul__(self, other):
        other = _coerce(other)
        if self.sign == 0 or other.sign == 0:
            return LogReal(0)
        return LogReal(self.sign * other.sign, self.log_mag + other.log_mag)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = _coerce(other)
        if other.sign == 0:
            raise ZeroDivisionError("division by a zero LogReal")
        if self.sign == 0:
            return LogReal(0)
        return LogReal(self.sign * other.sign, self.log_mag - other.log_mag)

    def __rtruediv__(self, other):
        return _coerce(other) / self

    def __pow__(self, exponent: float) -> "LogReal":
        if self.sign == 0:
            if exponent > 0:
                return LogReal(0)
            raise ZeroDivisionError("0 raised to a non-positive power")
        if self.sign < 0 and exponent != int(exponent):
            raise ValueError("non-integer power of a negative LogReal")
        sign = self.sign ** int(exponent) if self.sign < 0 else 1
        return LogReal(sign, self.log_mag * exponent)

    def __neg__(self):
        return LogReal(-self.sign, self.log_mag) if self.sign else self

    def __abs__(self):
        return LogReal(abs(self.sign), self.log_mag) if self.sign else self

    def to_float(self) -> float:
        """Exponentiate; raises OverflowError instead of returning inf."""
        if self.sign == 0:
            return 0.0
        if self.log_mag > LOG_FLOAT_MAX:
            raise OverflowError(
                f"LogReal with log magnitude {self.log_mag:.6g} exceeds the float range")
        return self.sign * math.exp(self.log_mag)

    def __float__(self):
        return self.to_float()

    @property
    def log(self) -> float:
        """Natural log of the value (positive values only)."""
        if self.sign <= 0:
            raise ValueError("log of a non-positive LogReal")
        return self.log_mag

    def __repr__(self):
        return f"LogReal(sign={self.sign}, log_mag={self.log_mag!r})"


def _coerce(x) -> LogReal:
    if isinstance(x, LogReal):
        return x
    return LogReal.from_float(float(x))


def product(factors: Iterable[LogReal]) -> LogReal:
    out = LogReal.one()
    for f in factors:
        out = out * f
    return out


def _check_positive(name: str, x: float) -> None:
    if not (x > 0) or math.isnan(x):
        raise ValueError(f"{name} must be > 0, got {x!r}")


def log_gamma(x: float) -> LogReal:
    """ln Gamma(x) for x > 0, wrapped as a positive LogReal."""
    _check_positive("x", x)
    return LogReal(1, math.lgamma(x))


def log_factorial(k: int) -> float:
    if k < 0:
        raise ValueError(f"factorial of negative integer {k}")
    return math.lgamma(k + 1.0)


@dataclass(frozen=True)
class ArtinEnvelope:
    """Two-sided Stirling bound ``lower <= Gamma(x) <= upper`` for x >= 1."""

    x: float
    lower: LogReal
    upper: LogReal

    @property
    def theta(self) -> float:
        """The correction exponent, defined by Gamma(x) = lower * exp(theta/(12x))."""
        return 12.0 * self.x * (math.lgamma(self.x) - self.lower.log_mag)


def artin_envelope(x: float) -> ArtinEnvelope:
    if not x >= 1:
        raise ValueError(f"the envelope is only valid for x >= 1, got {x!r}")
    lower = LOG_SQRT_2PI - 0.5 * math.log(x) + x * (math.log(x) - 1.0)
    return ArtinEnvelope(x, LogReal(1, lower), LogReal(1, lower + 1.0 / (12.0 * x)))


def artin_theta(x: float) -> float:
    return artin_envelope(x).theta


def log_beta(a: float, b: float) -> LogReal:
    _check_positive("a", a)
    _check_positive("b", b)
    return LogReal(1, math.lgamma(a) + math.lgamma(b) - math.lgamma(a + b))


def E_moment(a: float, N: float) -> LogReal:
    """Gaussian moment ``int_C exp(-N|z|^2) |z|^a dz = pi Gamma(a/2+1) / N^(a/2+1)``."""
    if not a >= 0:
        raise ValueError(f"a must be >= 0, got {a!r}")
    if not N >= 1:
        raise ValueError(f"N must be >= 1, got {N!r}")
    h = 0.5 * a + 1.0
    return LogReal(1, math.log(math.pi) + math.lgamma(h) - h * math.log(N))


def log_multinomial(b: int, a: Sequence[int]) -> LogReal:
    """ln of b! / (a_1! ... a_n! (b - |a|)!)."""
    if any(k < 0 for k in a):
        raise ValueError(f"multi-index entries must be >= 0, got {tuple(a)}")
    rest = b - sum(a)
    if rest < 0:
        raise ValueError(f"|a| = {sum(a)} exceeds b = {b}")
    val = log_factorial(b) - log_factorial(rest) - math.fsum(log_factorial(k) for k in a)
    return LogReal(1, val)
