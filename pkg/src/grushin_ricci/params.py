from __future__ import annotations

import math
from dataclasses import dataclass

# The float nearest pi/2 is taken to *be* the right end of the radial domain.
HALF_PI = math.pi / 2


class DomainError(ValueError):
    """Raised when an argument lies outside an operation's domain."""


def check_r(r: float) -> float:
    r = float(r)
    if not (0.0 <= r <= HALF_PI):
        raise DomainError(f"r={r!r} outside [0, pi/2]")
    return r


def check_lambda(lam: float) -> float:
    lam = float(lam)
    if not (lam >= 1.0) or math.isinf(lam):
        raise DomainError(f"lambda={lam!r} must be a finite real >= 1")
    return lam


def sincos(r: float) -> tuple[float, float]:
    """sin and cos of r with the domain ends snapped to their exact values."""
    if r == 0.0:
        return 0.0, 1.0
    if r == HALF_PI:
        return 1.0, 0.0
    return math.sin(r), math.cos(r)


@dataclass(frozen=True)
class WarpParams:
    """The triple (lambda, m, n) indexing the metric family g_lambda."""

    lam: float
    m: int
    n: int

    def __post_init__(self):
        check_lambda(self.lam)
        if int(self.m) != self.m or self.m < 1:
            raise DomainError(f"m={self.m!r} must be an integer >= 1")
        if int(self.n) != self.n or self.n < 2:
            raise DomainError(f"n={self.n!r} must be an integer >= 2")
        object.__setattr__(self, "lam", float(self.lam))
        object.__setattr__(self, "m", int(self.m))
        object.__setattr__(self, "n", int(self.n))
