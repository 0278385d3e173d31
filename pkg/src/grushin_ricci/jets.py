"""Second-order forward-mode differentiation.

Used as an independent oracle: derivatives of the warping functions are
propagated through their *defining* formulas, never through the simplified
closed forms in :mod:`grushin_ricci.kernel`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from numbers import Real

from .params import HALF_PI, DomainError, check_lambda, check_r


@dataclass(frozen=True)
class Jet2:
    """A quantity with its first and second derivatives in r."""

    value: float
    d1: float = 0.0
    d2: float = 0.0

    @staticmethod
    def var(x: float) -> "Jet2":
        return Jet2(float(x), 1.0, 0.0)

    @staticmethod
    def _lift(x) -> "Jet2":
        if isinstance(x, Jet2):
            return x
        if isinstance(x, Real):
            return Jet2(float(x))
        raise TypeError(f"cannot lift {type(x).__name__} to Jet2")

    def __add__(self, o):
        o = Jet2._lift(o)
        return Jet2(self.value + o.value, self.d1 + o.d1, self.d2 + o.d2)

    __radd__ = __add__

    def __neg__(self):
        return Jet2(-self.value, -self.d1, -self.d2)

    def __sub__(self, o):
        return self + (-Jet2._lift(o))

    def __rsub__(self, o):
        return Jet2._lift(o) - self

    def __mul__(self, o):
        o = Jet2._lift(o)
        return Jet2(
            self.value * o.value,
            self.d1 * o.value + self.value * o.d1,
            self.d2 * o.value + 2.0 * self.d1 * o.d1 + self.value * o.d2,
        )

    __rmul__ = __mul__

    def _chain(self, g0: float, g1: float, g2: float) -> "Jet2":
        # composition g(self) given g, g', g'' at self.value
        return Jet2(g0, g1 * self.d1, g2 * self.d1 * self.d1 + g1 * self.d2)

    def recip(self) -> "Jet2":
        v = self.value
        if v == 0.0:
            raise ZeroDivisionError("Jet2 reciprocal of zero value")
        return self._chain(1.0 / v, -1.0 / v**2, 2.0 / v**3)

    def __truediv__(self, o):
        return self * Jet2._lift(o).recip()

    def __rtruediv__(self, o):
        return Jet2._lift(o) * self.recip()

    def __pow__(self, p: float):
        v = self.value
        if v <= 0.0 and p != int(p):
            raise DomainError("fractional power of a non-positive Jet2")
        return self._chain(v**p, p * v ** (p - 1), p * (p - 1) * v ** (p - 2))

    def sin(self) -> "Jet2":
        s, c = math.sin(self.value), math.cos(self.value)
        return self._chain(s, c, -s)

    def cos(self) -> "Jet2":
        s, c = math.sin(self.value), math.cos(self.value)
        return self._chain(c, -s, -c)

    def tan(self) -> "Jet2":
        t = math.tan(self.value)
        sec2 = 1.0 + t * t
        return self._chain(t, sec2, 2.0 * t * sec2)


def warp_f_formula(x, lam: float):
    """f = sin r / (1 + lam^2 sin^2 r)^(1/4), generic over Jet2."""
    s = x.sin()
    return s * (1.0 + lam * lam * s * s) ** (-0.25)


def warp_h_formula(x, lam: float):
    """h = (1/lam^2 + tan^2 r)^(-1/2), generic over Jet2."""
    t = x.tan()
    return (1.0 / (lam * lam) + t * t) ** (-0.5)


def jet2_eval(which: str, r: float, lam: float) -> Jet2:
    """Value, first and second r-derivative of warp f or h at r."""
    r = check_r(r)
    lam = check_lambda(lam)
    x = Jet2.var(r)
    if which == "f":
        return warp_f_formula(x, lam)
    if which == "h":
        if r == HALF_PI:
            raise DomainError("h via tan is undefined at r = pi/2; use a one-sided offset")
        return warp_h_formula(x, lam)
    raise ValueError(f"unknown warping function {which!r}")


def oracle_ratios(r: float, lam: float) -> dict[str, float]:
    """Curvature ratios assembled from Jet2 derivatives (interior r only)."""
    f = jet2_eval("f", r, lam)
    h = jet2_eval("h", r, lam)
    return {
        "fprime": f.d1,
        "neg_fpp_over_f": -f.d2 / f.value,
        "neg_fphp_over_fh": -f.d1 * h.d1 / (f.value * h.value),
        "neg_hpp_over_h": -h.d2 / h.value,
        "one_minus_hp2_over_h2": (1.0 - h.d1 ** 2) / h.value ** 2,
        "one_minus_fp2_over_f2": (1.0 - f.d1 ** 2) / f.value ** 2,
    }
