"""Outward-rounded interval arithmetic.

Every operation returns an enclosure of the exact image.  Results are widened
by one unit in the last place in each direction unless the floating-point
operation was provably exact (checked with error-free transformations), so a
zero-width input that stays exactly representable yields a zero-width output.
"""

from __future__ import annotations

import math
from numbers import Real

from .params import HALF_PI

_INF = math.inf
_SPLITTER = 134217729.0  # 2**27 + 1
_TINY = 2.0 ** -900
_HUGE = 2.0 ** 990


def _two_sum_err(a: float, b: float, s: float) -> float:
    bb = s - a
    return (a - (s - bb)) + (b - bb)


def _split(a: float) -> tuple[float, float]:
    t = _SPLITTER * a
    hi = t - (t - a)
    return hi, a - hi


def _two_prod_err(a: float, b: float, p: float) -> float:
    ah, al = _split(a)
    bh, bl = _split(b)
    return ((ah * bh - p) + ah * bl + al * bh) + al * bl


def _safe(x: float) -> bool:
    ax = abs(x)
    return ax == 0.0 or _TINY < ax < _HUGE


def _down(x: float) -> float:
    return math.nextafter(x, -_INF)


def _up(x: float) -> float:
    return math.nextafter(x, _INF)


def _round_add(a: float, b: float) -> tuple[float, float]:
    s = a + b
    if math.isinf(s) or math.isnan(s):
        return s, s
    if _safe(a) and _safe(b) and _safe(s) and _two_sum_err(a, b, s) == 0.0:
        return s, s
    return _down(s), _up(s)


def _mul_exact(a: float, b: float, p: float) -> bool:
    if a == 0.0 or b == 0.0:
        return True
    return _safe(a) and _safe(b) and _safe(p) and _two_prod_err(a, b, p) == 0.0


def _prod(a: float, b: float) -> float:
    p = a * b
    return 0.0 if math.isnan(p) else p  # 0 * inf is taken as 0


class Interval:
    """Closed interval [lo, hi] of reals."""

    __slots__ = ("lo", "hi")

    def __init__(self, lo: float, hi: float | None = None):
        lo = float(lo)
        hi = lo if hi is None else float(hi)
        if math.isnan(lo) or math.isnan(hi) or lo > hi:
            raise ValueError(f"invalid interval [{lo}, {hi}]")
        self.lo = lo
        self.hi = hi

    @staticmethod
    def lift(x) -> "Interval":
        if isinstance(x, Interval):
            return x
        if isinstance(x, Real):
            return Interval(float(x))
        return NotImplemented

    # -- queries -------------------------------------------------------
    @property
    def width(self) -> float:
        return self.hi - self.lo

    @property
    def mid(self) -> float:
        return 0.5 * self.lo + 0.5 * self.hi

    def contains(self, x: float) -> bool:
        return self.lo <= x <= self.hi

    def subset_of(self, other: "Interval") -> bool:
        return other.lo <= self.lo and self.hi <= other.hi

    def intersect(self, other: "Interval") -> "Interval":
        lo, hi = max(self.lo, other.lo), min(self.hi, other.hi)
        if lo > hi:
            raise ValueError("empty intersection")
        return Interval(lo, hi)

    def hull(self, other: "Interval") -> "Interval":
        return Interval(min(self.lo, other.lo), max(self.hi, other.hi))

    def __eq__(self, other):
        return isinstance(other, Interval) and self.lo == other.lo and self.hi == other.hi

    def __hash__(self):
        return hash((self.lo, self.hi))

    def __repr__(self):
        return f"Interval({self.lo!r}, {self.hi!r})"

    # -- arithmetic ----------------------------------------------------
    def __neg__(self):
        return Interval(-self.hi, -self.lo)

    def __add__(self, other):
        other = Interval.lift(other)
        if other is NotImplemented:
            return other
        lo = _round_add(self.lo, other.lo)[0]
        hi = _round_add(self.hi, other.hi)[1]
        return Interval(lo, hi)

    __radd__ = __add__

    def __sub__(self, other):
        other = Interval.lift(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return Interval.lift(other) - self

    def __mul__(self, other):
        other = Interval.lift(other)
        if other is NotImplemented:
            return other
        los, his = [], []
        for a in (self.lo, self.hi):
            for b in (other.lo, other.hi):
                p = _prod(a, b)
                if math.isinf(p) or _mul_exact(a, b, p):
                    los.append(p)
                    his.append(p)
                else:
                    los.append(_down(p))
                    his.append(_up(p))
        return Interval(min(los), max(his))

    __rmul__ = __mul__

    def _recip(self) -> "Interval":
        lo, hi = self.lo, self.hi
        if lo > 0.0 or hi < 0.0:
            cands = []
            for x in (lo, hi):
                q = 1.0 / x
                p = q * x
                exact = _safe(q) and _safe(x) and p == 1.0 and _two_prod_err(q, x, p) == 0.0
                cands.append((q, q) if exact else (_down(q), _up(q)))
            return Interval(min(c[0] for c in cands), max(c[1] for c in cands))
        if lo == 0.0 and hi > 0.0:
            q = 1.0 / hi
            return Interval(_down(q), _INF)
        if hi == 0.0 and lo < 0.0:
            q = 1.0 / lo
            return Interval(-_INF, _up(q))
        return Interval(-_INF, _INF)

    def __truediv__(self, other):
        other = Interval.lift(other)
        if other is NotImplemented:
            return other
        if other.lo == other.hi and other.lo != 0.0:
            # point divisor: divide each endpoint directly (tighter than 1/x)
            y = other.lo
            vals = []
            for x in (self.lo, self.hi):
                q = x / y
                p = q * y
                if math.isinf(q) or x == 0.0 or (
                    _safe(x) and _safe(y) and _safe(q) and p == x and _two_prod_err(q, y, p) == 0.0
                ):
                    vals.append((q, q))
                else:
                    vals.append((_down(q), _up(q)))
            return Interval(min(v[0] for v in vals), max(v[1] for v in vals))
        return self * other._recip()

    def __rtruediv__(self, other):
        return Interval.lift(other) / self

    def sqr(self) -> "Interval":
        """Square with the dependency removed (x*x would allow negatives)."""
        lo, hi = self.lo, self.hi
        if lo >= 0.0:
            a, b = lo, hi
        elif hi <= 0.0:
            a, b = -hi, -lo
        else:
            a, b = 0.0, max(-lo, hi)
        r = Interval(a) * Interval(a)
        s = Interval(b) * Interval(b)
        return Interval(max(r.lo, 0.0), s.hi)

    def sqrt(self) -> "Interval":
        if self.hi < 0.0:
            raise ValueError("sqrt of negative interval")
        out = []
        for x in (max(self.lo, 0.0), self.hi):
            s = math.sqrt(x)
            if math.isinf(s) or s == 0.0 or (_safe(s) and s * s == x and _two_prod_err(s, s, s * s) == 0.0):
                out.append((s, s))
            else:
                out.append((max(_down(s), 0.0), _up(s)))
        return Interval(out[0][0], out[1][1])

    def __pow__(self, k: int):
        if not isinstance(k, int) or k < 0:
            return NotImplemented
        if k == 0:
            return Interval(1.0)
        if k % 2 == 0:
            return self.sqr() ** (k // 2)
        return self * self ** (k - 1)


def _inflate(x: float, ulps: int, direction: float) -> float:
    for _ in range(ulps):
        x = math.nextafter(x, direction)
    return x


# libm sin/cos are within one ulp on this range; two ulps of slack is kept.
_TRIG_ULPS = 2


def sin_box(a: float, b: float) -> Interval:
    """Enclosure of sin over [a, b] within [0, pi/2]; b == HALF_PI means exact pi/2."""
    lo = 0.0 if a == 0.0 else max(0.0, _inflate(math.sin(a), _TRIG_ULPS, -_INF))
    if b == HALF_PI:
        hi = 1.0
    elif b == 0.0:
        hi = 0.0
    else:
        hi = min(1.0, _inflate(math.sin(b), _TRIG_ULPS, _INF))
    if a == HALF_PI:
        lo = 1.0
    return Interval(lo, hi)


def cos_box(a: float, b: float) -> Interval:
    """Enclosure of cos over [a, b] within [0, pi/2]; b == HALF_PI means exact pi/2."""
    if b == HALF_PI:
        lo = 0.0
    elif b == 0.0:
        lo = 1.0
    else:
        lo = max(0.0, _inflate(math.cos(b), _TRIG_ULPS, -_INF))
    if a == 0.0:
        hi = 1.0
    elif a == HALF_PI:
        hi = 0.0
    else:
        hi = min(1.0, _inflate(math.cos(a), _TRIG_ULPS, _INF))
    return Interval(lo, hi)


class IJet:
    """Interval value together with an interval enclosure of its derivative."""

    __slots__ = ("v", "d")

    def __init__(self, v: Interval, d: Interval):
        self.v = v
        self.d = d

    @staticmethod
    def const(x) -> "IJet":
        return IJet(Interval.lift(x), Interval(0.0))

    @staticmethod
    def _lift(x) -> "IJet":
        return x if isinstance(x, IJet) else IJet.const(x)

    def __neg__(self):
        return IJet(-self.v, -self.d)

    def __add__(self, o):
        o = IJet._lift(o)
        return IJet(self.v + o.v, self.d + o.d)

    __radd__ = __add__

    def __sub__(self, o):
        o = IJet._lift(o)
        return IJet(self.v - o.v, self.d - o.d)

    def __rsub__(self, o):
        return IJet._lift(o) - self

    def __mul__(self, o):
        o = IJet._lift(o)
        return IJet(self.v * o.v, self.d * o.v + self.v * o.d)

    __rmul__ = __mul__

    def __truediv__(self, o):
        o = IJet._lift(o)
        q = self.v / o.v
        return IJet(q, (self.d - q * o.d) / o.v)

    def __rtruediv__(self, o):
        return IJet._lift(o) / self

    def sqr(self) -> "IJet":
        return IJet(self.v.sqr(), 2 * self.v * self.d)

    def sqrt(self) -> "IJet":
        s = self.v.sqrt()
        return IJet(s, self.d / (2 * s))

    def __pow__(self, k: int):
        if k == 0:
            return IJet.const(1.0)
        if k % 2 == 0:
            return self.sqr() ** (k // 2)
        return self * self ** (k - 1)


def xsqrt(x):
    """sqrt dispatching over floats, Interval and IJet."""
    if isinstance(x, (Interval, IJet)):
        return x.sqrt()
    return math.sqrt(x)


def lower(x) -> float:
    """Lower bound of a float, Interval or IJet value."""
    if isinstance(x, IJet):
        return x.v.lo
    if isinstance(x, Interval):
        return x.lo
    return float(x)
