import math

import mpmath
import numpy as np
import pytest

from grushin_ricci import forms
from grushin_ricci.certify import EXPRESSIONS, _box_args, _jet_eval, interval_eval
from grushin_ricci.interval import Interval, cos_box, sin_box
from grushin_ricci.params import HALF_PI, DomainError

mpmath.mp.dps = 50


@pytest.fixture
def mp_sqrt(monkeypatch):
    plain = forms.xsqrt
    monkeypatch.setattr(forms, "xsqrt",
                        lambda x: mpmath.sqrt(x) if isinstance(x, mpmath.mpf) else plain(x))


def exact(expr_id, r, lam, m, n):
    """50-digit value of an expression at the float r (HALF_PI read as pi/2)."""
    if r == HALF_PI:
        s, c = mpmath.mpf(1), mpmath.mpf(0)
    else:
        s, c = mpmath.sin(mpmath.mpf(r)), mpmath.cos(mpmath.mpf(r))
    L = mpmath.mpf(lam)
    return EXPRESSIONS[expr_id](s * s, c * c, c, L * L, m, n)


def random_box(rng):
    kind = rng.integers(4)
    if kind == 0:
        a, b = sorted(rng.uniform(0, HALF_PI, 2))
    elif kind == 1:
        a = rng.uniform(0, HALF_PI)
        b = min(HALF_PI, a + 10.0 ** rng.uniform(-14, -4))
    elif kind == 2:
        a, b = 0.0, 10.0 ** rng.uniform(-12, 0)
    else:
        a, b = HALF_PI - 10.0 ** rng.uniform(-12, 0), HALF_PI
    return float(a), float(b)


def test_soundness_random_triples(mp_sqrt):
    rng = np.random.default_rng(2024)
    ids = sorted(EXPRESSIONS)
    violations = []
    for trial in range(10_000):
        eid = ids[trial % len(ids)]
        a, b = random_box(rng)
        lam = 1.0 if rng.random() < 0.2 else float(10.0 ** rng.uniform(0, 3))
        m, n = int(rng.integers(1, 20)), int(rng.integers(2, 6))
        r = float(rng.choice([a, b, rng.uniform(a, b)]))
        # depth 0 is the raw enclosure the certifier uses; every tenth box also checks the pieces
        enc = interval_eval(eid, Interval(a, b), lam, m, n, pieces_depth=6 if trial % 10 == 0 else 0)
        v = exact(eid, r, lam, m, n)
        if not (mpmath.mpf(enc.lo) <= v <= mpmath.mpf(enc.hi)):
            violations.append((eid, a, b, r, lam, m, n))
    assert violations == []


def test_derivative_enclosures_contain_slopes(mp_sqrt):
    # the branch-and-bound derivative is taken in t = sin^2 r
    rng = np.random.default_rng(5)
    for trial in range(500):
        eid = sorted(EXPRESSIONS)[trial % len(EXPRESSIONS)]
        a, b = sorted(float(x) for x in rng.uniform(0.01, HALF_PI - 0.01, 2))
        lam, m, n = float(10 ** rng.uniform(0, 2)), int(rng.integers(1, 20)), int(rng.integers(2, 6))
        jet = _jet_eval(EXPRESSIONS[eid], a, b, lam, m, n)
        x = mpmath.mpf(rng.uniform(a, b))
        h = mpmath.mpf(10) ** -20
        t0 = mpmath.sin(x) ** 2

        def val(t):
            c2 = 1 - t
            return EXPRESSIONS[eid](t, c2, mpmath.sqrt(c2), mpmath.mpf(lam) ** 2, m, n)

        slope = (val(t0 + h) - val(t0 - h)) / (2 * h)
        assert mpmath.mpf(jet.d.lo) - 1e-12 <= slope <= mpmath.mpf(jet.d.hi) + 1e-12, eid


def test_examples():
    e = interval_eval("neg_fpp_over_f", Interval(0.0), 1.0, 8, 2)
    assert e.contains(2.5) and e.width <= 1e-12
    e = interval_eval("fprime", Interval(0.0, HALF_PI), 1.0, 8, 2)
    assert -1e-12 <= e.lo and e.hi <= 1 + 1e-12
    e = interval_eval("A", Interval(0.0, HALF_PI), 2.0, 8, 2)
    assert e.lo <= 1.0 and e.hi >= 4.0 and e.width <= 3 + 1e-12
    with pytest.raises(DomainError):
        interval_eval("nope", Interval(0.0), 1.0, 8, 2)
    with pytest.raises(DomainError):
        interval_eval("A", Interval(-0.1, 0.2), 1.0, 8, 2)


def test_monotone_refinement():
    rng = np.random.default_rng(11)
    for trial in range(300):
        eid = sorted(EXPRESSIONS)[trial % len(EXPRESSIONS)]
        a, b = random_box(rng)
        mid = 0.5 * a + 0.5 * b
        parent = interval_eval(eid, Interval(a, b), 3.0, 8, 2)
        for lo, hi in ((a, mid), (mid, b)):
            child = interval_eval(eid, Interval(lo, hi), 3.0, 8, 2)
            slack = 1e-12 * max(1.0, abs(parent.lo), abs(parent.hi))
            assert parent.lo - slack <= child.lo and child.hi <= parent.hi + slack


def test_exact_operations_stay_exact():
    assert (Interval(0.5) + Interval(0.25)).width == 0.0
    assert (Interval(3.0) * Interval(0.5)).width == 0.0
    x = Interval(0.1) + Interval(0.2)
    assert x.lo < 0.30000000000000004 <= x.hi or x.lo <= 0.3 <= x.hi
    assert x.width > 0.0
    assert Interval(4.0).sqrt() == Interval(2.0)


def test_basic_operations_enclose():
    rng = np.random.default_rng(3)
    for _ in range(2000):
        a, b = sorted(rng.normal(size=2))
        c, d = sorted(rng.normal(size=2))
        X, Y = Interval(a, b), Interval(c, d)
        x, y = mpmath.mpf(rng.uniform(a, b)), mpmath.mpf(rng.uniform(c, d))
        for got, want in ((X + Y, x + y), (X - Y, x - y), (X * Y, x * y), (X.sqr(), x * x)):
            assert mpmath.mpf(got.lo) <= want <= mpmath.mpf(got.hi)
        if c > 0:
            q = X / Y
            assert mpmath.mpf(q.lo) <= x / y <= mpmath.mpf(q.hi)
        if a > 0:
            s = X.sqrt()
            assert mpmath.mpf(s.lo) <= mpmath.sqrt(x) <= mpmath.mpf(s.hi)


def test_trig_boxes():
    rng = np.random.default_rng(4)
    for _ in range(2000):
        a, b = sorted(float(x) for x in rng.uniform(0, HALF_PI, 2))
        x = mpmath.mpf(rng.uniform(a, b))
        S, C = sin_box(a, b), cos_box(a, b)
        assert mpmath.mpf(S.lo) <= mpmath.sin(x) <= mpmath.mpf(S.hi)
        assert mpmath.mpf(C.lo) <= mpmath.cos(x) <= mpmath.mpf(C.hi)
    assert sin_box(HALF_PI, HALF_PI) == Interval(1.0)
    assert cos_box(HALF_PI, HALF_PI) == Interval(0.0)
    assert sin_box(0.0, 0.0) == Interval(0.0)


def test_invalid_interval():
    with pytest.raises(ValueError):
        Interval(1.0, 0.0)
    with pytest.raises(ValueError):
        Interval(math.nan)


def test_box_args_consistent():
    T, C2, C, L2 = _box_args(0.3, 0.4, 2.0)
    assert T.contains(math.sin(0.35) ** 2) and C2.contains(math.cos(0.35) ** 2)
    assert L2 == Interval(4.0)
