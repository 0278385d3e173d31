import math

import numpy as np
import pytest

from grushin_ricci import kernel as k
from grushin_ricci.jets import Jet2, jet2_eval, oracle_ratios, warp_f_formula, warp_h_formula
from grushin_ricci.params import HALF_PI, DomainError

GRID = np.linspace(0.0, HALF_PI, 1000)
GRID[-1] = HALF_PI
INTERIOR = GRID[1:-1]


@pytest.mark.parametrize("r, lam, expected", [
    (0.0, 1.0, 0.0),
    (HALF_PI, 1.0, 2 ** -0.25),
    (HALF_PI, 2.0, 5 ** -0.25),
])
def test_warp_f_examples(r, lam, expected):
    assert k.warp_f(r, lam) == pytest.approx(expected, abs=1e-15)


@pytest.mark.parametrize("r, lam, expected", [
    (HALF_PI, 7.0, 0.0),
    (0.0, 3.0, 3.0),
    (math.pi / 4, 1.0, 2 ** -0.5),
])
def test_warp_h_examples(r, lam, expected):
    assert k.warp_h(r, lam) == pytest.approx(expected, abs=1e-15)


@pytest.mark.parametrize("r, lam, expected", [
    (0.0, 5.0, (1.0, 1.0)),
    (HALF_PI, 2.0, (4.0, 5.0)),
    (math.pi / 4, 1.0, (1.0, 1.5)),
])
def test_aux_AB_examples(r, lam, expected):
    assert k.aux_AB(r, lam) == pytest.approx(expected, abs=1e-15)


def test_fprime_examples():
    assert k.fprime(0.0, 3.0) == 1.0
    assert k.fprime(0.0, 250.0) == 1.0
    assert k.fprime(HALF_PI, 3.0) == 0.0
    # cos(pi/4) (5/2) / (2 (3/2)^(5/4)), evaluated independently
    assert k.fprime(math.pi / 4, 1.0) == pytest.approx(0.5324525868718938, abs=1e-14)
    assert jet2_eval("f", math.pi / 4, 1.0).d1 == pytest.approx(k.fprime(math.pi / 4, 1.0), abs=1e-10)


@pytest.mark.parametrize("name, r, lam, expected", [
    ("neg_fpp_over_f", 0.0, 1.0, 2.5),
    ("neg_fpp_over_f", HALF_PI, 1.0, 0.75),
    ("neg_fpp_over_f", 0.0, 2.0, 7.0),
    ("neg_fphp_over_fh", 0.0, 1.0, 1.0),
    ("neg_fphp_over_fh", HALF_PI, 1.0, 0.75),
    ("neg_fphp_over_fh", HALF_PI, 2.0, 0.6),
    ("neg_hpp_over_h", 0.0, 1.0, 1.0),
    ("neg_hpp_over_h", HALF_PI, 2.0, -1.25),
    ("neg_hpp_over_h", HALF_PI, 1.0, 1.0),
    ("one_minus_hp2_over_h2", 0.0, 1.0, 1.0),
    ("one_minus_fp2_over_f2", HALF_PI, 1.0, math.sqrt(2.0)),
])
def test_ratio_examples(name, r, lam, expected):
    assert k.RATIOS[name](r, lam) == pytest.approx(expected, abs=1e-14)


def test_singular_ratios_match_oracle_near_ends():
    assert k.ratio_one_minus_hp2_over_h2(math.pi / 4, 1.0) == pytest.approx(
        oracle_ratios(math.pi / 4, 1.0)["one_minus_hp2_over_h2"], abs=1e-10)
    assert k.ratio_one_minus_hp2_over_h2(HALF_PI, 1.0) == pytest.approx(
        oracle_ratios(HALF_PI - 1e-4, 1.0)["one_minus_hp2_over_h2"], abs=1e-6)
    assert k.ratio_one_minus_fp2_over_f2(math.pi / 4, 1.0) == pytest.approx(
        oracle_ratios(math.pi / 4, 1.0)["one_minus_fp2_over_f2"], abs=1e-10)
    assert k.ratio_one_minus_fp2_over_f2(1e-6, 1.0) == pytest.approx(
        oracle_ratios(1e-3, 1.0)["one_minus_fp2_over_f2"], abs=1e-5)
    # the rewritten form is smooth through 0; compare the exact end with a nearby interior value
    assert k.ratio_one_minus_fp2_over_f2(0.0, 1.0) == pytest.approx(k.ratio_one_minus_fp2_over_f2(1e-6, 1.0), abs=1e-9)


@pytest.mark.parametrize("lam", [1.0, 2.0, 10.0])
def test_closed_forms_match_jet_oracle_on_grid(lam):
    for r in INTERIOR:
        r = float(r)
        assert abs(k.fprime(r, lam) - jet2_eval("f", r, lam).d1) <= 1e-9
        orc = oracle_ratios(r, lam)
        for name, fn in k.RATIOS.items():
            assert fn(r, lam) == pytest.approx(orc[name], abs=1e-8, rel=1e-8), (name, r)


@pytest.mark.parametrize("lam", [1.0, 3.0, 10.0, 1000.0])
def test_grid_properties(lam):
    f = [k.warp_f(float(r), lam) for r in GRID]
    assert all(b >= a for a, b in zip(f, f[1:]))
    for r in GRID:
        r = float(r)
        A, B = k.aux_AB(r, lam)
        assert B - A == pytest.approx(math.sin(r) ** 2, abs=4 * math.ulp(B))
        slack = 4 * math.ulp(1 + lam * lam)
        assert 1.0 - slack <= A <= B + slack and B <= 1 + lam * lam + slack
        assert 0.0 <= k.fprime(r, lam) <= 1.0
        assert k.ratio_one_minus_fp2_over_f2(r, lam) >= -1e-12
        assert 0.0 <= k.warp_h(r, lam) <= lam


@pytest.mark.parametrize("lam", [1.0, 2.0, 10.0, 100.0])
def test_boundary_table(lam):
    t = k.boundary_table(lam)
    for key, want in [("f(0)", 0.0), ("f'(0)", 1.0), ("f''(0)", 0.0), ("h(pi/2)", 0.0),
                      ("h'(pi/2)", -1.0), ("h''(pi/2)", 0.0), ("h'(0)", 0.0), ("f'(pi/2)", 0.0)]:
        assert t[key] == pytest.approx(want, abs=1e-10), key
    assert t["h(0)"] == pytest.approx(lam, abs=1e-12)
    assert t["f'(0)_onesided"] == pytest.approx(1.0, abs=1e-6)
    assert t["h'(pi/2)_onesided"] == pytest.approx(-1.0, abs=1e-6)


def test_jet_examples():
    j = jet2_eval("f", 0.0, 1.0)
    assert (j.value, j.d1, j.d2) == (0.0, 1.0, 0.0)
    assert jet2_eval("h", HALF_PI - 1e-8, 1.0).d1 == pytest.approx(-1.0, abs=1e-6)


@pytest.mark.parametrize("fn", [warp_f_formula, warp_h_formula])
def test_jet_against_finite_differences(fn):
    lam, h = 3.0, 1e-4
    for r in (0.2, 0.7, 1.3):
        j = fn(Jet2.var(r), lam)
        val = lambda x: fn(Jet2(x), lam).value
        d1 = (val(r + h) - val(r - h)) / (2 * h)
        d2 = (val(r + h) - 2 * val(r) + val(r - h)) / h ** 2
        assert j.d1 == pytest.approx(d1, rel=1e-7)
        assert j.d2 == pytest.approx(d2, rel=1e-5, abs=1e-5)


def test_jet_arithmetic_rules():
    x = Jet2.var(0.4)
    y = (x * x + 2.0) / (x - 3.0)
    # y = (x^2 + 2)/(x - 3): y' = (x^2 - 6x - 2)/(x - 3)^2, y'' = 22/(x - 3)^3
    assert y.d1 == pytest.approx((0.16 - 2.4 - 2) / 2.6 ** 2, rel=1e-14)
    assert y.d2 == pytest.approx(22 / (-2.6) ** 3, rel=1e-13)
    with pytest.raises(DomainError):
        (x - 1.0) ** 0.5


@pytest.mark.parametrize("r, lam", [(-0.1, 1.0), (HALF_PI + 1e-9, 1.0), (0.3, 0.99), (0.3, math.inf), (0.3, math.nan)])
def test_domain_errors(r, lam):
    with pytest.raises(DomainError):
        k.warp_f(r, lam)
    with pytest.raises(DomainError):
        jet2_eval("f", r, lam)


def test_h_tan_form_rejects_right_end():
    with pytest.raises(DomainError):
        jet2_eval("h", HALF_PI, 1.0)
