"""Double-precision evaluation of the warping functions and curvature ratios."""

from __future__ import annotations

import math

from . import forms
from .jets import jet2_eval
from .params import HALF_PI, check_lambda, check_r, sincos


def trig_args(r, lam):
    r = check_r(r)
    lam = check_lambda(lam)
    s, c = sincos(r)
    return s, c, s * s, c * c, lam * lam


def warp_f(r: float, lam: float) -> float:
    """f_lambda(r) = sin r / (1 + lam^2 sin^2 r)^(1/4)."""
    s, _, t, _, l2 = trig_args(r, lam)
    return s / forms.quarter_root(forms.aux_B(t, l2))


def warp_h(r: float, lam: float) -> float:
    """h_lambda(r), evaluated as lam cos r / sqrt(A) so that r = pi/2 is regular."""
    _, c, t, c2, l2 = trig_args(r, lam)
    return lam * c / math.sqrt(forms.aux_A(t, c2, l2))


def aux_AB(r: float, lam: float) -> tuple[float, float]:
    _, _, t, c2, l2 = trig_args(r, lam)
    return forms.aux_A(t, c2, l2), forms.aux_B(t, l2)


def fprime(r: float, lam: float) -> float:
    _, c, t, _, l2 = trig_args(r, lam)
    return forms.fprime(t, c, l2)


def hprime(r: float, lam: float) -> float:
    """h' = -lam^3 sin r / A^(3/2)."""
    s, _, t, c2, l2 = trig_args(r, lam)
    A = forms.aux_A(t, c2, l2)
    return -lam * l2 * s / (A * math.sqrt(A))


def ratio_neg_fpp_over_f(r: float, lam: float) -> float:
    _, _, t, _, l2 = trig_args(r, lam)
    return forms.neg_fpp_over_f(t, l2)


def ratio_neg_fphp_over_fh(r: float, lam: float) -> float:
    _, _, t, c2, l2 = trig_args(r, lam)
    return forms.neg_fphp_over_fh(t, c2, l2)


def ratio_neg_hpp_over_h(r: float, lam: float) -> float:
    _, _, t, c2, l2 = trig_args(r, lam)
    return forms.neg_hpp_over_h(t, c2, l2)


def ratio_one_minus_hp2_over_h2(r: float, lam: float) -> float:
    _, _, t, c2, l2 = trig_args(r, lam)
    return forms.one_minus_hp2_over_h2(t, c2, l2)


def ratio_one_minus_fp2_over_f2(r: float, lam: float) -> float:
    _, _, t, _, l2 = trig_args(r, lam)
    return forms.one_minus_fp2_over_f2(t, l2)


def fsecond(r: float, lam: float) -> float:
    return -warp_f(r, lam) * ratio_neg_fpp_over_f(r, lam)


def hsecond(r: float, lam: float) -> float:
    return -warp_h(r, lam) * ratio_neg_hpp_over_h(r, lam)


RATIOS = {
    "fprime": fprime,
    "neg_fpp_over_f": ratio_neg_fpp_over_f,
    "neg_fphp_over_fh": ratio_neg_fphp_over_fh,
    "neg_hpp_over_h": ratio_neg_hpp_over_h,
    "one_minus_hp2_over_h2": ratio_one_minus_hp2_over_h2,
    "one_minus_fp2_over_f2": ratio_one_minus_fp2_over_f2,
}

QUANTITIES = {
    "f": warp_f,
    "h": warp_h,
    "hprime": hprime,
    "A": lambda r, lam: aux_AB(r, lam)[0],
    "B": lambda r, lam: aux_AB(r, lam)[1],
    **RATIOS,
}


def boundary_table(lam: float, offset: float = 1e-8) -> dict[str, float]:
    """Values that the closure conditions at r = 0 and r = pi/2 pin down.

    Closed forms are evaluated exactly at the ends; the ``*_onesided`` entries
    come from the Jet2 oracle at ``offset`` inside the interval.
    """
    lam = check_lambda(lam)
    return {
        "f(0)": warp_f(0.0, lam),
        "f'(0)": fprime(0.0, lam),
        "f''(0)": fsecond(0.0, lam),
        "f(pi/2)": warp_f(HALF_PI, lam),
        "f'(pi/2)": fprime(HALF_PI, lam),
        "h(0)": warp_h(0.0, lam),
        "h'(0)": hprime(0.0, lam),
        "h(pi/2)": warp_h(HALF_PI, lam),
        "h'(pi/2)": hprime(HALF_PI, lam),
        "h''(pi/2)": hsecond(HALF_PI, lam),
        "f'(0)_onesided": jet2_eval("f", offset, lam).d1,
        "h'(pi/2)_onesided": jet2_eval("h", HALF_PI - offset, lam).d1,
    }
