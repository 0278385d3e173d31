"""Ricci components of the doubly warped product along H, U and V."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import forms
from .jets import jet2_eval
from .kernel import trig_args
from .params import HALF_PI, WarpParams


@dataclass(frozen=True)
class RicComponents:
    hh: float
    uu: float
    vv: float

    def min(self) -> float:
        return min(self.hh, self.uu, self.vv)


@dataclass(frozen=True)
class TermI:
    value: float


def _tc(r, params: WarpParams):
    _, _, t, c2, l2 = trig_args(r, params.lam)
    return t, c2, l2


def ric_hh(r: float, params: WarpParams) -> float:
    t, c2, l2 = _tc(r, params)
    return forms.ric_hh(t, c2, l2, params.m, params.n)


def ric_uu(r: float, params: WarpParams) -> float:
    t, c2, l2 = _tc(r, params)
    return forms.ric_uu(t, c2, l2, params.m, params.n)


def ric_vv(r: float, params: WarpParams) -> float:
    t, c2, l2 = _tc(r, params)
    return forms.ric_vv(t, c2, l2, params.m, params.n)


def ric(r: float, params: WarpParams) -> RicComponents:
    return RicComponents(ric_hh(r, params), ric_uu(r, params), ric_vv(r, params))


def term_I(r: float, params: WarpParams) -> TermI:
    t, _, l2 = _tc(r, params)
    return TermI(forms.term_I(t, l2, params.m, params.n))


def hpp_step_residual(r: float, params: WarpParams) -> float:
    """-h''/h minus its offered lower estimate 1 - 2 lam^4 sin^2 r / A^2.

    Ric(H,H) minus the estimate-based bound equals (n-1) times this residual,
    so its sign tells whether that step of the estimate holds at r.
    """
    t, c2, l2 = _tc(r, params)
    return forms.neg_hpp_over_h(t, c2, l2) - forms.hpp_ratio_estimate(t, c2, l2)


def ric_oracle(r: float, params: WarpParams) -> RicComponents:
    """The three components assembled from Jet2 derivatives (0 < r < pi/2)."""
    f = jet2_eval("f", r, params.lam)
    h = jet2_eval("h", r, params.lam)
    m, n = params.m, params.n
    fpp = f.d2 / f.value
    hpp = h.d2 / h.value
    cross = f.d1 * h.d1 / (f.value * h.value)
    return RicComponents(
        hh=-m * fpp - (n - 1) * hpp,
        uu=-fpp + (m - 1) * (1 - f.d1 ** 2) / f.value ** 2 - (n - 1) * cross,
        vv=-hpp + (n - 2) * (1 - h.d1 ** 2) / h.value ** 2 - m * cross,
    )


def ric_min_scan(params: WarpParams, grid_size: int = 1000) -> tuple[float, str, float]:
    """Non-rigorous minimum of all three components on a uniform grid.

    Returns ``(value, component, r)``; the grid contains both ends exactly.
    """
    if grid_size < 2:
        raise ValueError("grid_size must be >= 2")
    grid = np.linspace(0.0, HALF_PI, grid_size)
    grid[-1] = HALF_PI
    best = (np.inf, "", 0.0)
    for r in grid:
        rc = ric(float(r), params)
        for name in ("hh", "uu", "vv"):
            v = getattr(rc, name)
            if v < best[0]:
                best = (v, name, float(r))
    return best
