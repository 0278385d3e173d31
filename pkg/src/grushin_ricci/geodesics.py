"""Geodesics and distances in the reduced warped metrics.

Three spaces are modelled, each reduced to a base coordinate u and one or two
fiber angles:

* ``SphereDWP``: dr^2 + f_lambda(r)^2 dalpha^2 + h_lambda(r)^2 dbeta^2 on
  [0, pi/2] x [0, pi] x [0, pi]; alpha and beta are angular separations on the
  two fiber spheres.
* ``LimitHemisphere``: dphi^2 + cot(phi)^2 dbeta^2, phi in (0, pi/2].
* ``GrushinHalfplane``: dx^2 + x^(-2 alpha) dy^2, x > 0.

A minimizing curve projects to a minimizing segment in each fiber, so along
it every fiber coordinate runs monotonically from 0 to its separation.  This
bounds the charts used by both solvers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from math import gcd
from typing import Union

import numpy as np
from scipy.integrate import solve_ivp
from scipy.optimize import brentq, minimize, root

from . import _geo_core as core
from .kernel import fprime, hprime, warp_f, warp_h
from .params import HALF_PI, DomainError, WarpParams


class NonConvergenceError(RuntimeError):
    """No shot met the terminal tolerance."""


class MemoryBudgetError(RuntimeError):
    """The oracle grid would exceed its node budget."""


@dataclass(frozen=True)
class SphereDWP:
    params: WarpParams
    kind = core.SPHERE
    dim = 3

    @property
    def par(self) -> float:
        return self.params.lam

    @property
    def base_range(self) -> tuple[float, float]:
        return 0.0, HALF_PI


@dataclass(frozen=True)
class LimitHemisphere:
    n: int = 2
    kind = core.LIMIT
    dim = 2
    par = 0.0

    def __post_init__(self):
        if self.n < 2:
            raise DomainError("n must be >= 2")

    @property
    def base_range(self) -> tuple[float, float]:
        return 0.0, HALF_PI


@dataclass(frozen=True)
class GrushinHalfplane:
    alpha: float = 1.0
    kind = core.GRUSHIN
    dim = 2

    def __post_init__(self):
        if not self.alpha > 0:
            raise DomainError("alpha must be > 0")

    @property
    def par(self) -> float:
        return self.alpha

    @property
    def base_range(self) -> tuple[float, float]:
        return 0.0, math.inf


MetricSpec = Union[SphereDWP, LimitHemisphere, GrushinHalfplane]


def warps(spec: MetricSpec, u):
    """(G0, G1) as numpy arrays for the metric's fibers (G1 = 1 when absent)."""
    u = np.asarray(u, dtype=float)
    if spec.kind == core.SPHERE:
        lam = spec.params.lam
        s, c = np.sin(u), np.cos(u)
        l2 = lam * lam
        B = 1 + l2 * s * s
        A = l2 * s * s + c * c
        return s / np.sqrt(np.sqrt(B)), lam * np.abs(c) / np.sqrt(A)
    if spec.kind == core.LIMIT:
        with np.errstate(divide="ignore"):
            return np.abs(np.cos(u) / np.sin(u)), np.ones_like(u)
    with np.errstate(divide="ignore"):
        return u ** (-spec.alpha), np.ones_like(u)


def _circ(a: float, b: float) -> float:
    d = abs(a - b) % (2 * math.pi)
    return min(d, 2 * math.pi - d)


@dataclass(frozen=True)
class _Reduced:
    """A distance problem in base coordinate plus fiber separations."""

    u_p: float
    u_q: float
    sep: tuple[float, float]  # separations along fiber 0 and fiber 1


def reduce_pair(spec: MetricSpec, p, q) -> _Reduced:
    """Base coordinates and fiber separations of a point pair.

    Points sitting where a fiber collapses (r = 0 or pi/2 for the sphere
    family, the pole for the hemisphere) make that fiber's angle irrelevant.
    """
    if spec.kind == core.SPHERE:
        (rp, ap, bp), (rq, aq, bq) = p, q
        for r in (rp, rq):
            if not 0.0 <= r <= HALF_PI:
                raise DomainError(f"r={r} outside [0, pi/2]")
        da, db = _circ(ap, aq), _circ(bp, bq)
        if rp == 0.0 or rq == 0.0:
            da = 0.0
        if rp == HALF_PI or rq == HALF_PI:
            db = 0.0
        return _Reduced(float(rp), float(rq), (da, db))
    if spec.kind == core.LIMIT:
        (fp_, bp), (fq, bq) = p, q
        for phi in (fp_, fq):
            if not 0.0 < phi <= HALF_PI:
                raise DomainError(f"phi={phi} outside (0, pi/2]; use boundary_distance for equator points")
        db = _circ(bp, bq)
        if fp_ == HALF_PI or fq == HALF_PI:
            db = 0.0
        return _Reduced(float(fp_), float(fq), (db, 0.0))
    (xp, yp), (xq, yq) = p, q
    for x in (xp, xq):
        if not x > 0.0:
            raise DomainError(f"x={x} must be > 0; use boundary_distance for points on x = 0")
    return _Reduced(float(xp), float(xq), (abs(yq - yp), 0.0))


def _broken_upper(spec: MetricSpec, red: _Reduced) -> float:
    """Length of the best 'go to level U, move in the fibers, come back' path."""
    lo, hi = spec.base_range
    if spec.kind == core.GRUSHIN:
        top = max(red.u_p, red.u_q) + 1.0 + red.sep[0] ** (1.0 / (1.0 + spec.alpha)) * 4
        levels = np.linspace(min(red.u_p, red.u_q), top, 2049)
    else:
        levels = np.linspace(lo, hi, 2049)
        levels[-1] = hi
    g0, g1 = warps(spec, levels)
    with np.errstate(invalid="ignore"):
        cost = np.abs(levels - red.u_p) + np.abs(levels - red.u_q) + g0 * red.sep[0] + g1 * red.sep[1]
    cost = np.where(np.isfinite(cost), cost, np.inf)
    return float(np.min(cost))


def _base_window(spec: MetricSpec, red: _Reduced, upper: float) -> tuple[float, float]:
    lo, hi = spec.base_range
    top = min(hi, 0.5 * (upper + red.u_p + red.u_q))
    if spec.kind == core.SPHERE:
        bottom = max(lo, 0.5 * (red.u_p + red.u_q - upper))
    else:
        # G0 decreasing in u: minimizers have no interior minimum of u
        bottom = min(red.u_p, red.u_q)
    return bottom, max(top, max(red.u_p, red.u_q))


# -- shooting ---------------------------------------------------------------

@dataclass
class _Shot:
    length: float
    u: float
    v: tuple[float, float]
    status: int


def _fire(spec, red, psi, chi, upper, tol, stop_var, target, direction=0):
    """One shot from p with launch angle psi (from the +u axis) and fiber split chi."""
    g0, g1 = warps(spec, red.u_p)
    g0, g1 = float(g0), float(g1)
    p0 = math.cos(psi)
    c0 = g0 * math.sin(psi) * math.cos(chi) if red.sep[0] > 0.0 else 0.0
    c1 = g1 * math.sin(psi) * math.sin(chi) if red.sep[1] > 0.0 else 0.0
    lo, hi = _chart_limits(spec)
    if spec.kind == core.SPHERE:
        # with one fiber idle the reduced metric continues evenly past the end
        # where the idle fiber collapses; re-entering crosses that end twice,
        # which returns the idle angle to where it started
        if c1 == 0.0:
            hi = math.pi
        if c0 == 0.0:
            lo = -HALF_PI
    out = core.shoot(spec.kind, float(spec.par), red.u_p, p0, c0, c1, stop_var, float(target),
                     lo, hi, 3.0 * upper + 2.0, max(tol / 10, 1e-13), direction)
    return _Shot(out[4], out[0], (out[2], out[3]), int(out[5]))


def _chart_limits(spec):
    if spec.kind == core.GRUSHIN:
        return 1e-9, 1e300
    if spec.kind == core.LIMIT:
        return 1e-12, HALF_PI
    return 0.0, HALF_PI


def _psi_grid() -> np.ndarray:
    # uniform in the launch angle, refined geometrically towards c = 0 where
    # near-collapse geodesics live
    edge = np.geomspace(1e-7, math.pi / 64, 24)[:-1]
    return np.concatenate([edge, np.linspace(0.0, math.pi, 65)[1:-1], math.pi - edge[::-1]])


def _solve_one_fiber(spec, red, k, upper, tol):
    """Shortest geodesic moving in fiber k only."""
    return min((length for length, _ in _one_fiber_shots(spec, red, k, upper, tol)), default=math.inf)


def _one_fiber_shots(spec, red, k, upper, tol):
    """Converged (length, launch angle) pairs for fiber k only.

    Two stopping rules are used: stop on the fiber target and match u, or
    stop on u crossing u_q (either direction) and match the fiber angle.
    The first is well conditioned where the path ends flat in u, the second
    where it ends steeply.
    """
    chi = 0.0 if k == 0 else HALF_PI
    modes = [(2 + k, red.sep[k], 0), (0, red.u_q, 1), (0, red.u_q, -1)]
    grid = _psi_grid()
    usable = (core.OK, core.LEFT_CHART)
    shots = []
    for stop_var, target, direction in modes:

        def fire(psi):
            return _fire(spec, red, psi, chi, upper, tol, stop_var, target, direction)

        def resid_of(sh):
            if stop_var == 0:
                return sh.v[k] - red.sep[k] if sh.status == core.OK else math.nan
            return sh.u - red.u_q if sh.status in usable else math.nan

        vals = [(psi, resid_of(fire(psi))) for psi in grid]

        def resid(psi):
            r = resid_of(fire(psi))
            if not math.isfinite(r):
                raise NonConvergenceError("shot failed inside a bracket")
            return r

        for (pa, fa), (pb, fb) in zip(vals, vals[1:]):
            if not (math.isfinite(fa) and math.isfinite(fb)) or fa * fb > 0:
                continue
            try:
                psi = pa if fa == 0.0 else brentq(resid, pa, pb, xtol=1e-15, rtol=1e-15, maxiter=200)
            except (NonConvergenceError, ValueError, RuntimeError):
                continue
            sh = fire(psi)
            if sh.status != core.OK:
                continue
            if max(abs(sh.u - red.u_q), abs(sh.v[k] - red.sep[k])) <= max(tol, 1e-9):
                shots.append((sh.length, psi))
    return shots


def _solve_two_fibers(spec, red, upper, tol, starts=24):
    """Two Clairaut constants: stop on fiber 0, match (u, fiber 1)."""
    psis = np.linspace(0.0, math.pi, starts + 2)[1:-1]
    chis = np.linspace(0.0, HALF_PI, starts + 2)[1:-1]
    P, X = np.meshgrid(psis, chis, indexing="ij")
    g0, g1 = (float(v) for v in warps(spec, red.u_p))
    p0 = np.cos(P).ravel()
    c0 = (g0 * np.sin(P) * np.cos(X)).ravel()
    c1 = (g1 * np.sin(P) * np.sin(X)).ravel()
    lo, hi = _chart_limits(spec)
    out = core.shoot_many(spec.kind, float(spec.par), red.u_p, p0, c0, c1, 2, red.sep[0],
                          lo, hi, 3.0 * upper + 2.0, max(tol / 10, 1e-13), 0)
    ok = out[:, 5] == core.OK
    res = np.hypot(out[:, 0] - red.u_q, out[:, 3] - red.sep[1])
    res[~ok] = np.inf
    res = res.reshape(P.shape)
    # every grid local minimum of the residual, best first
    cand = []
    for i in range(res.shape[0]):
        for j in range(res.shape[1]):
            v = res[i, j]
            if not np.isfinite(v):
                continue
            nb = res[max(i - 1, 0):i + 2, max(j - 1, 0):j + 2]
            if v <= nb.min():
                cand.append((v, P[i, j], X[i, j]))
    cand.sort()

    def resid(x):
        sh = _fire(spec, red, x[0], x[1], upper, tol, 2, red.sep[0])
        if sh.status != core.OK:
            return np.array([1.0, 1.0]) * (1.0 + abs(x[0]) + abs(x[1]))
        return np.array([sh.u - red.u_q, sh.v[1] - red.sep[1]])

    def polish(seeds):
        best = math.inf
        for psi, chi in seeds:
            x = root(resid, [psi, chi], method="hybr", options={"xtol": 1e-14}).x
            if not (0.0 < x[0] < math.pi and 0.0 <= x[1] <= HALF_PI):
                continue
            sh = _fire(spec, red, x[0], x[1], upper, tol, 2, red.sep[0])
            if sh.status == core.OK and max(abs(sh.u - red.u_q), abs(sh.v[1] - red.sep[1])) <= max(tol, 1e-9):
                best = min(best, sh.length)
        return best

    best = polish([(psi, chi) for _, psi, chi in cand[:12]])
    if math.isfinite(best):
        return best
    # fallback: continue from the one-fiber solutions, which a small
    # separation in the other fiber only perturbs
    seeds = []
    for k, chi in ((0, 1e-3), (1, HALF_PI - 1e-3)):
        one = _Reduced(red.u_p, red.u_q, (red.sep[0], 0.0) if k == 0 else (0.0, red.sep[1]))
        seeds += [(psi, chi) for _, psi in sorted(_one_fiber_shots(spec, one, k, _broken_upper(spec, one), tol))]
    return polish(seeds)


def _through_collapse(spec, red) -> float:
    """Radial paths through a collapsed fiber end when a separation equals pi.

    Passing through r = 0 (resp. r = pi/2, the pole) flips the collapsing
    fiber's angle by pi at no cost.
    """
    out = math.inf
    if spec.kind == core.SPHERE:
        if red.sep[1] == 0.0 and abs(red.sep[0] - math.pi) <= 1e-12:
            out = red.u_p + red.u_q
        if red.sep[0] == 0.0 and abs(red.sep[1] - math.pi) <= 1e-12:
            out = min(out, math.pi - red.u_p - red.u_q)
    elif spec.kind == core.LIMIT and abs(red.sep[0] - math.pi) <= 1e-12:
        out = math.pi - red.u_p - red.u_q
    return out


def _mirrored(spec, red, tol) -> float:
    """Geodesics of the sphere family through the end where an antipodal fiber collapses.

    With separation pi in one fiber, the path may cross that fiber's
    collapsed end: the remaining problem is the other fiber's one with the
    target reflected across that end.
    """
    if spec.kind != core.SPHERE:
        return math.inf
    out = math.inf
    anti = [abs(sep - math.pi) <= 1e-12 for sep in red.sep]
    if anti[0] and anti[1]:
        # radially through both ends
        out = math.pi - abs(red.u_p - red.u_q)
    for k, mirror in ((0, -red.u_q), (1, math.pi - red.u_q)):
        other = 1 - k
        if anti[k] and red.sep[other] > 0.0:
            sep = (0.0, red.sep[1]) if k == 0 else (red.sep[0], 0.0)
            m = _Reduced(red.u_p, mirror, sep)
            out = min(out, _solve_one_fiber(spec, m, other, _broken_upper(spec, m), tol))
    return out


def distance(spec: MetricSpec, p, q, tol: float = 1e-8) -> float:
    """Length of the shortest geodesic found by multi-start shooting."""
    red = reduce_pair(spec, p, q)
    du = abs(red.u_p - red.u_q)
    if red.sep == (0.0, 0.0):
        return du
    upper = _broken_upper(spec, red)
    best = min(_through_collapse(spec, red), _mirrored(spec, red, tol))
    if red.sep[0] > 0.0 and red.sep[1] > 0.0:
        best = min(best, _solve_two_fibers(spec, red, upper, tol))
    else:
        k = 0 if red.sep[0] > 0.0 else 1
        best = min(best, _solve_one_fiber(spec, red, k, upper, tol))
    if not math.isfinite(best):
        raise NonConvergenceError(f"no shot converged for {p} -> {q} in {spec}")
    return max(best, du)


# -- geodesic initial value problem ----------------------------------------

@dataclass
class PathResult:
    length: float
    samples: np.ndarray  # columns s, u, fiber0, fiber1
    clairaut: tuple[float, float]
    converged: bool
    turning_points: list[float] = field(default_factory=list)
    clairaut_drift: float = 0.0


def _warp_derivs(spec: MetricSpec, u: float):
    if spec.kind == core.SPHERE:
        lam = spec.params.lam
        u = min(max(u, 0.0), HALF_PI)
        return warp_f(u, lam), fprime(u, lam), warp_h(u, lam), hprime(u, lam)
    g0, g0p, g1, g1p = core.warps(spec.kind, float(spec.par), u)
    return g0, g0p, g1, g1p


def geodesic_ivp(spec: MetricSpec, start, c_alpha: float, c_beta: float = 0.0, sign: int = 1,
                 max_len: float = 1.0, tol: float = 1e-8) -> PathResult:
    """Unit-speed geodesic from ``start`` with the given Clairaut constants.

    Integrates the second-order geodesic equations, so conservation of
    G^2 * (fiber speed) along the result is a genuine check.  For 2-D specs
    ``c_alpha`` is the constant of the single fiber.
    """
    start = tuple(float(x) for x in start)
    u0 = start[0]
    f0 = start[1] if len(start) > 1 else 0.0
    f1 = start[2] if len(start) > 2 else 0.0
    if spec.dim == 2 and c_beta != 0.0:
        raise DomainError("2-D metrics have a single Clairaut constant")
    g0, _, g1, _ = _warp_derivs(spec, u0)
    cons = (float(c_alpha), float(c_beta))
    kinetic = 0.0
    for c, g in zip(cons, (g0, g1)):
        if c != 0.0:
            if g < 1e-6:
                raise DomainError("nonzero Clairaut constant on a collapsed fiber")
            kinetic += (c / g) ** 2
    if kinetic > 1.0 + 1e-12:
        raise DomainError("initial data not admissible: c_a^2/G0^2 + c_b^2/G1^2 > 1")
    du0 = sign * math.sqrt(max(0.0, 1.0 - kinetic))
    dv0 = cons[0] / g0 ** 2 if cons[0] else 0.0
    dv1 = cons[1] / g1 ** 2 if cons[1] else 0.0

    def rhs(s, y):
        u, _, _, du, da, db = y
        G0, G0p, G1, G1p = _warp_derivs(spec, u)
        dda = -2.0 * G0p / G0 * du * da if da else 0.0
        ddb = -2.0 * G1p / G1 * du * db if db else 0.0
        ddu = G0 * G0p * da * da + G1 * G1p * db * db
        return [du, da, db, ddu, dda, ddb]

    def turning(s, y):
        return y[3]

    lo, hi = spec.base_range

    def below(s, y):
        return y[0] - lo

    def above(s, y):
        return y[0] - hi

    # only crossings out of the chart end the path, so starting on an edge is fine
    below.terminal, below.direction = True, -1
    above.terminal, above.direction = True, 1
    events = [turning, below] + ([above] if math.isfinite(hi) else [])
    sol = solve_ivp(rhs, (0.0, max_len), [u0, f0, f1, du0, dv0, dv1], method="RK45",
                    rtol=max(tol / 10, 1e-12), atol=max(tol / 10, 1e-13), dense_output=True,
                    events=events, max_step=max_len / 50)
    s_end = float(sol.t[-1])
    svals = np.linspace(0.0, s_end, 201)
    Y = sol.sol(svals)
    samples = np.column_stack([svals, Y[0], Y[1], Y[2]])
    G = np.array([_warp_derivs(spec, u)[0::2] for u in Y[0]])
    drift = 0.0
    with np.errstate(invalid="ignore", divide="ignore"):
        for c, col, vel in ((cons[0], 0, Y[4]), (cons[1], 1, Y[5])):
            if c != 0.0:
                drift = max(drift, float(np.nanmax(np.abs(G[:, col] ** 2 * vel - c))))
    return PathResult(
        length=s_end,
        samples=samples,
        clairaut=cons,
        converged=sol.status >= 0,
        turning_points=[float(t) for t in sol.t_events[0]],
        clairaut_drift=drift,
    )


# -- grid-graph oracle ------------------------------------------------------

_GAUSS_X = np.array([0.5 - math.sqrt(15) / 10, 0.5, 0.5 + math.sqrt(15) / 10])
_GAUSS_W = np.array([5 / 18, 8 / 18, 5 / 18])


def stencil(dim: int, radius: int) -> np.ndarray:
    """Primitive integer offsets with max-norm <= radius (radius 1: 8/26 neighbors)."""
    rng = range(-radius, radius + 1)
    offs = []
    if dim == 2:
        for i in rng:
            for j in rng:
                if (i, j) != (0, 0) and gcd(i, j) == 1:
                    offs.append((i, j, 0))
    else:
        for i in rng:
            for j in rng:
                for k in rng:
                    if (i, j, k) != (0, 0, 0) and gcd(gcd(i, j), k) == 1:
                        offs.append((i, j, k))
    return np.array(offs, dtype=np.int64)


def edge_weights(spec: MetricSpec, unodes: np.ndarray, active: list[int], dv: list[float],
                 offs: np.ndarray) -> np.ndarray:
    """Metric length of every stencil edge, per base row.

    Fiber spacings are uniform, so an edge's length depends only on its base
    row and offset.  ``offs`` has three columns (base, first active fiber,
    second active fiber); ``W[i, o]`` is infinite when the edge leaves the grid
    or moves along a fiber whose warp is infinite at an endpoint.
    """
    nu = len(unodes)
    W = np.full((nu, len(offs)), np.inf)
    g_end = warps(spec, unodes)
    for o, (a, b, c) in enumerate(offs):
        rows = np.arange(max(0, -a), min(nu, nu - a))
        if rows.size == 0:
            continue
        u0 = unodes[rows]
        u1 = unodes[rows + a]
        total = np.zeros(rows.size)
        for x, w in zip(_GAUSS_X, _GAUSS_W):
            g = warps(spec, u0 + x * (u1 - u0))
            sq = (u1 - u0) ** 2
            for slot, step in zip(active, (b, c)):
                if step:
                    sq = sq + (g[slot] * step * dv[active.index(slot)]) ** 2
            total += w * np.sqrt(sq)
        for slot, step in zip(active, (b, c)):
            if step:
                total[~np.isfinite(g_end[slot][rows]) | ~np.isfinite(g_end[slot][rows + a])] = np.inf
        W[rows, o] = total
    W[~np.isfinite(W)] = np.inf
    return W


def _anchored_axis(a: float, b: float, lo: float, hi: float, spacing: float) -> tuple[np.ndarray, int, int]:
    """Uniform nodes containing a and b exactly, covering [lo, hi]."""
    span = abs(b - a)
    if span > 0:
        k = max(1, int(round(span / spacing)))
        step = (b - a) / k
    else:
        k, step = 0, spacing
    step = abs(step) if step != 0 else spacing
    base = min(a, b)
    i0 = -int(math.floor((base - lo) / step + 1e-9))
    i1 = int(math.floor((hi - base) / step + 1e-9))
    idx = np.arange(i0, i1 + 1)
    nodes = base + idx * step
    ia = int(np.argmin(np.abs(nodes - a)))
    ib = int(np.argmin(np.abs(nodes - b)))
    nodes[ia], nodes[ib] = a, b
    return nodes, ia, ib


def oracle_distance(spec: MetricSpec, p, q, resolution: int = 512, stencil_radius: int | None = None,
                    max_nodes: int = 4_000_000, polish: bool = True) -> float:
    """Shortest path on a grid graph over the reduced chart.

    p and q are grid nodes; edges join nodes along primitive offsets and are
    weighted by the metric length of the straight chart segment (3-point
    Gauss quadrature).  Each graph path is a real curve, so the value is an
    upper bound on the distance up to quadrature error.

    With ``polish`` the graph path is resampled and its length minimized
    directly over polyline vertices (endpoints fixed).  This removes the
    direction bias of the stencil, which is severe near collapsed fibers,
    while keeping the global choice made by the graph search.
    """
    if resolution < 64:
        raise DomainError("resolution must be >= 64")
    red = reduce_pair(spec, p, q)
    if red.sep == (0.0, 0.0):
        return abs(red.u_p - red.u_q)
    upper = _broken_upper(spec, red)
    upper = min(upper, _through_collapse(spec, red)) if math.isfinite(_through_collapse(spec, red)) else upper
    ulo, uhi = _base_window(spec, red, upper)
    if spec.kind == core.LIMIT:
        ulo = max(ulo, 1e-6)
    active = [k for k in (0, 1) if red.sep[k] > 0.0]
    dim = 1 + len(active)
    # anchoring the end points can add up to two nodes per axis
    per_axis = resolution if dim == 2 else int(min(resolution, math.floor(max_nodes ** (1 / 3)) - 3))
    radius = stencil_radius if stencil_radius is not None else (4 if dim == 2 else 2)
    # spacing so that cells are roughly square in the metric at the path's typical level
    u_axis_len = max(uhi - ulo, 1e-12)
    du = u_axis_len / per_axis
    mids = np.linspace(ulo, uhi, 257)[1:-1]
    G = warps(spec, mids)
    fiber_axes = []
    for k in active:
        g = np.where(np.isfinite(G[k]), G[k], np.nan)
        gtyp = float(np.nanmedian(g)) if np.any(np.isfinite(g)) else 1.0
        gtyp = max(gtyp, 1e-3)
        dv = min(red.sep[k] / 2, max(du / gtyp, red.sep[k] / per_axis))
        nodes, _, _ = _anchored_axis(0.0, red.sep[k], 0.0, red.sep[k], dv)
        fiber_axes.append(nodes)
    unodes, iu_p, iu_q = _anchored_axis(red.u_p, red.u_q, ulo, uhi, du)
    lo, hi = spec.base_range
    keep = (unodes >= lo) & (unodes <= hi)
    shift = int(np.argmax(keep))
    unodes = unodes[keep]
    iu_p -= shift
    iu_q -= shift
    n0 = len(fiber_axes[0])
    n1 = len(fiber_axes[1]) if dim == 3 else 1
    total = len(unodes) * n0 * n1
    if total > max_nodes:
        raise MemoryBudgetError(f"oracle grid needs {total} nodes > budget {max_nodes}")
    dv = [ax[1] - ax[0] if len(ax) > 1 else 0.0 for ax in fiber_axes]
    nu = len(unodes)
    offs = stencil(dim, radius)
    if dim == 2:
        offs = np.column_stack([offs[:, 0], offs[:, 1], np.zeros(len(offs), dtype=np.int64)])
    W = edge_weights(spec, unodes, active, dv, offs)
    src = (iu_p * n0 + 0) * n1 + 0
    dst = (iu_q * n0 + (n0 - 1)) * n1 + (n1 - 1)
    value, pred, _ = core.grid_dijkstra(nu, n0, n1, offs, W, src, dst)
    if not polish or not math.isfinite(value):
        return float(value)
    nodes = [dst]
    while nodes[-1] != src:
        nodes.append(int(pred[nodes[-1]]))
    idx = np.array(nodes[::-1])
    path = np.zeros((len(idx), 3))
    path[:, 0] = unodes[idx // n1 // n0]
    for slot, k in enumerate(active):
        path[:, 1 + k] = fiber_axes[slot][(idx // n1) % n0 if slot == 0 else idx % n1]
    lo_u, hi_u = _chart_limits(spec)
    return min(float(value), _polish_polyline(spec, path, max(lo_u, 0.0), min(hi_u, uhi + (uhi - ulo))))


def _polish_polyline(spec: MetricSpec, path: np.ndarray, u_lo: float, u_hi: float, points: int = 257) -> float:
    seg = np.linalg.norm(np.diff(path, axis=0), axis=1)
    cum = np.concatenate([[0.0], np.cumsum(seg)])
    s = np.linspace(0.0, cum[-1], points)
    pts = np.column_stack([np.interp(s, cum, path[:, j]) for j in range(3)])
    pts[0], pts[-1] = path[0], path[-1]
    grad = np.empty_like(pts)
    par = float(spec.par)

    def fun(x):
        pts[1:-1] = x.reshape(-1, 3)
        val = core.polyline_length(spec.kind, par, pts, grad)
        return val, grad[1:-1].ravel().copy()

    bounds = [(u_lo, u_hi), (None, None), (None, None)] * (points - 2)
    res = minimize(fun, pts[1:-1].ravel().copy(), jac=True, method="L-BFGS-B", bounds=bounds,
                   options={"maxiter": 20000, "ftol": 1e-15, "gtol": 1e-12})
    return float(res.fun) if np.isfinite(res.fun) else math.inf


# -- completion boundary ---------------------------------------------------

BOUNDARY_OFFSETS = (1e-2, 5e-3, 2.5e-3)


@dataclass(frozen=True)
class BoundaryDistance:
    value: float
    error: float
    samples: tuple[float, ...]


def boundary_distance(spec: MetricSpec, p, q, tol: float = 1e-8, offsets=BOUNDARY_OFFSETS,
                      solver=None) -> BoundaryDistance:
    """Distance involving points on the completion boundary (phi = 0 or x = 0).

    Boundary points are pushed to base coordinate delta for each offset and
    the results extrapolated to delta = 0 with a quadratic fit.
    """
    if spec.kind == core.SPHERE:
        raise DomainError("boundary_distance applies to LimitHemisphere and GrushinHalfplane")
    solver = solver or (lambda a, b: distance(spec, a, b, tol))
    if p[0] != 0.0 and q[0] != 0.0:
        raise DomainError("at least one point must lie on the boundary")

    def push(pt, d):
        return (d,) + tuple(pt[1:]) if pt[0] == 0.0 else tuple(pt)

    vals = tuple(solver(push(p, d), push(q, d)) for d in offsets)
    d = np.array(offsets)
    coef = np.polyfit(d, np.array(vals), len(offsets) - 1)
    quad = float(coef[-1])
    lin = float(vals[-1] + (vals[-1] - vals[-2]) * d[-1] / (d[-2] - d[-1]))
    return BoundaryDistance(quad, abs(quad - lin), vals)
