"""Gromov-Hausdorff laboratory for the collapse of the sphere family.

Nets, distance matrices and covering numbers are computed on chart grids.
Because every metric here depends only on the base coordinate and on fiber
separations, one single-source graph search per base row yields a table of
distances between all grid nodes (:class:`ChartGrid.row_table`).  Graph
distances are lengths of actual chart polylines, so they bound the true
distance from above; :func:`graph_vs_shooting` measures the gap.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import _geo_core as core
from .geodesics import (
    GrushinHalfplane,
    LimitHemisphere,
    MetricSpec,
    SphereDWP,
    boundary_distance,
    distance,
    edge_weights,
    stencil,
    warps,
)
from .params import HALF_PI, DomainError, WarpParams


# -- chart grids -------------------------------------------------------------

@dataclass
class ChartGrid:
    """Uniform grid over a reduced chart with a precomputed edge table.

    ``active`` lists the fiber slots carried by the grid (0 and/or 1); other
    fibers are held at separation 0.
    """

    spec: MetricSpec
    unodes: np.ndarray
    fiber_nodes: list[np.ndarray]
    active: list[int]
    radius: int
    offsets: np.ndarray = field(init=False, repr=False)
    weights: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        dim = 1 + len(self.active)
        offs = stencil(dim, self.radius)
        if dim == 2:
            offs = np.column_stack([offs[:, 0], offs[:, 1], np.zeros(len(offs), dtype=np.int64)])
        self.offsets = offs
        dv = [ax[1] - ax[0] for ax in self.fiber_nodes]
        self.weights = edge_weights(self.spec, self.unodes, self.active, dv, offs)

    @property
    def shape(self) -> tuple[int, int, int]:
        n0 = len(self.fiber_nodes[0])
        n1 = len(self.fiber_nodes[1]) if len(self.fiber_nodes) > 1 else 1
        return len(self.unodes), n0, n1

    @property
    def size(self) -> int:
        nu, n0, n1 = self.shape
        return nu * n0 * n1

    def index(self, i, j, l=0):
        _, n0, n1 = self.shape
        return (np.asarray(i) * n0 + np.asarray(j)) * n1 + np.asarray(l)

    def unravel(self, idx):
        _, n0, n1 = self.shape
        idx = np.asarray(idx)
        return idx // n1 // n0, (idx // n1) % n0, idx % n1

    def sssp(self, src: int) -> np.ndarray:
        nu, n0, n1 = self.shape
        _, _, dist = core.grid_dijkstra(nu, n0, n1, self.offsets, self.weights, int(src), -1)
        return dist

    def row_table(self, workers: int = 1) -> "DistanceTable":
        nu, n0, n1 = self.shape
        sources = [int(self.index(i, 0, 0)) for i in range(nu)]
        if workers > 1:
            with ProcessPoolExecutor(max_workers=workers) as pool:
                rows = list(pool.map(self.sssp, sources))
        else:
            rows = [self.sssp(s) for s in sources]
        return DistanceTable(self, np.stack([r.reshape(nu, n0, n1) for r in rows]))

    def point(self, idx: int) -> tuple[float, ...]:
        """Chart coordinates of a node in the reduced-point layout of the metric."""
        i, j, l = (int(x) for x in self.unravel(idx))
        fib = [0.0, 0.0]
        for slot, k in enumerate(self.active):
            fib[k] = float(self.fiber_nodes[slot][(j, l)[slot]])
        u = float(self.unodes[i])
        if isinstance(self.spec, SphereDWP):
            return (u, fib[0], fib[1])
        if isinstance(self.spec, GrushinHalfplane):
            return (u, fib[0])
        return (u, fib[0])


@dataclass
class DistanceTable:
    """Graph distances from each base row's corner node to every node."""

    grid: ChartGrid
    values: np.ndarray  # [source row, row, fiber-0 offset, fiber-1 offset]

    def lookup(self, a, b) -> np.ndarray:
        ia, ja, la = self.grid.unravel(a)
        ib, jb, lb = self.grid.unravel(b)
        return self.values[ia, ib, np.abs(jb - ja), np.abs(lb - la)]

    def from_node(self, a: int) -> np.ndarray:
        return self.lookup(np.full(self.grid.size, a), np.arange(self.grid.size))


def _spacing_count(length: float, spacing: float) -> int:
    return int(math.ceil(length / spacing - 1e-9)) + 1


def full_chart_grid(spec: MetricSpec, spacing: float, radius: int | None = None) -> ChartGrid:
    """Grid over the whole chart of the sphere family or the limit hemisphere."""
    if isinstance(spec, GrushinHalfplane):
        raise DomainError("the Grushin halfplane has no bounded chart; use box_grid")
    u = np.linspace(0.0, HALF_PI, _spacing_count(HALF_PI, spacing))
    f = np.linspace(0.0, math.pi, _spacing_count(math.pi, spacing))
    if isinstance(spec, SphereDWP):
        return ChartGrid(spec, u, [f, f.copy()], [0, 1], radius or 2)
    return ChartGrid(spec, u, [f], [0], radius or 4)


def box_grid(spec: MetricSpec, u_range, v_range, spacing: float, fiber: int = 0,
             radius: int = 4) -> ChartGrid:
    """2-D grid over a chart box, moving in one fiber."""
    u = np.linspace(u_range[0], u_range[1], _spacing_count(u_range[1] - u_range[0], spacing))
    v = np.linspace(v_range[0], v_range[1], _spacing_count(v_range[1] - v_range[0], spacing))
    return ChartGrid(spec, u, [v], [fiber], radius)


# -- nets and matrices -------------------------------------------------------

@dataclass
class NetSample:
    spec: MetricSpec
    points: list[tuple[float, ...]]
    epsilon: float
    covering_verified: bool
    nodes: np.ndarray = field(repr=False)
    covering_radius: float = math.nan


@dataclass
class DistanceMatrix:
    size: int
    entries: np.ndarray
    tol: float

    def __post_init__(self):
        e = np.asarray(self.entries, dtype=float)
        if e.shape != (self.size, self.size):
            raise ValueError("entries must be size x size")
        e = 0.5 * (e + e.T)
        np.fill_diagonal(e, 0.0)
        if np.any(e < 0) or not np.all(np.isfinite(e)):
            raise ValueError("distances must be finite and nonnegative")
        self.entries = e

    def triangle_violation(self, samples: int = 1000, seed: int = 0) -> float:
        """Largest d(i,k) - d(i,j) - d(j,k) over random triples (<= 3 tol when valid)."""
        if self.size < 3:
            return 0.0
        rng = np.random.default_rng(seed)
        i, j, k = rng.integers(self.size, size=(3, samples))
        e = self.entries
        return float(np.max(e[i, k] - e[i, j] - e[j, k]))


def _fps(table: DistanceTable, epsilon: float, seed: int):
    """Farthest-point sampling; also returns the final covering radius over all nodes."""
    size = table.grid.size
    rng = np.random.default_rng(seed)
    net = [int(rng.integers(size))]
    mind = np.full(size, np.inf)
    while True:
        mind = np.minimum(mind, table.from_node(net[-1]))
        far = int(np.argmax(mind))
        if mind[far] <= epsilon:
            return np.array(net, dtype=np.int64), float(mind[far])
        net.append(far)


def covering_radius(table: DistanceTable, nodes) -> float:
    """Max over grid nodes of the graph distance to the nearest of ``nodes``."""
    mind = np.full(table.grid.size, np.inf)
    for a in np.asarray(nodes):
        mind = np.minimum(mind, table.from_node(int(a)))
    return float(mind.max())


def build_net(spec: MetricSpec, epsilon: float, seed: int = 42, spacing: float | None = None,
              workers: int = 1, table: DistanceTable | None = None) -> NetSample:
    """Farthest-point epsilon-net over the nodes of a dense chart grid.

    Distances are graph distances (upper bounds), so a verified covering
    radius is also a covering radius for the true metric on the probe grid.
    """
    if not epsilon > 0:
        raise DomainError("epsilon must be > 0")
    if table is None:
        table = full_chart_grid(spec, spacing or min(epsilon / 3, 0.05)).row_table(workers)
    nodes, radius = _fps(table, epsilon, seed)
    pts = [table.grid.point(int(a)) for a in nodes]
    return NetSample(spec, pts, epsilon, radius <= epsilon, nodes, radius)


def net_matrix(table: DistanceTable, nodes, tol: float = 1e-8) -> DistanceMatrix:
    nodes = np.asarray(nodes)
    e = table.lookup(nodes[:, None], nodes[None, :])
    return DistanceMatrix(len(nodes), e, tol)


def shooting_matrix(spec: MetricSpec, points, tol: float = 1e-8) -> DistanceMatrix:
    """Pairwise distances by the shooting solver (boundary points extrapolated)."""
    n = len(points)
    e = np.zeros((n, n))
    for a in range(n):
        for b in range(a + 1, n):
            p, q = points[a], points[b]
            if not isinstance(spec, SphereDWP) and (p[0] == 0.0 or q[0] == 0.0):
                e[a, b] = boundary_distance(spec, p, q, tol).value
            else:
                e[a, b] = distance(spec, p, q, tol)
            e[b, a] = e[a, b]
    return DistanceMatrix(n, e, tol)


def gh_lower_bound(mat_a: DistanceMatrix, mat_b: DistanceMatrix) -> float:
    """Half the Hausdorff distance between the two sets of distance values.

    Under any correspondence of distortion D, each distance value of one
    space lies within D of a value of the other, so this is a lower bound on
    the GH distance of the finite spaces.
    """
    va = np.unique(mat_a.entries)
    vb = np.unique(mat_b.entries)

    def directed(x, y):
        pos = np.clip(np.searchsorted(y, x), 1, len(y) - 1) if len(y) > 1 else np.zeros(len(x), dtype=int)
        near = np.abs(x - y[pos])
        if len(y) > 1:
            near = np.minimum(near, np.abs(x - y[pos - 1]))
        return float(near.max())

    return 0.5 * max(directed(va, vb), directed(vb, va))


# -- the collapse correspondence --------------------------------------------

@dataclass(frozen=True)
class DistortionReport:
    lam: float
    epsilon: float
    distortion: float
    argmax_pair: tuple[int, int]
    gh_upper: float
    gh_lower: float
    net_size_A: int
    net_size_B: int
    covering_radius_A: float
    covering_radius_B: float

    def csv_row(self) -> dict:
        return {
            "lambda": self.lam,
            "epsilon": self.epsilon,
            "net_size_A": self.net_size_A,
            "net_size_B": self.net_size_B,
            "distortion": self.distortion,
            "gh_upper": self.gh_upper,
            "gh_lower": self.gh_lower,
        }


SWEEP_COLUMNS = ("lambda", "epsilon", "net_size_A", "net_size_B", "distortion", "gh_upper", "gh_lower")


def _limit_table(n: int, spacing: float, workers: int) -> DistanceTable:
    return full_chart_grid(LimitHemisphere(n), spacing).row_table(workers)


def distortion_projection(params: WarpParams, epsilon: float, tol: float = 1e-8, seed: int = 42,
                          workers: int = 1, method: str = "graph",
                          limit_table: DistanceTable | None = None) -> DistortionReport:
    """Distortion of the projection (r, alpha, beta) -> (r, beta) on an epsilon-net.

    The net is built on the sphere-family chart; its image is a finite subset
    of the limit hemisphere and the correspondence pairs each point with its
    image.  ``method="shooting"`` fills both matrices with the shooting
    solver instead of graph tables (practical only for small nets).
    """
    if not epsilon > 0:
        raise DomainError("epsilon must be > 0")
    spacing = min(epsilon / 3, 0.05)
    spec_a = SphereDWP(params)
    table_a = full_chart_grid(spec_a, spacing).row_table(workers)
    table_b = limit_table or _limit_table(params.n, spacing, workers)
    if table_b.grid.shape[:2] != table_a.grid.shape[:2]:
        raise DomainError("limit table does not match the net grid")
    net = build_net(spec_a, epsilon, seed, table=table_a)
    ia, _, la = table_a.grid.unravel(net.nodes)
    img_nodes = table_b.grid.index(ia, la)
    uniq = np.unique(img_nodes)
    cov_b = covering_radius(table_b, uniq)
    if method == "graph":
        mat_a = net_matrix(table_a, net.nodes, tol)
        mat_b = net_matrix(table_b, img_nodes, tol)
    elif method == "shooting":
        mat_a = shooting_matrix(spec_a, net.points, tol)
        mat_b = shooting_matrix(LimitHemisphere(params.n), [table_b.grid.point(int(x)) for x in img_nodes], tol)
    else:
        raise DomainError(f"unknown method {method!r}")
    dis = np.abs(mat_a.entries - mat_b.entries)
    flat = int(np.argmax(dis))
    pair = (flat // dis.shape[0], flat % dis.shape[0])
    distortion = float(dis.max())
    # the image set may cover the limit space less tightly than epsilon
    gh_upper = distortion / 2 + epsilon + max(epsilon, cov_b)
    uniq_pos = np.searchsorted(img_nodes[np.argsort(img_nodes, kind="stable")], uniq)
    order = np.argsort(img_nodes, kind="stable")[uniq_pos]
    gh_lower = gh_lower_bound(mat_a, DistanceMatrix(len(order), mat_b.entries[np.ix_(order, order)], tol))
    return DistortionReport(
        lam=params.lam,
        epsilon=epsilon,
        distortion=distortion,
        argmax_pair=pair,
        gh_upper=gh_upper,
        gh_lower=gh_lower,
        net_size_A=len(net.nodes),
        net_size_B=len(uniq),
        covering_radius_A=net.covering_radius,
        covering_radius_B=cov_b,
    )


def convergence_sweep(n: int, m: int, lambda_list, epsilon: float, seed: int = 42,
                      workers: int = 1) -> list[DistortionReport]:
    lams = [float(x) for x in lambda_list]
    if any(b < a for a, b in zip(lams, lams[1:])):
        raise DomainError("lambda_list must be nondecreasing")
    spacing = min(epsilon / 3, 0.05)
    table_b = _limit_table(n, spacing, workers)
    return [
        distortion_projection(WarpParams(lam, m, n), epsilon, seed=seed, workers=workers, limit_table=table_b)
        for lam in lams
    ]


def fiber_bound(lam: float) -> float:
    """pi * (1 + lam^2)^(-1/4): largest possible cost of an alpha move at fixed r."""
    return math.pi * (1.0 + lam * lam) ** -0.25


# -- covering dimension ------------------------------------------------------

BALL_RADIUS = 0.6

@dataclass(frozen=True)
class ProbeResult:
    slope: float
    epsilons: tuple[float, ...]
    counts: tuple[int, ...]
    residual: float
    unreliable: bool

    def csv_rows(self) -> list[dict]:
        return [{"epsilon": e, "covering_number": c} for e, c in zip(self.epsilons, self.counts)]


PROBE_COLUMNS = ("epsilon", "covering_number")


def _greedy_count_1d(xs: np.ndarray, reach: float) -> int:
    # xs sorted, distance increasing in the gap, balls reach `reach` in gap:
    # sweep left to right, centring each ball at the first uncovered point
    count, i, n = 0, 0, len(xs)
    while i < n:
        count += 1
        i = int(np.searchsorted(xs, xs[i] + reach, side="right"))
    return count


def _greedy_count(table: DistanceTable, nodes: np.ndarray, eps: float) -> int:
    uncovered = np.ones(len(nodes), dtype=bool)
    count = 0
    while uncovered.any():
        c = nodes[int(np.argmax(uncovered))]
        d = table.lookup(np.full(len(nodes), c), nodes)
        uncovered &= d > eps
        count += 1
    return count


def _fit(eps: np.ndarray, counts: np.ndarray) -> tuple[float, float]:
    x = np.log(1.0 / eps)
    y = np.log(counts)
    A = np.column_stack([x, np.ones_like(x)])
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    resid = y - A @ coef
    return float(coef[0]), float(np.sqrt(np.mean(resid ** 2)))


def singular_profile(spec: MetricSpec, gaps: np.ndarray, tol: float = 1e-8) -> np.ndarray:
    """Distance between two boundary points as a function of their fiber gap."""
    return np.array([boundary_distance(spec, (0.0, 0.0), (0.0, float(g)), tol).value for g in gaps])


def dimension_probe(spec: MetricSpec, region: str, epsilon_list, tol: float = 1e-8,
                    workers: int = 1) -> ProbeResult:
    """Log-log slope of greedy covering numbers N(eps) of a region.

    Regions: ``"equator-band"`` is the completion boundary (phi = 0 in the
    hemisphere, x = 0 in the Grushin halfplane), whose distances depend only
    on the fiber gap and come from :func:`boundary_distance`;
    ``"interior-ball"`` is a geodesic ball of radius ``BALL_RADIUS`` in the smooth part,
    measured with graph distances on a grid finer than the smallest epsilon.
    For the sphere family the ball lies in the slice alpha = 0.
    """
    eps = np.asarray([float(e) for e in epsilon_list])
    if len(eps) < 3 or np.any(np.diff(eps) >= 0) or np.any(eps <= 0):
        raise DomainError("epsilon_list must hold >= 3 positive, strictly decreasing values")
    if region == "equator-band":
        if isinstance(spec, SphereDWP):
            raise DomainError("the sphere family has no completion boundary")
        span = math.pi if isinstance(spec, LimitHemisphere) else 1.0
        gaps = np.concatenate([[0.0], np.geomspace(1e-6, span, 48)])
        prof = np.maximum.accumulate(np.concatenate([[0.0], singular_profile(spec, gaps[1:], tol)]))

        # largest gap whose distance stays within eps (profile is nondecreasing)
        fine = np.geomspace(1e-6, span, 20_001)
        dfine = np.interp(fine, gaps, prof)
        xs = np.linspace(0.0, span, 200_001)
        counts = [_greedy_count_1d(xs, float(fine[np.searchsorted(dfine, e, side="right") - 1])) for e in eps]
    elif region == "interior-ball":
        if isinstance(spec, SphereDWP):
            centre, fiber, box = (0.78, math.pi / 2), 1, ((0.05, HALF_PI), (math.pi / 2 - 1.5, math.pi / 2 + 1.5))
        elif isinstance(spec, LimitHemisphere):
            centre, fiber, box = (0.78, math.pi / 2), 0, ((0.05, HALF_PI), (math.pi / 2 - 1.5, math.pi / 2 + 1.5))
        else:
            centre, fiber, box = (1.0, 0.0), 0, ((0.3, 1.8), (-1.2, 1.2))
        spacing = float(eps.min()) / 4
        grid = box_grid(spec, box[0], box[1], spacing, fiber=fiber)
        table = grid.row_table(workers)
        ci = int(np.argmin(np.abs(grid.unodes - centre[0])))
        cj = int(np.argmin(np.abs(grid.fiber_nodes[0] - centre[1])))
        dc = table.from_node(int(grid.index(ci, cj)))
        nodes = np.flatnonzero(dc <= BALL_RADIUS)
        counts = [_greedy_count(table, nodes, e) for e in eps]
    else:
        raise DomainError(f"unknown region {region!r}; use equator-band or interior-ball")
    counts_arr = np.asarray(counts, dtype=float)
    slope, resid = _fit(eps, counts_arr)
    return ProbeResult(slope, tuple(float(e) for e in eps), tuple(int(c) for c in counts), resid, resid > 0.2)


# -- tangent cone at an equator point ---------------------------------------

@dataclass(frozen=True)
class TangentConeReport:
    scales: tuple[float, ...]
    anisotropic: tuple[float, ...]
    isotropic: tuple[float, ...]

    def csv_rows(self, variant: str = "anisotropic") -> list[dict]:
        errs = getattr(self, variant)
        return [{"scale": s, "max_rel_err": e} for s, e in zip(self.scales, errs)]


TANGENT_COLUMNS = ("scale", "max_rel_err")

# 5 x 5 pattern in (radial, equatorial) units around the base point (0, 0)
PATTERN_RADIAL = (0.5, 1.0, 1.5, 2.0, 2.5)
PATTERN_EQUATORIAL = (0.0, 0.25, 0.5, 0.75, 1.0)


def _rel_err(a: float, b: float) -> float:
    if a == 0.0 and b == 0.0:
        return 0.0
    return abs(a - b) / max(abs(b), 1e-300)


def tangent_cone_check(n: int, scales, tol: float = 1e-10) -> TangentConeReport:
    """Compare rescaled hemisphere distances near the equator with Grushin ones.

    Pattern point (a, b) is placed at phi = s*a and beta = s^2*b
    (anisotropic dilation, the one that fixes the Grushin alpha = 1 metric)
    or beta = s*b (isotropic).  Each variant reports, per scale,
    max |d_hemi / s - d_Grushin((a, b), (a', b'))| / d_Grushin over all
    pattern pairs.  Only the anisotropic variant is expected to converge.
    """
    scales = [float(s) for s in scales]
    if any(s > 0.1 or s <= 0 for s in scales) or any(b >= a for a, b in zip(scales, scales[1:])):
        raise DomainError("scales must be strictly decreasing values in (0, 0.1]")
    hemi = LimitHemisphere(n)
    grushin = GrushinHalfplane(1.0)
    # distances depend on (a, a', |b - b'|) only
    keys = sorted({
        (min(a, a2), max(a, a2), abs(b - b2))
        for a in PATTERN_RADIAL for b in PATTERN_EQUATORIAL
        for a2 in PATTERN_RADIAL for b2 in PATTERN_EQUATORIAL
        if (a, b) != (a2, b2)
    })
    ref = {k: distance(grushin, (k[0], 0.0), (k[1], k[2]), tol) for k in keys}
    aniso, iso = [], []
    for s in scales:
        ea = ei = 0.0
        for k in keys:
            d = distance(hemi, (s * k[0], 0.0), (s * k[1], s * s * k[2]), tol) / s
            ea = max(ea, _rel_err(d, ref[k]))
            d = distance(hemi, (s * k[0], 0.0), (s * k[1], s * k[2]), tol) / s
            ei = max(ei, _rel_err(d, ref[k]))
        aniso.append(ea)
        iso.append(ei)
    return TangentConeReport(tuple(scales), tuple(aniso), tuple(iso))


# -- diagnostics -------------------------------------------------------------

def graph_vs_shooting(table: DistanceTable, nodes, tol: float = 1e-8) -> float:
    """Largest relative excess of table distances over shooting distances."""
    worst = 0.0
    nodes = list(nodes)
    for a, b in zip(nodes[::2], nodes[1::2]):
        p, q = table.grid.point(int(a)), table.grid.point(int(b))
        g = float(table.lookup(np.array([a]), np.array([b]))[0])
        if isinstance(table.grid.spec, SphereDWP) or (p[0] > 0 and q[0] > 0):
            d = distance(table.grid.spec, p, q, tol)
        else:
            d = boundary_distance(table.grid.spec, p, q, tol).value
        if d > 0:
            worst = max(worst, (g - d) / d)
    return worst
