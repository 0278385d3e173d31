import math

import numpy as np
import pytest

from grushin_ricci import gh_lab as g
from grushin_ricci.geodesics import GrushinHalfplane, LimitHemisphere, SphereDWP
from grushin_ricci.params import DomainError, WarpParams

HEMI = LimitHemisphere(2)


@pytest.fixture(scope="module")
def hemi_table():
    return g.full_chart_grid(HEMI, 0.2 / 3).row_table()


def test_build_net_hemisphere(hemi_table):
    net = g.build_net(HEMI, 0.2, table=hemi_table)
    assert 10 <= len(net.points) <= 400
    assert net.covering_verified and net.covering_radius <= 0.2
    assert g.covering_radius(hemi_table, net.nodes) == pytest.approx(net.covering_radius)
    again = g.build_net(HEMI, 0.2, table=hemi_table)
    assert again.points == net.points
    other = g.build_net(HEMI, 0.2, seed=7, table=hemi_table)
    assert other.covering_verified


def test_single_point_net():
    net = g.build_net(SphereDWP(WarpParams(1.0, 8, 2)), 3.2, spacing=0.2)
    assert len(net.points) == 1 and net.covering_verified


def test_build_net_rejects_bad_epsilon():
    with pytest.raises(DomainError):
        g.build_net(HEMI, 0.0)
    with pytest.raises(DomainError):
        g.full_chart_grid(GrushinHalfplane(1.0), 0.1)


def test_table_is_symmetric_and_metric(hemi_table):
    rng = np.random.default_rng(0)
    nodes = rng.choice(hemi_table.grid.size, 60, replace=False)
    mat = g.net_matrix(hemi_table, nodes)
    raw = hemi_table.lookup(nodes[:, None], nodes[None, :])
    assert np.max(np.abs(raw - raw.T)) <= 1e-12
    assert mat.triangle_violation(1000) <= 3 * mat.tol
    assert np.all(np.diag(mat.entries) == 0)


def test_table_close_to_shooting(hemi_table):
    rng = np.random.default_rng(1)
    nodes = rng.choice(hemi_table.grid.size, 40, replace=False)
    # graph distances are upper bounds within a few percent of the geodesic distance
    assert 0.0 <= g.graph_vs_shooting(hemi_table, nodes) <= 0.05


def test_distance_matrix_validation():
    with pytest.raises(ValueError):
        g.DistanceMatrix(2, np.array([[0.0, -1.0], [-1.0, 0.0]]), 1e-8)
    with pytest.raises(ValueError):
        g.DistanceMatrix(2, np.zeros((3, 3)), 1e-8)
    m = g.DistanceMatrix(2, np.array([[5.0, 1.0], [3.0, 0.0]]), 1e-8)
    assert m.entries[0, 1] == m.entries[1, 0] == 2.0 and m.entries[0, 0] == 0.0


def test_gh_lower_bound_examples():
    rng = np.random.default_rng(3)
    x = rng.uniform(size=(8, 2))
    d = np.linalg.norm(x[:, None] - x[None], axis=-1)
    m = g.DistanceMatrix(8, d, 1e-12)
    assert g.gh_lower_bound(m, m) == 0.0
    point = g.DistanceMatrix(1, np.zeros((1, 1)), 1e-12)
    assert g.gh_lower_bound(point, m) == pytest.approx(d.max() / 2)


@pytest.fixture(scope="module")
def small_sweep():
    return g.convergence_sweep(2, 8, [1.0, 1.0, 10.0], 0.4)


def test_sweep_invariants(small_sweep):
    a, b, c = small_sweep
    assert a.csv_row() == b.csv_row()
    assert c.distortion < a.distortion
    for rep in small_sweep:
        assert rep.distortion >= 0
        assert rep.gh_lower <= rep.gh_upper + 2 * rep.epsilon
        assert rep.gh_upper >= rep.distortion / 2 + 2 * rep.epsilon
        assert rep.covering_radius_A <= rep.epsilon
        assert rep.distortion <= g.fiber_bound(rep.lam) + 4 * rep.epsilon
        i, j = rep.argmax_pair
        assert i != j
    assert list(a.csv_row()) == list(g.SWEEP_COLUMNS)


def test_sweep_other_dimensions():
    reps = g.convergence_sweep(3, 16, [1.0, 10.0], 0.4)
    assert reps[1].distortion < reps[0].distortion


def test_sweep_requires_sorted_lambdas():
    with pytest.raises(DomainError):
        g.convergence_sweep(2, 8, [5.0, 1.0], 0.4)


def test_distortion_with_shooting_matrices():
    graph = g.distortion_projection(WarpParams(2.0, 8, 2), 0.9)
    shot = g.distortion_projection(WarpParams(2.0, 8, 2), 0.9, method="shooting")
    assert shot.net_size_A == graph.net_size_A
    # graph distances overshoot by a few percent at most
    assert shot.distortion == pytest.approx(graph.distortion, abs=0.1)


def test_fiber_bound_decreases():
    vals = [g.fiber_bound(l) for l in (1, 2, 5, 10, 20, 50)]
    assert all(b < a for a, b in zip(vals, vals[1:]))
    assert g.fiber_bound(1.0) == pytest.approx(math.pi * 2 ** -0.25)


def test_greedy_count_1d():
    xs = np.linspace(0, 1, 101)
    assert g._greedy_count_1d(xs, 0.1) == 10
    assert g._greedy_count_1d(xs, 2.0) == 1


def test_dimension_probe_equator_band():
    res = g.dimension_probe(HEMI, "equator-band", [0.2, 0.1, 0.05, 0.025])
    assert 1.6 <= res.slope <= 2.4 and not res.unreliable
    assert list(res.csv_rows()[0]) == list(g.PROBE_COLUMNS)
    assert all(b > a for a, b in zip(res.counts, res.counts[1:]))
    res = g.dimension_probe(GrushinHalfplane(1.0), "equator-band", [0.2, 0.1, 0.05, 0.025])
    assert 1.6 <= res.slope <= 2.4


def test_dimension_probe_validation():
    with pytest.raises(DomainError):
        g.dimension_probe(HEMI, "equator-band", [0.1, 0.2, 0.05])
    with pytest.raises(DomainError):
        g.dimension_probe(HEMI, "equator-band", [0.2, 0.1])
    with pytest.raises(DomainError):
        g.dimension_probe(SphereDWP(WarpParams(1.0, 8, 2)), "equator-band", [0.2, 0.1, 0.05])
    with pytest.raises(DomainError):
        g.dimension_probe(HEMI, "annulus", [0.2, 0.1, 0.05])


def test_tangent_cone_validation_and_zero_pair():
    with pytest.raises(DomainError):
        g.tangent_cone_check(2, [0.2, 0.1])
    with pytest.raises(DomainError):
        g.tangent_cone_check(2, [0.05, 0.1])
    assert g._rel_err(0.0, 0.0) == 0.0
