import json
import math

import networkx as nx
import numpy as np
import pytest
from scipy.special import zeta

from spinweb import (
    DegreeCurve,
    DegreeDistribution,
    QuantumNetwork,
    assortativity,
    average_shortest_path,
    curve_csv,
    degree_distribution,
    fit_degree_exponent,
    global_clustering,
    knn_curve,
    largest_connected_component,
    local_clustering_curve,
    merge_degree_distributions,
    topology_report,
    write_report,
    write_report_csv,
)
from spinweb.errors import ContractError, ParameterError


def _net(n, edges):
    e = np.array(sorted(tuple(sorted(p)) for p in edges), dtype=np.int32).reshape(-1, 2)
    return QuantumNetwork(n, e, np.ones(e.shape[0], dtype=np.int64))


def _from_nx(g):
    return _net(g.number_of_nodes(), g.edges())


def _triangular_lattice(Lp=6):
    # periodic lattice with right, up, and up-right bonds: degree 6 everywhere
    edges = []
    for x in range(Lp):
        for y in range(Lp):
            i = x + Lp * y
            edges.append((i, (x + 1) % Lp + Lp * y))
            edges.append((i, x + Lp * ((y + 1) % Lp)))
            edges.append((i, (x + 1) % Lp + Lp * ((y + 1) % Lp)))
    return _net(Lp * Lp, edges)


def test_triangle_exact_values():
    net = _net(3, [(0, 1), (0, 2), (1, 2)])
    d, se = average_shortest_path(net)
    assert d == 1.0 and se == 0.0
    assert global_clustering(net) == 1.0
    assert assortativity(net) is None  # uniform degree: zero variance
    curve, binned, slope = local_clustering_curve(net)
    assert curve.k.tolist() == [2] and curve.value.tolist() == [1.0]
    assert slope is None


def test_path_and_cycle_exact_values():
    path = _net(3, [(0, 1), (1, 2)])
    d, _ = average_shortest_path(path)
    assert abs(d - 4.0 / 3.0) < 1e-12
    assert global_clustering(path) == 0.0
    cycle = _net(5, [(i, (i + 1) % 5) for i in range(5)])
    d, se = average_shortest_path(cycle)
    assert d == 1.5 and se == 0.0


def test_star_exact_values():
    star = _net(5, [(0, k) for k in range(1, 5)])
    assert abs(assortativity(star) - (-1.0)) < 1e-12
    assert global_clustering(star) == 0.0
    knn = knn_curve(star)
    assert knn.k.tolist() == [1, 4]
    assert knn.value.tolist() == [4.0, 1.0]
    assert knn.count.tolist() == [4, 1]


def test_triangular_lattice_clustering_is_two_fifths():
    net = _triangular_lattice(6)
    assert np.array_equal(net.degrees(), np.full(36, 6))
    assert abs(global_clustering(net) - 0.4) < 1e-12
    curve, _, _ = local_clustering_curve(net)
    assert curve.k.tolist() == [6]
    assert abs(curve.value[0] - 0.4) < 1e-12
    assert assortativity(net) is None


@pytest.mark.parametrize("seed", [7, 8, 9])
def test_statistics_match_networkx(seed):
    g = nx.gnp_random_graph(80, 0.06, seed=seed)
    net = _from_nx(g)
    assert abs(global_clustering(net) - nx.transitivity(g)) < 1e-12
    assert abs(assortativity(net) - nx.degree_assortativity_coefficient(g)) < 1e-9
    expect = nx.average_degree_connectivity(g)
    knn = knn_curve(net)
    for k, v in zip(knn.k.tolist(), knn.value.tolist()):
        assert abs(v - expect[k]) < 1e-12
    # per-degree clustering means over nodes with two or more neighbors
    cc = nx.clustering(g)
    deg = dict(g.degree())
    curve, _, _ = local_clustering_curve(net)
    for k, v in zip(curve.k.tolist(), curve.value.tolist()):
        vals = [cc[n] for n in g if deg[n] == k]
        assert abs(v - np.mean(vals)) < 1e-12


@pytest.mark.parametrize("seed", [11, 12])
def test_mean_path_matches_networkx_on_lcc(seed):
    g = nx.gnp_random_graph(70, 0.05, seed=seed)
    lcc = largest_connected_component(_from_nx(g))
    d, _ = average_shortest_path(lcc)
    sub = g.subgraph(max(nx.connected_components(g), key=len))
    assert abs(d - nx.average_shortest_path_length(sub)) < 1e-9


def test_sampled_paths_with_all_sources_reproduce_exact():
    g = nx.gnp_random_graph(50, 0.15, seed=21)
    lcc = largest_connected_component(_from_nx(g))
    exact = average_shortest_path(lcc, mode="exact")
    full = average_shortest_path(lcc, mode="sampled", sources=lcc.n_nodes)
    over = average_shortest_path(lcc, mode="sampled", sources=10 * lcc.n_nodes)
    assert exact == full == over


def test_sampled_paths_are_deterministic_and_close():
    g = nx.gnp_random_graph(300, 0.03, seed=22)
    lcc = largest_connected_component(_from_nx(g))
    exact, _ = average_shortest_path(lcc, mode="exact")
    a = average_shortest_path(lcc, mode="sampled", sources=60, seed=5)
    b = average_shortest_path(lcc, mode="sampled", sources=60, seed=5)
    assert a == b
    assert abs(a[0] - exact) < 5 * a[1] + 0.2


def test_path_errors():
    net = _net(4, [(0, 1), (2, 3)])
    with pytest.raises(ContractError, match="largest component"):
        average_shortest_path(net)
    with pytest.raises(ContractError):
        average_shortest_path(_net(1, []))
    good = _net(2, [(0, 1)])
    with pytest.raises(ParameterError):
        average_shortest_path(good, mode="bogus")
    with pytest.raises(ParameterError):
        average_shortest_path(good, mode="sampled", sources=0)


def test_degree_distribution_counts_isolated_nodes():
    net = _net(5, [(0, 1), (0, 2)])
    dist = degree_distribution(net)
    assert dist.as_dict() == {0: 2, 1: 2, 2: 1}
    assert dist.n_nodes == 5
    assert np.allclose(dist.probabilities(), [0.4, 0.4, 0.2])


def test_merge_degree_distributions():
    a = DegreeDistribution(np.array([1, 3]), np.array([2, 1]))
    b = DegreeDistribution(np.array([3, 5]), np.array([4, 1]))
    m = merge_degree_distributions([a, b])
    assert m.as_dict() == {1: 2, 3: 5, 5: 1}
    with pytest.raises(ParameterError):
        merge_degree_distributions([])


def test_density_binning_hand_case():
    dist = DegreeDistribution(np.array([1, 2, 3, 6]), np.array([4, 2, 1, 1]))
    b = dist.log_binned(ratio=2.0)
    # bins [1,2) [2,4) [4,8): widths 1, 2, 4 in integer degrees
    assert np.allclose(b.k, [math.sqrt(2.0), math.sqrt(8.0), math.sqrt(32.0)])
    assert np.allclose(b.value, [0.5, 0.1875, 0.03125])
    assert b.count.tolist() == [4, 3, 1]


def test_curve_binning_is_count_weighted():
    curve = DegreeCurve(np.array([2.0, 3.0]), np.array([10.0, 20.0]), np.array([1.0, 3.0]))
    b = curve.log_binned(ratio=2.0)
    assert b.k.tolist() == [math.sqrt(8.0)]
    assert b.value.tolist() == [17.5]
    assert b.count.tolist() == [4]
    with pytest.raises(ParameterError):
        curve.log_binned(ratio=1.0)


def _power_law_distribution(gamma, k_min, n, seed):
    ks = np.arange(k_min, 5000)
    pmf = ks.astype(np.float64) ** (-gamma)
    pmf /= pmf.sum()
    cdf = np.cumsum(pmf)
    u = np.random.default_rng(seed).random(n)
    draws = ks[np.searchsorted(cdf, u)]
    counts = np.bincount(draws)
    kk = np.nonzero(counts)[0]
    return DegreeDistribution(kk.astype(np.int64), counts[kk].astype(np.int64))


@pytest.mark.parametrize("gamma", [2.2, 2.5, 3.0])
def test_fit_recovers_known_exponent(gamma):
    dist = _power_law_distribution(gamma, 2, 20000, seed=int(gamma * 10))
    fit = fit_degree_exponent(dist)
    assert fit.status == "ok"
    assert abs(fit.gamma - gamma) < 0.1
    assert fit.k_min <= 4
    assert fit.n_tail >= 10000
    assert fit.error is not None and fit.error < 0.05
    assert fit.binned_slope is not None and fit.binned_slope < -1.5


def test_fit_unfittable_cases():
    # too few tail nodes
    small = DegreeDistribution(np.arange(1, 11), np.full(10, 3))
    assert fit_degree_exponent(small).status == "unfittable"
    # a single distinct degree never yields two tail degrees
    flat = DegreeDistribution(np.array([4]), np.array([500]))
    assert fit_degree_exponent(flat).status == "unfittable"
    # lowering min_tail rescues the small case
    assert fit_degree_exponent(small, min_tail=10).status == "ok"


def test_curve_csv_format():
    curve = DegreeCurve(np.array([1.0, 2.0]), np.array([0.5, 0.25]), np.array([4, 2]))
    text = curve_csv(curve)
    lines = text.splitlines()
    assert lines[0] == "k,value,count"
    assert lines[1].startswith("1.0,0.5,4")


def test_report_roundtrip(tmp_path):
    net = _triangular_lattice(4)
    rep = topology_report(net, path_seed=3)
    assert rep.path_mode == "exact"
    assert rep.clustering_global is not None
    path = tmp_path / "report.json"
    write_report(rep, path)
    data = json.loads(path.read_text())
    assert data["report_version"] == 1
    assert data["n_nodes"] == 16
    assert data["degree_counts"] == {"6": 16}
    assert data["mean_path"] == rep.mean_path
    assert data["fit"]["status"] == "unfittable"
    files = write_report_csv(rep, tmp_path)
    for f in files:
        lines = open(f).read().splitlines()
        assert lines[0] == "k,value,count"
        assert len(lines) >= 2


def test_global_clustering_none_without_triplets():
    net = _net(2, [(0, 1)])
    assert global_clustering(net) is None
    curve, binned, slope = local_clustering_curve(net)
    assert curve is None and binned is None and slope is None


def test_local_slope_on_synthetic_hierarchy():
    # graph built so that mean C(k) ~ k^-1: star-of-cliques construction
    rng = np.random.default_rng(33)
    edges = []
    node = 0
    centers = []
    for size in [3] * 40 + [5] * 25 + [9] * 15 + [17] * 8 + [33] * 4:
        ids = list(range(node, node + size))
        node += size
        centers.append(ids[0])
        for i, a in enumerate(ids[1:], 1):
            edges.append((ids[0], a))
        for a, b in zip(ids[1:], ids[2:] + ids[1:2]):
            edges.append(tuple(sorted((a, b))))
    for a, b in zip(centers, centers[1:]):
        edges.append(tuple(sorted((a, b))))
    net = _net(node, sorted(set(edges)))
    curve, binned, slope = local_clustering_curve(net)
    assert slope is not None
    assert -1.6 < slope < -0.5
