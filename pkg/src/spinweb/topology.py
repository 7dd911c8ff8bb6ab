"""Network statistics: degrees, distances, correlations, clustering.

Everything operates on the simple unweighted view of a network.  Heavy
tails are summarized two ways: a discrete maximum-likelihood power-law
fit with KS-selected lower cutoff (the quoted exponent), and a
log-binned least-squares slope kept as a plotting-style diagnostic.
Degenerate statistics come back as None rather than a silent zero; the
one exception is global clustering on a triangle-free graph that still
has paths, which is genuinely zero.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize_scalar
from scipy.special import zeta

from ._topology_kernel import bfs_mean_distance, triangle_counts
from .errors import ContractError, ParameterError
from .network import QuantumNetwork

SAMPLED_PATH_THRESHOLD = 20_000
SAMPLED_PATH_SOURCES = 1000
FIT_MIN_TAIL = 50
BIN_RATIO = 2.0


@dataclass(frozen=True)
class DegreeCurve:
    """A per-degree curve: value and contributing-node count at each k."""

    k: np.ndarray
    value: np.ndarray
    count: np.ndarray

    def log_binned(self, ratio: float = BIN_RATIO) -> "DegreeCurve":
        """Count-weighted bin means at geometric bin centers."""
        return _log_bin(self.k, self.value, self.count, ratio, density=False)

    def rows(self):
        return zip(self.k.tolist(), self.value.tolist(), self.count.tolist())


@dataclass(frozen=True)
class DegreeDistribution:
    """Exact degree counts of one network."""

    k: np.ndarray
    counts: np.ndarray

    @property
    def n_nodes(self) -> int:
        return int(self.counts.sum())

    def probabilities(self) -> np.ndarray:
        return self.counts / self.counts.sum()

    def as_dict(self) -> dict[int, int]:
        return {int(a): int(b) for a, b in zip(self.k, self.counts)}

    def log_binned(self, ratio: float = BIN_RATIO) -> DegreeCurve:
        """P(k) as a per-unit-degree density over geometric bins (k >= 1)."""
        keep = self.k >= 1
        return _log_bin(
            self.k[keep],
            self.counts[keep] / max(self.n_nodes, 1),
            self.counts[keep],
            ratio,
            density=True,
        )


def merge_degree_distributions(dists) -> DegreeDistribution:
    """Pool degree counts across networks (for ensemble-level fits)."""
    total: dict[int, int] = {}
    for d in dists:
        for a, b in zip(d.k.tolist(), d.counts.tolist()):
            total[a] = total.get(a, 0) + b
    if not total:
        raise ParameterError("cannot merge zero distributions")
    ks = np.array(sorted(total), dtype=np.int64)
    return DegreeDistribution(ks, np.array([total[a] for a in ks], dtype=np.int64))


@dataclass(frozen=True)
class FitResult:
    """Discrete power-law fit of a degree tail."""

    status: str
    gamma: float | None = None
    error: float | None = None
    k_min: int | None = None
    ks_distance: float | None = None
    n_tail: int = 0
    binned_slope: float | None = None


def _log_bin(k, value, count, ratio, density) -> DegreeCurve:
    k = np.asarray(k, dtype=np.float64)
    value = np.asarray(value, dtype=np.float64)
    count = np.asarray(count, dtype=np.float64)
    pos = (k >= 1) & (count > 0)
    k, value, count = k[pos], value[pos], count[pos]
    if k.size == 0:
        z = np.empty(0)
        return DegreeCurve(z, z.copy(), z.copy())
    if ratio <= 1.0:
        raise ParameterError(f"bin ratio must exceed 1, got {ratio!r}")
    top = int(np.ceil(math.log(k.max() + 1e-12) / math.log(ratio))) + 1
    edges = ratio ** np.arange(top + 1)
    idx = np.searchsorted(edges, k, side="right") - 1
    centers, vals, cnts = [], [], []
    for b in range(top):
        m = idx == b
        if not m.any():
            continue
        c = count[m].sum()
        if density:
            # counts-per-node spread over the integer degrees in the bin
            lo, hi = edges[b], edges[b + 1]
            width = max(math.floor(hi) - math.floor(lo), 1)
            vals.append(value[m].sum() / width)
        else:
            vals.append(float(np.average(value[m], weights=count[m])))
        centers.append(math.sqrt(edges[b] * edges[b + 1]))
        cnts.append(c)
    return DegreeCurve(np.array(centers), np.array(vals), np.array(cnts))


def degree_distribution(net: QuantumNetwork) -> DegreeDistribution:
    """Exact degree histogram of the unweighted simple view."""
    if net.n_nodes == 0:
        raise ParameterError("degree distribution of an empty network")
    deg = net.degrees()
    counts = np.bincount(deg)
    ks = np.nonzero(counts)[0]
    return DegreeDistribution(ks.astype(np.int64), counts[ks].astype(np.int64))


def _tail_loglik(gamma, k_min, ks, cnts):
    return -cnts.sum() * math.log(zeta(gamma, k_min)) - gamma * float(np.dot(cnts, np.log(ks)))


def fit_degree_exponent(dist: DegreeDistribution, min_tail: int = FIT_MIN_TAIL) -> FitResult:
    """Discrete MLE of the degree exponent with KS-chosen lower cutoff.

    Every observed degree >= 1 is a k_min candidate as long as at least
    ``min_tail`` nodes and two distinct degrees remain at or above it;
    the reported fit minimizes the KS distance between the empirical
    tail CDF and the fitted Hurwitz-zeta law.  The quoted error is the
    curvature standard error of the log-likelihood at the optimum.
    """
    keep = dist.k >= 1
    ks_all = dist.k[keep].astype(np.float64)
    cnt_all = dist.counts[keep].astype(np.float64)
    best = None
    for i in range(ks_all.size):
        k_min = ks_all[i]
        ks = ks_all[i:]
        cnts = cnt_all[i:]
        n = cnts.sum()
        if n < min_tail or ks.size < 2:
            continue
        res = minimize_scalar(
            lambda g: -_tail_loglik(g, k_min, ks, cnts),
            bounds=(1.000001, 12.0),
            method="bounded",
            options={"xatol": 1e-7},
        )
        gamma = float(res.x)
        # one-sided KS over the observed tail degrees
        emp = np.cumsum(cnts) / n
        model = 1.0 - zeta(gamma, ks + 1.0) / zeta(gamma, k_min)
        d = float(np.abs(emp - model).max())
        if best is None or d < best[0]:
            best = (d, gamma, int(k_min), int(n))
    if best is None:
        return FitResult(status="unfittable", binned_slope=_binned_slope(dist))
    d, gamma, k_min, n_tail = best
    i = int(np.searchsorted(ks_all, k_min))
    ks, cnts = ks_all[i:], cnt_all[i:]
    h = 1e-4
    curv = (
        _tail_loglik(gamma + h, k_min, ks, cnts)
        - 2.0 * _tail_loglik(gamma, k_min, ks, cnts)
        + _tail_loglik(gamma - h, k_min, ks, cnts)
    ) / (h * h)
    err = 1.0 / math.sqrt(-curv) if curv < 0 else None
    return FitResult("ok", gamma, err, k_min, d, n_tail, _binned_slope(dist))


def _binned_slope(dist: DegreeDistribution) -> float | None:
    """Least-squares log-log slope of the binned P(k), a diagnostic."""
    binned = dist.log_binned()
    m = binned.value > 0
    if np.count_nonzero(m) < 2:
        return None
    x = np.log(binned.k[m])
    y = np.log(binned.value[m])
    return float(np.polyfit(x, y, 1)[0])


def _csr(net: QuantumNetwork):
    """Sorted-neighbor CSR arrays of the simple unweighted view."""
    n = net.n_nodes
    e = net.edges
    u = np.concatenate([e[:, 0], e[:, 1]]).astype(np.int64)
    v = np.concatenate([e[:, 1], e[:, 0]]).astype(np.int64)
    order = np.argsort(u * n + v)
    adj = v[order].astype(np.int32)
    ptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(np.bincount(u, minlength=n), out=ptr[1:])
    return ptr, adj


def average_shortest_path(
    net: QuantumNetwork,
    mode: str = "auto",
    sources: int = SAMPLED_PATH_SOURCES,
    seed: int = 0,
) -> tuple[float, float]:
    """Mean hop distance and its standard error across source nodes.

    Exact mode traverses from every node; sampled mode from ``sources``
    nodes drawn without replacement and visited in ascending id order,
    so sampling all nodes reproduces the exact value bit for bit.
    ``auto`` switches to sampling above 20000 nodes.
    """
    n = net.n_nodes
    if n < 2:
        raise ContractError("average path needs at least two nodes")
    if mode == "auto":
        mode = "sampled" if n > SAMPLED_PATH_THRESHOLD else "exact"
    if mode == "exact":
        src = np.arange(n, dtype=np.int32)
    elif mode == "sampled":
        if not 1 <= sources:
            raise ParameterError(f"need at least one source, got {sources!r}")
        if sources >= n:
            src = np.arange(n, dtype=np.int32)
        else:
            rng = np.random.default_rng(seed)
            src = np.sort(rng.choice(n, size=sources, replace=False)).astype(np.int32)
    else:
        raise ParameterError(f"unknown path mode {mode!r}")
    ptr, adj = _csr(net)
    means = bfs_mean_distance(ptr, adj, src, n)
    if (means < 0).any():
        raise ContractError("network is disconnected; pass its largest component")
    se = float(means.std(ddof=1) / math.sqrt(means.size)) if means.size > 1 else 0.0
    return float(means.mean()), se


def assortativity(net: QuantumNetwork) -> float | None:
    """Pearson correlation of end-point degrees over directed edge ends."""
    if net.n_edges == 0:
        raise ParameterError("assortativity needs at least one edge")
    deg = net.degrees().astype(np.float64)
    a = np.concatenate([deg[net.edges[:, 0]], deg[net.edges[:, 1]]])
    b = np.concatenate([deg[net.edges[:, 1]], deg[net.edges[:, 0]]])
    va = a.var()
    if va == 0.0:
        return None
    return float(((a - a.mean()) * (b - b.mean())).mean() / va)


def knn_curve(net: QuantumNetwork) -> DegreeCurve:
    """Mean neighbor degree averaged over nodes of each degree."""
    if net.n_nodes == 0:
        raise ParameterError("knn curve of an empty network")
    deg = net.degrees().astype(np.float64)
    s = np.zeros(net.n_nodes)
    if net.n_edges:
        np.add.at(s, net.edges[:, 0], deg[net.edges[:, 1]])
        np.add.at(s, net.edges[:, 1], deg[net.edges[:, 0]])
    live = deg > 0
    knn = s[live] / deg[live]
    dl = deg[live].astype(np.int64)
    ks = np.unique(dl)
    value = np.array([knn[dl == a].mean() for a in ks])
    count = np.array([(dl == a).sum() for a in ks], dtype=np.int64)
    return DegreeCurve(ks, value, count)


def _local_clustering(net: QuantumNetwork):
    deg = net.degrees()
    ptr, adj = _csr(net)
    tri = triangle_counts(ptr, adj, net.edges.astype(np.int64))
    eligible = deg >= 2
    denom = deg * (deg - 1)
    c = np.zeros(net.n_nodes)
    c[eligible] = 2.0 * tri[eligible] / denom[eligible]
    return c, tri, deg, eligible


def global_clustering(net: QuantumNetwork) -> float | None:
    """Closed ordered triplets over ordered paths of length two (Eq. form
    6T / sum k(k-1)); None when no node has two neighbors."""
    if net.n_nodes == 0:
        raise ParameterError("clustering of an empty network")
    deg = net.degrees()
    denom = int((deg * (deg - 1)).sum())
    if denom == 0:
        return None
    ptr, adj = _csr(net)
    tri = triangle_counts(ptr, adj, net.edges.astype(np.int64))
    return float(2.0 * tri.sum() / denom)


def local_clustering_curve(net: QuantumNetwork, ratio: float = BIN_RATIO):
    """Mean local clustering per degree plus its binned log-log slope.

    Returns (curve, binned curve, slope); nodes of degree < 2 are
    excluded, the slope uses bins holding at least 5 nodes with a
    positive mean, and it is None when fewer than two such bins exist.
    """
    c, _, deg, eligible = _local_clustering(net)
    if not eligible.any():
        return None, None, None
    dl = deg[eligible].astype(np.int64)
    cl = c[eligible]
    ks = np.unique(dl)
    value = np.array([cl[dl == a].mean() for a in ks])
    count = np.array([(dl == a).sum() for a in ks], dtype=np.int64)
    curve = DegreeCurve(ks, value, count)
    binned = curve.log_binned(ratio)
    m = (binned.count >= 5) & (binned.value > 0)
    slope = None
    if np.count_nonzero(m) >= 2:
        slope = float(np.polyfit(np.log(binned.k[m]), np.log(binned.value[m]), 1)[0])
    return curve, binned, slope


@dataclass
class TopologyReport:
    """Every reported statistic of one connected network."""

    n_nodes: int
    n_edges: int
    degrees: DegreeDistribution
    fit: FitResult
    mean_path: float
    mean_path_se: float
    path_mode: str
    path_sources: int
    path_seed: int
    assortativity: float | None
    knn: DegreeCurve
    clustering_global: float | None
    local_curve: DegreeCurve | None
    local_slope: float | None
    bin_ratio: float = BIN_RATIO
    provenance: dict = field(default_factory=dict)

    REPORT_VERSION = 1

    def to_json(self) -> dict:
        def curve(c):
            if c is None:
                return None
            return {
                "k": [float(x) for x in c.k],
                "value": [float(x) for x in c.value],
                "count": [int(x) for x in c.count],
            }

        return {
            "report_version": self.REPORT_VERSION,
            "n_nodes": self.n_nodes,
            "n_edges": self.n_edges,
            "degree_counts": {str(int(a)): int(b) for a, b in zip(self.degrees.k, self.degrees.counts)},
            "degree_binned": curve(self.degrees.log_binned(self.bin_ratio)),
            "fit": {
                "status": self.fit.status,
                "gamma": self.fit.gamma,
                "error": self.fit.error,
                "k_min": self.fit.k_min,
                "ks_distance": self.fit.ks_distance,
                "n_tail": self.fit.n_tail,
                "binned_slope": self.fit.binned_slope,
            },
            "mean_path": self.mean_path,
            "mean_path_se": self.mean_path_se,
            "path_mode": self.path_mode,
            "path_sources": self.path_sources,
            "path_seed": self.path_seed,
            "assortativity": self.assortativity,
            "knn": curve(self.knn),
            "knn_binned": curve(self.knn.log_binned(self.bin_ratio)),
            "clustering_global": self.clustering_global,
            "local_clustering": curve(self.local_curve),
            "local_clustering_binned": curve(
                self.local_curve.log_binned(self.bin_ratio) if self.local_curve else None
            ),
            "local_slope": self.local_slope,
            "bin_ratio": self.bin_ratio,
            "provenance": self.provenance,
        }


def topology_report(
    net: QuantumNetwork,
    path_mode: str = "auto",
    path_sources: int = SAMPLED_PATH_SOURCES,
    path_seed: int = 0,
    bin_ratio: float = BIN_RATIO,
) -> TopologyReport:
    """Assemble the full statistics report for one connected network."""
    if net.n_nodes == 0:
        raise ContractError("cannot analyze an empty network")
    dist = degree_distribution(net)
    fit = fit_degree_exponent(dist)
    if net.n_nodes >= 2:
        mean_path, path_se = average_shortest_path(net, path_mode, path_sources, path_seed)
    else:
        mean_path, path_se = 0.0, 0.0
    mode = path_mode
    if mode == "auto":
        mode = "sampled" if net.n_nodes > SAMPLED_PATH_THRESHOLD else "exact"
    r = assortativity(net) if net.n_edges else None
    knn = knn_curve(net)
    cg = global_clustering(net)
    local, _, slope = local_clustering_curve(net, bin_ratio)
    prov = {
        k: (v.tolist() if isinstance(v, np.ndarray) else v) for k, v in net.provenance.items()
    }
    return TopologyReport(
        n_nodes=net.n_nodes,
        n_edges=net.n_edges,
        degrees=dist,
        fit=fit,
        mean_path=mean_path,
        mean_path_se=path_se,
        path_mode=mode,
        path_sources=path_sources,
        path_seed=path_seed,
        assortativity=r,
        knn=knn,
        clustering_global=cg,
        local_curve=local,
        local_slope=slope,
        bin_ratio=bin_ratio,
        provenance=prov,
    )


def write_report(report: TopologyReport, path) -> None:
    with open(path, "w") as fh:
        json.dump(report.to_json(), fh, indent=2, sort_keys=True)
        fh.write("\n")


def curve_csv(curve: DegreeCurve) -> str:
    """Render a curve as `k,value,count` rows with a header."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["k", "value", "count"])
    for k, v, c in curve.rows():
        w.writerow([k, v, int(c)])
    return buf.getvalue()


def write_report_csv(report: TopologyReport, directory) -> list[str]:
    """Write each curve as a CSV next to the JSON; returns the paths."""
    import os

    out = []
    dist = report.degrees
    curves = {
        "degree": DegreeCurve(
            dist.k.astype(np.float64), dist.probabilities(), dist.counts
        ),
        "degree_binned": dist.log_binned(report.bin_ratio),
        "knn": report.knn,
        "knn_binned": report.knn.log_binned(report.bin_ratio),
    }
    if report.local_curve is not None:
        curves["local_clustering"] = report.local_curve
        curves["local_clustering_binned"] = report.local_curve.log_binned(report.bin_ratio)
    for name, c in curves.items():
        p = os.path.join(directory, f"{name}.csv")
        with open(p, "w") as fh:
            fh.write(curve_csv(c))
        out.append(p)
    return out
