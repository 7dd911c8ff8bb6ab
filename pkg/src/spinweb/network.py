"""Quantum networks: which node regions share a spin cluster.

A cluster decomposition plus a node layout induces a weighted graph on
the nodes.  A cluster links a node pair when it touches exactly those
two node regions; the relaxed rule (``NODE_EXCLUSIVE``) tolerates
cluster sites outside every node, the strict rule (``PAIR_CONTAINED``)
does not.  Edge weight counts the linking clusters.  Everything here is
array-based: clusters touching one node or three or more contribute
nothing and drop out in bulk.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .clusters import ClusterDecomposition
from .errors import ContractError, FormatError, ParameterError
from .placement import NodeLayout


class LinkRule(Enum):
    """How strictly a shared cluster must be confined to its node pair."""

    NODE_EXCLUSIVE = "node_exclusive"
    PAIR_CONTAINED = "pair_contained"


def parse_rule(text) -> LinkRule:
    if isinstance(text, LinkRule):
        return text
    try:
        return LinkRule(str(text))
    except ValueError:
        raise ParameterError(f"unknown link rule {text!r}") from None


@dataclass(frozen=True, eq=False)
class QuantumNetwork:
    """An undirected weighted graph on densely indexed nodes.

    ``edges`` is an (m, 2) array with u < v, sorted lexicographically;
    ``weights`` holds the positive shared-cluster multiplicities.
    ``provenance`` records the rule, the source seeds, and, after any
    re-indexing, the original layout node id of every current node.
    """

    n_nodes: int
    edges: np.ndarray
    weights: np.ndarray
    provenance: dict = field(default_factory=dict)

    def __post_init__(self):
        e, w = self.edges, self.weights
        if e.ndim != 2 or e.shape[1] != 2 or w.shape != (e.shape[0],):
            raise ContractError("edges must be (m, 2) with matching weights")
        if e.shape[0]:
            if e.min() < 0 or e.max() >= self.n_nodes:
                raise ContractError("edge endpoint outside the node set")
            if not (e[:, 0] < e[:, 1]).all():
                raise ContractError("edges must satisfy u < v")
            key = e[:, 0].astype(np.int64) * self.n_nodes + e[:, 1]
            if not (np.diff(key) > 0).all():
                raise ContractError("edges must be sorted and unique")
            if w.min() < 1:
                raise ContractError("weights must be positive")

    @property
    def n_edges(self) -> int:
        return self.edges.shape[0]

    def degrees(self, weighted: bool = False) -> np.ndarray:
        """Per-node degree; topology metrics use the unweighted view."""
        out = np.zeros(self.n_nodes, dtype=np.int64)
        if self.n_edges:
            w = self.weights if weighted else np.ones(self.n_edges, dtype=np.int64)
            np.add.at(out, self.edges[:, 0], w)
            np.add.at(out, self.edges[:, 1], w)
        return out


def build_network(
    decomp: ClusterDecomposition,
    layout: NodeLayout,
    rule: LinkRule = LinkRule.NODE_EXCLUSIVE,
) -> QuantumNetwork:
    """Link every node pair sharing a cluster under the given rule.

    For each cluster c, T(c) is the set of nodes it touches.  An edge
    (a, b) gains weight 1 per cluster with T(c) = {a, b}; under
    ``PAIR_CONTAINED`` the cluster must also have no site outside the
    two regions.  Isolated nodes stay in the node set.
    """
    rule = parse_rule(rule)
    if decomp.spec.L != layout.L:
        raise ContractError(
            f"decomposition (L={decomp.spec.L}) and layout (L={layout.L}) disagree"
        )
    lab = decomp.labels
    node_of = layout.site_to_node
    k = layout.n_nodes
    nc = decomp.n_clusters

    inside = node_of >= 0
    # distinct (cluster, node) incidences, sorted by cluster then node
    pair_key = lab[inside].astype(np.int64) * k + node_of[inside]
    pair_key = np.unique(pair_key)
    uc = (pair_key // k).astype(np.int64)
    un = (pair_key % k).astype(np.int64)

    touched = np.bincount(uc, minlength=nc)
    good = touched == 2
    if rule is LinkRule.PAIR_CONTAINED:
        outside = np.zeros(nc, dtype=bool)
        outside[lab[~inside]] = True
        good &= ~outside

    sel = good[uc]
    nodes = un[sel].reshape(-1, 2)  # consecutive rows per cluster, ascending
    if nodes.size:
        ekey, weights = np.unique(nodes[:, 0] * k + nodes[:, 1], return_counts=True)
        edges = np.column_stack((ekey // k, ekey % k)).astype(np.int32)
    else:
        edges = np.empty((0, 2), dtype=np.int32)
        weights = np.empty(0, dtype=np.int64)

    prov = {
        "rule": rule.value,
        "instance_seed": decomp.seed,
        "layout_seed": layout.meta.get("seed"),
        "node_ids": np.arange(k, dtype=np.int32),
    }
    return QuantumNetwork(k, edges, weights.astype(np.int64), prov)


def connected_components(net: QuantumNetwork) -> np.ndarray:
    """Component label per node, labels assigned in node-id order."""
    n = net.n_nodes
    comp = np.full(n, -1, dtype=np.int32)
    if n == 0:
        return comp
    # CSR adjacency
    deg = np.zeros(n, dtype=np.int64)
    e = net.edges
    np.add.at(deg, e[:, 0], 1)
    np.add.at(deg, e[:, 1], 1)
    ptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(deg, out=ptr[1:])
    adj = np.empty(2 * e.shape[0], dtype=np.int32)
    pos = ptr[:-1].copy()
    for u, v in e:
        adj[pos[u]] = v
        pos[u] += 1
        adj[pos[v]] = u
        pos[v] += 1
    label = 0
    for s in range(n):
        if comp[s] >= 0:
            continue
        comp[s] = label
        queue = deque([s])
        while queue:
            u = queue.popleft()
            for v in adj[ptr[u] : ptr[u + 1]]:
                if comp[v] < 0:
                    comp[v] = label
                    queue.append(v)
        label += 1
    return comp


def largest_connected_component(net: QuantumNetwork) -> QuantumNetwork:
    """Induced subgraph on the largest component, re-indexed densely.

    Ties go to the component containing the smallest node id.  Because
    component labels are assigned in node-id order, that is simply the
    smallest label among the largest components.  Original layout ids
    ride along in ``provenance["node_ids"]``.
    """
    if net.n_nodes == 0:
        return net
    comp = connected_components(net)
    sizes = np.bincount(comp)
    best = int(np.argmax(sizes))  # first maximum = smallest member id
    members = np.nonzero(comp == best)[0]
    remap = np.full(net.n_nodes, -1, dtype=np.int32)
    remap[members] = np.arange(members.size, dtype=np.int32)
    keep = remap[net.edges[:, 0]] >= 0
    edges = remap[net.edges[keep]]
    prov = dict(net.provenance)
    old_ids = net.provenance.get("node_ids")
    prov["node_ids"] = old_ids[members] if old_ids is not None else members.astype(np.int32)
    return QuantumNetwork(int(members.size), edges, net.weights[keep].copy(), prov)


def entanglement_entropy(decomp: ClusterDecomposition, region) -> int:
    """Clusters straddling the region boundary, the RG entropy in log 2.

    Counts cluster ids with at least one site inside the region and one
    outside; each such cluster contributes one bit.
    """
    n = decomp.spec.n_sites
    sites = np.asarray(list(region) if isinstance(region, (set, frozenset)) else region)
    if sites.dtype == bool:
        if sites.shape != (n,):
            raise ParameterError("boolean region mask must have one entry per site")
        mask = sites.copy()
    else:
        sites = sites.astype(np.int64).ravel()
        if sites.size and (sites.min() < 0 or sites.max() >= n):
            raise ParameterError("region contains site ids outside the lattice")
        mask = np.zeros(n, dtype=bool)
        mask[sites] = True
    k = decomp.n_clusters
    inner = np.zeros(k, dtype=bool)
    outer = np.zeros(k, dtype=bool)
    inner[decomp.labels[mask]] = True
    outer[decomp.labels[~mask]] = True
    return int(np.count_nonzero(inner & outer))


def write_edgelist(net: QuantumNetwork, path) -> None:
    """Write the canonical edge-list file; round trips bit-exactly."""
    rule = net.provenance.get("rule", LinkRule.NODE_EXCLUSIVE.value)
    with open(path, "w") as fh:
        fh.write("# spinweb v1\n")
        fh.write(f"nodes={net.n_nodes} rule={rule}\n")
        for (u, v), w in zip(net.edges.tolist(), net.weights.tolist()):
            fh.write(f"{u} {v} {w}\n")


def read_edgelist(path) -> QuantumNetwork:
    """Read a canonical edge-list file written by write_edgelist."""
    with open(path) as fh:
        raw = fh.read().splitlines()
    if not raw or raw[0].strip() != "# spinweb v1":
        raise FormatError(path, 1, "expected '# spinweb v1' marker")
    if len(raw) < 2:
        raise FormatError(path, 2, "missing 'nodes= rule=' header")
    fields = dict(tok.split("=", 1) for tok in raw[1].split() if "=" in tok)
    if "nodes" not in fields or "rule" not in fields:
        raise FormatError(path, 2, "header must carry nodes= and rule=")
    try:
        n = int(fields["nodes"])
        rule = LinkRule(fields["rule"])
    except ValueError as exc:
        raise FormatError(path, 2, str(exc)) from None
    if n < 0:
        raise FormatError(path, 2, "node count must be non-negative")
    edges = []
    weights = []
    for ln, line in enumerate(raw[2:], start=3):
        if not line.strip():
            continue
        tok = line.split()
        if len(tok) != 3:
            raise FormatError(path, ln, "expected 'u v w'")
        try:
            u, v, w = int(tok[0]), int(tok[1]), int(tok[2])
        except ValueError as exc:
            raise FormatError(path, ln, str(exc)) from None
        edges.append((u, v))
        weights.append(w)
    e = np.asarray(edges, dtype=np.int32).reshape(-1, 2)
    w = np.asarray(weights, dtype=np.int64)
    try:
        return QuantumNetwork(n, e, w, {"rule": rule.value, "path": str(path)})
    except ContractError as exc:
        raise FormatError(path, 0, str(exc)) from None
