"""Ensembles, parameter sweeps, imports, and artifact trees.

A flat ``key = value`` config drives the whole pipeline: disorder
sampling, cluster decomposition, node packing, network building, LCC
extraction, and topology reports, over many samples and optionally over
a grid of theta (or dilution p) values.  Per-sample seeds derive from
(master seed, grid index, sample index), so results never depend on
execution order or worker count; layout seeds ignore the grid index so
a sweep reuses each sample's packing across grid points.  Aggregation
is an ordered reduction and every emitted byte is a pure function of
(config, master seed).
"""

from __future__ import annotations

import hashlib
import json
import math
import os
from dataclasses import dataclass, fields

import numpy as np

from .clusters import write_decomposition
from .disorder import THETA_C, DisorderModel, Variant, percolation_clusters, sample_disorder
from .errors import ContractError, FormatError, ParameterError
from .lattice import LatticeSpec
from .network import (
    LinkRule,
    QuantumNetwork,
    build_network,
    largest_connected_component,
    parse_rule,
    write_edgelist,
)
from .placement import pack_hexagonal, pack_spiral, write_layout
from .sdrg import run_sdrg
from .topology import (
    DegreeCurve,
    FitResult,
    assortativity,
    curve_csv,
    degree_distribution,
    fit_degree_exponent,
    global_clustering,
    knn_curve,
    local_clustering_curve,
    merge_degree_distributions,
    topology_report,
)
from .topology import write_report as write_topology_report

# domain tag that keeps layout seeding independent of the grid index
_LAYOUT_STREAM = 0x4C41594F

_INT_KEYS = {"L", "samples", "seed", "workers", "path_sources", "hex_match"}
_FLOAT_KEYS = {"gamma", "r_min", "r_max", "coverage", "pitch", "bin_ratio"}
_GRID_KEYS = {"theta", "p"}
_STR_KEYS = {"variant", "kind", "rule", "path_mode", "outdir"}
_ALL_KEYS = _INT_KEYS | _FLOAT_KEYS | _GRID_KEYS | _STR_KEYS


@dataclass
class ExperimentConfig:
    """Every knob of a pipeline run, one flat namespace.

    ``theta`` or ``p`` may hold a tuple (a sweep grid, written as a
    comma list in config files); everything else is scalar.
    """

    L: int = 64
    variant: str = Variant.FIXED_H.value
    theta: float | tuple | None = THETA_C
    p: float | tuple | None = None
    kind: str = "spiral"
    gamma: float = 2.67
    r_min: float = 2.0
    r_max: float | None = None
    coverage: float = 0.3
    pitch: float | None = None
    hex_match: int | None = None
    rule: str = LinkRule.NODE_EXCLUSIVE.value
    samples: int = 16
    seed: int = 0
    workers: int = 1
    path_mode: str = "auto"
    path_sources: int = 1000
    bin_ratio: float = 2.0
    outdir: str | None = None

    def validate(self) -> "ExperimentConfig":
        LatticeSpec(self.L)
        try:
            Variant(self.variant)
        except ValueError:
            raise ParameterError(f"unknown variant {self.variant!r}") from None
        parse_rule(self.rule)
        if self.kind not in ("spiral", "hex"):
            raise ParameterError(f"packing kind must be spiral or hex, got {self.kind!r}")
        if self.samples < 1:
            raise ParameterError(f"samples must be positive, got {self.samples!r}")
        if self.seed < 0:
            raise ParameterError(f"master seed must be non-negative, got {self.seed!r}")
        if self.workers < 1:
            raise ParameterError(f"workers must be positive, got {self.workers!r}")
        name, values = self.grid()
        if not values:
            raise ParameterError(f"sweep grid for {name} is empty")
        for v in values:
            self.model_for(v)  # parameter domains per variant
        return self

    def grid(self) -> tuple[str, tuple]:
        """The swept parameter name and its value grid (scalars give one)."""
        if Variant(self.variant) is Variant.DILUTED:
            if self.theta is not None:
                raise ParameterError("diluted takes p, not theta")
            if self.p is None:
                raise ParameterError("diluted requires p")
            vals = self.p
            name = "p"
        else:
            if self.p is not None:
                raise ParameterError(f"{self.variant} takes theta, not p")
            if self.theta is None:
                raise ParameterError(f"{self.variant} requires theta")
            vals = self.theta
            name = "theta"
        if not isinstance(vals, tuple):
            vals = (float(vals),)
        if not all(math.isfinite(v) for v in vals):
            raise ParameterError(f"{name} grid must be finite, got {vals!r}")
        return name, vals

    @property
    def is_sweep(self) -> bool:
        _, values = self.grid()
        return len(values) > 1

    def model_for(self, value: float) -> DisorderModel:
        variant = Variant(self.variant)
        if variant is Variant.DILUTED:
            return DisorderModel(variant, p=float(value))
        return DisorderModel(variant, theta=float(value))

    def effective_r_max(self) -> float:
        return self.L / 8.0 if self.r_max is None else self.r_max

    def to_text(self) -> str:
        """Canonical config serialization (sorted keys, repr floats).

        Execution knobs (workers, outdir) never change results, so they
        are left out: the text and its hash identify the science only.
        """
        lines = []
        for f in sorted(fields(self), key=lambda f: f.name):
            if f.name in ("workers", "outdir"):
                continue
            v = getattr(self, f.name)
            if v is None:
                continue
            if isinstance(v, tuple):
                v = ",".join(repr(float(x)) for x in v)
            elif isinstance(v, float):
                v = repr(v)
            lines.append(f"{f.name} = {v}")
        return "\n".join(lines) + "\n"

    def sha256(self) -> str:
        return hashlib.sha256(self.to_text().encode()).hexdigest()


def _parse_value(key: str, text: str):
    text = text.strip()
    try:
        if key in _INT_KEYS:
            return int(text)
        if key in _FLOAT_KEYS:
            return float(text)
        if key in _GRID_KEYS:
            parts = [t for t in text.split(",") if t.strip()]
            if not parts:
                raise ValueError("empty grid")
            if len(parts) == 1:
                return float(parts[0])
            return tuple(float(t) for t in parts)
    except ValueError as exc:
        raise ParameterError(f"config key {key}: {exc}") from None
    return text


def parse_config_text(text: str, origin: str = "<config>") -> dict:
    """Parse `key = value` lines into a raw mapping; '#' comments and
    blanks are ignored."""
    values = {}
    for ln, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, eq, val = line.partition("=")
        key = key.strip()
        if not eq or not key:
            raise ParameterError(f"{origin}:{ln}: expected 'key = value', got {raw!r}")
        if key not in _ALL_KEYS:
            raise ParameterError(f"{origin}:{ln}: unknown config key {key!r}")
        if key in values:
            raise ParameterError(f"{origin}:{ln}: duplicate config key {key!r}")
        values[key] = _parse_value(key, val)
    return values


def config_from_values(values: dict) -> ExperimentConfig:
    """Build and validate a config from a raw key -> value mapping."""
    unknown = sorted(set(values) - _ALL_KEYS)
    if unknown:
        raise ParameterError(f"unknown config keys: {unknown}")
    values = dict(values)
    # diluted runs take p; without an explicit theta, drop the
    # fixed_h default so the variant switch just works
    if values.get("variant") == Variant.DILUTED.value and "theta" not in values:
        values["theta"] = None
    cfg = ExperimentConfig(**values)
    return cfg.validate()


def config_from_text(text: str, origin: str = "<config>") -> ExperimentConfig:
    return config_from_values(parse_config_text(text, origin))


def config_from_file(path) -> ExperimentConfig:
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError:
        raise
    return config_from_text(text, origin=str(path))


def derive_instance_seed(master: int, grid_index: int, sample_index: int) -> int:
    ss = np.random.SeedSequence((master, grid_index, sample_index))
    return int(ss.generate_state(1, np.uint64)[0])


def derive_layout_seed(master: int, sample_index: int) -> int:
    ss = np.random.SeedSequence((master, _LAYOUT_STREAM, sample_index))
    return int(ss.generate_state(1, np.uint64)[0])


@dataclass
class SampleResult:
    """Summary of one pipeline sample (the heavy artifacts are streamed).

    Degree, clustering, and correlation statistics cover the full built
    network (every placed node); the mean path, which needs a connected
    graph, comes from the largest connected component's report.
    """

    grid_index: int
    sample_index: int
    param: float
    instance_seed: int
    layout_seed: int
    layout_nodes: int
    layout_coverage: float
    n_clusters: int
    net_edges: int
    lcc_nodes: int
    lcc_links: int
    lcc_weight: int
    net_degrees: object  # DegreeDistribution over all placed nodes
    net_fit: object  # FitResult of the full-network tail fit
    net_assortativity: float | None
    net_clustering: float | None
    net_knn: object  # DegreeCurve
    net_local: object  # DegreeCurve | None
    net_local_slope: float | None
    report: object  # TopologyReport of the LCC

    def row(self) -> dict:
        rep = self.report
        return {
            "grid_index": self.grid_index,
            "sample_index": self.sample_index,
            "param": self.param,
            "instance_seed": self.instance_seed,
            "layout_seed": self.layout_seed,
            "layout_nodes": self.layout_nodes,
            "layout_coverage": self.layout_coverage,
            "n_clusters": self.n_clusters,
            "net_edges": self.net_edges,
            "lcc_nodes": self.lcc_nodes,
            "lcc_links": self.lcc_links,
            "lcc_weight": self.lcc_weight,
            "mean_path": rep.mean_path,
            "assortativity": self.net_assortativity,
            "clustering_global": self.net_clustering,
            "local_slope": self.net_local_slope,
            "gamma": self.net_fit.gamma if self.net_fit.status == "ok" else None,
            "lcc_assortativity": rep.assortativity,
            "lcc_clustering": rep.clustering_global,
        }


# layouts depend on (packing parameters, layout seed) only, never on the
# grid value, so a sweep reuses each sample's packing across grid points;
# very large site maps are rebuilt instead of cached
_LAYOUT_CACHE: dict = {}
_LAYOUT_CACHE_MAX = 64
_LAYOUT_CACHE_L_MAX = 2048


def _build_layout(cfg: ExperimentConfig, layout_seed: int):
    spec = LatticeSpec(cfg.L)
    if cfg.kind == "spiral":
        return pack_spiral(
            spec,
            layout_seed,
            gamma=cfg.gamma,
            r_min=cfg.r_min,
            r_max=cfg.effective_r_max(),
            coverage_target=cfg.coverage,
        )
    return pack_hexagonal(
        spec,
        cfg.coverage,
        pitch=cfg.pitch,
        gamma=cfg.gamma,
        r_min=cfg.r_min,
        r_max=cfg.effective_r_max(),
        match_count=cfg.hex_match,
    )


def _layout_for(cfg: ExperimentConfig, sample_index: int):
    layout_seed = derive_layout_seed(cfg.seed, sample_index)
    if cfg.kind == "spiral":
        key = ("spiral", cfg.L, layout_seed, cfg.gamma, cfg.r_min, cfg.effective_r_max(), cfg.coverage)
    else:
        # hexagonal packing is deterministic: one layout per parameter set
        key = ("hex", cfg.L, cfg.coverage, cfg.pitch, cfg.gamma, cfg.r_min, cfg.effective_r_max(), cfg.hex_match)
    if cfg.L > _LAYOUT_CACHE_L_MAX:
        return layout_seed, _build_layout(cfg, layout_seed)
    layout = _LAYOUT_CACHE.get(key)
    if layout is None:
        layout = _build_layout(cfg, layout_seed)
        while len(_LAYOUT_CACHE) >= _LAYOUT_CACHE_MAX:
            _LAYOUT_CACHE.pop(next(iter(_LAYOUT_CACHE)))
        _LAYOUT_CACHE[key] = layout
    return layout_seed, layout


def _sample_task(args):
    cfg, grid_index, sample_index, value, keep, layout_seed, layout = args
    instance_seed = derive_instance_seed(cfg.seed, grid_index, sample_index)
    try:
        spec = LatticeSpec(cfg.L)
        model = cfg.model_for(value)
        inst = sample_disorder(spec, model, instance_seed)
        if Variant(cfg.variant) is Variant.DILUTED:
            decomp = percolation_clusters(inst)
        else:
            decomp = run_sdrg(inst)
        net = build_network(decomp, layout, parse_rule(cfg.rule))
        lcc = largest_connected_component(net)
        net_degrees = degree_distribution(net)
        net_fit = fit_degree_exponent(net_degrees)
        net_r = assortativity(net) if net.n_edges else None
        net_c = global_clustering(net)
        net_knn = knn_curve(net)
        net_local, _, net_slope = local_clustering_curve(net, cfg.bin_ratio)
        report = topology_report(
            lcc,
            path_mode=cfg.path_mode,
            path_sources=cfg.path_sources,
            path_seed=instance_seed % (1 << 32),
            bin_ratio=cfg.bin_ratio,
        )
    except ContractError as exc:
        raise ContractError(
            f"sample failed (grid={grid_index}, sample={sample_index}, "
            f"instance_seed={instance_seed}): {exc}"
        ) from exc
    result = SampleResult(
        grid_index=grid_index,
        sample_index=sample_index,
        param=float(value),
        instance_seed=instance_seed,
        layout_seed=layout_seed,
        layout_nodes=layout.n_nodes,
        layout_coverage=layout.coverage,
        n_clusters=decomp.n_clusters,
        net_edges=net.n_edges,
        lcc_nodes=lcc.n_nodes,
        lcc_links=lcc.n_edges,
        lcc_weight=int(lcc.weights.sum()),
        net_degrees=net_degrees,
        net_fit=net_fit,
        net_assortativity=net_r,
        net_clustering=net_c,
        net_knn=net_knn,
        net_local=net_local,
        net_local_slope=net_slope,
        report=report,
    )
    heavy = {"decomp": decomp, "layout": layout, "net": net, "lcc": lcc} if keep else None
    return result, heavy


def _mean_sem(values) -> tuple[float | None, float | None, int]:
    vals = [v for v in values if v is not None]
    n = len(vals)
    if n == 0:
        return None, None, 0
    arr = np.asarray(vals, dtype=np.float64)
    mean = float(arr.mean())
    sem = float(arr.std(ddof=1) / math.sqrt(n)) if n > 1 else 0.0
    return mean, sem, n


def _average_curves(curves, missing_as_zero: bool) -> DegreeCurve | None:
    """Pointwise sample mean at every degree any sample reports."""
    curves = [c for c in curves if c is not None and c.k.size]
    if not curves:
        return None
    ks = np.unique(np.concatenate([c.k for c in curves]))
    vals = np.zeros(ks.size)
    cnts = np.zeros(ks.size)
    for pos, k in enumerate(ks):
        contrib = []
        for c in curves:
            i = np.searchsorted(c.k, k)
            if i < c.k.size and c.k[i] == k:
                contrib.append(c.value[i])
            elif missing_as_zero:
                contrib.append(0.0)
        vals[pos] = float(np.mean(contrib))
        cnts[pos] = len(contrib)
    return DegreeCurve(ks.astype(np.float64), vals, cnts.astype(np.int64))


@dataclass
class EnsembleResult:
    """Aggregate of one grid point: pooled fit, mean curves, scalars.

    The pooled degree fit, the averaged P(k), k_nn(k), and C_local(k)
    curves, and the assortativity / clustering scalars describe the full
    built networks; ``mean_path`` (and the ``lcc_*`` scalars) describe
    their largest connected components.
    """

    config: ExperimentConfig
    grid_index: int
    param_name: str
    param_value: float
    samples: list
    scalars: dict
    fit: FitResult
    degree_pk: DegreeCurve | None
    knn_mean: DegreeCurve | None
    local_mean: DegreeCurve | None

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
            "report_version": 1,
            "config": self.config.to_text(),
            "config_sha256": self.config.sha256(),
            "grid_index": self.grid_index,
            "param_name": self.param_name,
            "param_value": self.param_value,
            "n_samples": len(self.samples),
            "scalars": {
                k: {"mean": m, "sem": s, "n": n} for k, (m, s, n) in self.scalars.items()
            },
            "fit": {
                "status": self.fit.status,
                "gamma": self.fit.gamma,
                "error": self.fit.error,
                "k_min": self.fit.k_min,
                "ks_distance": self.fit.ks_distance,
                "n_tail": self.fit.n_tail,
                "binned_slope": self.fit.binned_slope,
            },
            "degree_pk": curve(self.degree_pk),
            "knn_mean": curve(self.knn_mean),
            "local_mean": curve(self.local_mean),
            "per_sample": [s.row() for s in self.samples],
        }


def _aggregate(config, grid_index, param_name, param_value, samples) -> EnsembleResult:
    reports = [s.report for s in samples]
    scalars = {
        "mean_path": _mean_sem([r.mean_path for r in reports]),
        "assortativity": _mean_sem([s.net_assortativity for s in samples]),
        "clustering_global": _mean_sem([s.net_clustering for s in samples]),
        "local_slope": _mean_sem([s.net_local_slope for s in samples]),
        "gamma": _mean_sem(
            [s.net_fit.gamma if s.net_fit.status == "ok" else None for s in samples]
        ),
        "lcc_assortativity": _mean_sem([r.assortativity for r in reports]),
        "lcc_clustering": _mean_sem([r.clustering_global for r in reports]),
        "net_edges": _mean_sem([s.net_edges for s in samples]),
        "lcc_nodes": _mean_sem([s.lcc_nodes for s in samples]),
        "lcc_links": _mean_sem([s.lcc_links for s in samples]),
        "lcc_weight": _mean_sem([s.lcc_weight for s in samples]),
        "layout_nodes": _mean_sem([s.layout_nodes for s in samples]),
        "n_clusters": _mean_sem([s.n_clusters for s in samples]),
    }
    pooled = merge_degree_distributions([s.net_degrees for s in samples])
    fit = fit_degree_exponent(pooled)
    pk = _average_curves(
        [
            DegreeCurve(s.net_degrees.k.astype(np.float64), s.net_degrees.probabilities(), s.net_degrees.counts)
            for s in samples
        ],
        missing_as_zero=True,
    )
    knn = _average_curves([s.net_knn for s in samples], missing_as_zero=False)
    local = _average_curves([s.net_local for s in samples], missing_as_zero=False)
    return EnsembleResult(
        config=config,
        grid_index=grid_index,
        param_name=param_name,
        param_value=float(param_value),
        samples=samples,
        scalars=scalars,
        fit=fit,
        degree_pk=pk,
        knn_mean=knn,
        local_mean=local,
    )


def _write_sample_artifacts(directory, sample: SampleResult, heavy: dict) -> None:
    prefix = os.path.join(directory, f"g{sample.grid_index:03d}_s{sample.sample_index:04d}")
    write_decomposition(heavy["decomp"], prefix + ".decomposition.txt")
    write_layout(heavy["layout"], prefix + ".layout.txt")
    write_edgelist(heavy["net"], prefix + ".edges.txt")
    write_edgelist(heavy["lcc"], prefix + ".lcc.txt")
    write_topology_report(sample.report, prefix + ".report.json")


def _run_grid_point(config, grid_index, value, artifact_dir, progress=None) -> EnsembleResult:
    keep = artifact_dir is not None
    if keep:
        os.makedirs(artifact_dir, exist_ok=True)
    tasks = []
    for s in range(config.samples):
        layout_seed, layout = _layout_for(config, s)
        tasks.append((config, grid_index, s, value, keep, layout_seed, layout))
    samples = []
    if config.workers > 1:
        import multiprocessing

        ctx = multiprocessing.get_context("fork")
        with ctx.Pool(config.workers) as pool:
            # imap preserves task order, so aggregation and artifact
            # writes are identical for every worker count
            for result, heavy in pool.imap(_sample_task, tasks):
                if keep:
                    _write_sample_artifacts(artifact_dir, result, heavy)
                samples.append(result)
                if progress:
                    progress(result)
    else:
        for t in tasks:
            result, heavy = _sample_task(t)
            if keep:
                _write_sample_artifacts(artifact_dir, result, heavy)
            samples.append(result)
            if progress:
                progress(result)
    name, _ = config.grid()
    return _aggregate(config, grid_index, name, value, samples)


def run_ensemble(config: ExperimentConfig, artifact_dir=None, progress=None) -> EnsembleResult:
    """Run every sample of a scalar (non-sweep) config and aggregate.

    With ``artifact_dir``, per-sample decomposition, layout, edge-list,
    LCC, and report files stream to disk as samples finish, in sample
    order.
    """
    config.validate()
    name, values = config.grid()
    if len(values) != 1:
        raise ParameterError(f"run_ensemble needs a scalar config; {name} has {len(values)} values")
    return _run_grid_point(config, 0, values[0], artifact_dir, progress)


@dataclass
class SweepResult:
    """Mean LCC link count (and friends) along one parameter grid."""

    config: ExperimentConfig
    param_name: str
    values: np.ndarray
    mean_links: np.ndarray
    sem_links: np.ndarray
    mean_nodes: np.ndarray
    sem_nodes: np.ndarray
    n_samples: int
    ensembles: list

    def argmax_value(self) -> float:
        return float(self.values[int(np.argmax(self.mean_links))])

    def to_csv(self) -> str:
        lines = [f"{self.param_name},mean_links,sem"]
        for v, m, s in zip(self.values, self.mean_links, self.sem_links):
            lines.append(f"{float(v)!r},{float(m)!r},{float(s)!r}")
        return "\n".join(lines) + "\n"


def sweep_parameter(config: ExperimentConfig, artifact_dir=None, progress=None) -> SweepResult:
    """Run one ensemble per grid value of a sweep config."""
    config.validate()
    name, values = config.grid()
    ensembles = []
    for gi, value in enumerate(values):
        ensembles.append(_run_grid_point(config, gi, value, artifact_dir, progress))
    links = [e.scalars["lcc_links"] for e in ensembles]
    nodes = [e.scalars["lcc_nodes"] for e in ensembles]
    return SweepResult(
        config=config,
        param_name=name,
        values=np.asarray(values, dtype=np.float64),
        mean_links=np.asarray([m for m, _, _ in links]),
        sem_links=np.asarray([s for _, s, _ in links]),
        mean_nodes=np.asarray([m for m, _, _ in nodes]),
        sem_nodes=np.asarray([s for _, s, _ in nodes]),
        n_samples=config.samples,
        ensembles=ensembles,
    )


def import_edgelist(path) -> QuantumNetwork:
    """Read an external edge list leniently: `u v [w]` per line.

    Blank lines and '#' comments are skipped.  A `nodes=<n> rule=<r>`
    header is honored when present (it preserves isolated nodes and the
    existing dense ids); otherwise labels are re-indexed densely in
    sorted order.  Reverse duplicates and self-loops are dropped but
    counted in the provenance, and all weights reset to 1.
    """
    try:
        with open(path) as fh:
            raw = fh.read().splitlines()
    except OSError:
        raise
    n_header = None
    rule = None
    pairs = []
    labels_int = True
    self_loops = 0
    for ln, line in enumerate(raw, start=1):
        text = line.strip()
        if not text or text.startswith("#"):
            continue
        if "=" in text and n_header is None and not pairs:
            fields_ = dict(tok.split("=", 1) for tok in text.split() if "=" in tok)
            if "nodes" in fields_:
                try:
                    n_header = int(fields_["nodes"])
                except ValueError:
                    raise FormatError(path, ln, f"bad node count {fields_['nodes']!r}") from None
                if n_header < 0:
                    raise FormatError(path, ln, "node count must be non-negative")
                rule = fields_.get("rule")
                continue
            raise FormatError(path, ln, f"unrecognized header line {line!r}")
        tok = text.split()
        if len(tok) not in (2, 3):
            raise FormatError(path, ln, f"expected 'u v' or 'u v w', got {line!r}")
        u, v = tok[0], tok[1]
        if labels_int:
            try:
                int(u), int(v)
            except ValueError:
                labels_int = False
        if u == v:
            self_loops += 1
            continue
        pairs.append((u, v))

    if labels_int:
        pairs = [(int(u), int(v)) for u, v in pairs]
    if n_header is not None:
        if not labels_int:
            raise FormatError(path, 0, "a nodes= header requires integer node ids")
        n = n_header
        for u, v in pairs:
            if not (0 <= u < n and 0 <= v < n):
                raise FormatError(path, 0, f"edge ({u}, {v}) outside nodes={n}")
        dense = {i: i for i in range(n)}
        original = list(range(n))
    else:
        original = sorted({u for u, _ in pairs} | {v for _, v in pairs})
        dense = {lab: i for i, lab in enumerate(original)}
        n = len(original)

    seen = set()
    duplicates = 0
    edges = []
    for u, v in pairs:
        a, b = dense[u], dense[v]
        if a > b:
            a, b = b, a
        if (a, b) in seen:
            duplicates += 1
            continue
        seen.add((a, b))
        edges.append((a, b))
    edges.sort()
    e = np.asarray(edges, dtype=np.int32).reshape(-1, 2)
    prov = {
        "source": str(path),
        "rule": rule,
        "duplicates": duplicates,
        "self_loops": self_loops,
        "node_labels": original,
    }
    return QuantumNetwork(n, e, np.ones(e.shape[0], dtype=np.int64), prov)


def _sha256_file(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def export_artifacts(result, directory) -> list[str]:
    """Write aggregate artifacts plus a manifest hashing the whole tree.

    ``result`` is an EnsembleResult or SweepResult.  Sample-level files
    are whatever streaming already placed under the directory; this adds
    the config echo, aggregate JSON, curve CSVs, the sweep CSV when
    sweeping, and finally manifest.json with a sha256 per artifact.
    """
    os.makedirs(directory, exist_ok=True)
    config = result.config
    written = []

    def emit(name, text):
        p = os.path.join(directory, name)
        with open(p, "w") as fh:
            fh.write(text)
        written.append(p)

    emit("config.txt", config.to_text())
    if isinstance(result, SweepResult):
        emit("sweep.csv", result.to_csv())
        for e in result.ensembles:
            emit(
                f"ensemble_g{e.grid_index:03d}.json",
                json.dumps(e.to_json(), indent=2, sort_keys=True) + "\n",
            )
    else:
        emit("ensemble.json", json.dumps(result.to_json(), indent=2, sort_keys=True) + "\n")
        for name, curve in (
            ("degree_pk", result.degree_pk),
            ("knn_mean", result.knn_mean),
            ("local_mean", result.local_mean),
        ):
            if curve is not None:
                emit(f"{name}.csv", curve_csv(curve))

    files = {}
    for root, _, names in os.walk(directory):
        for name in sorted(names):
            if name == "manifest.json":
                continue
            p = os.path.join(root, name)
            rel = os.path.relpath(p, directory)
            files[rel] = _sha256_file(p)
    manifest = {
        "config_sha256": config.sha256(),
        "files": files,
    }
    mpath = os.path.join(directory, "manifest.json")
    with open(mpath, "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    written.append(mpath)
    return written
