"""Command-line front end.

Subcommands mirror the pipeline stages: ``generate`` (disorder +
clusters), ``pack`` (node layout), ``network`` (cluster/layout ->
edge list), ``analyze`` (edge list -> topology report), ``pipeline``
(everything, one config), ``sweep`` (pipeline over a parameter grid),
and ``import`` (normalize an external edge list).

Every config key is also a flag; flags override ``--config`` file
values.  Progress goes to stderr; file data reaches stdout only with
``--stdout``.  Exit codes: 0 success, 2 bad parameters, 3 violated
internal contract, 4 unreadable or malformed files.
"""

from __future__ import annotations

import argparse
import shutil
import sys
import tempfile

from .clusters import read_decomposition, write_decomposition
from .disorder import Variant, percolation_clusters, sample_disorder, write_instance_debug
from .errors import ContractError, FormatError, ParameterError
from .experiment import (
    _parse_value,
    config_from_values,
    derive_instance_seed,
    derive_layout_seed,
    export_artifacts,
    import_edgelist,
    parse_config_text,
    run_ensemble,
    sweep_parameter,
)
from .lattice import LatticeSpec
from .network import build_network, largest_connected_component, parse_rule, write_edgelist
from .placement import pack_hexagonal, pack_spiral, read_layout, write_layout
from .sdrg import run_sdrg
from .topology import topology_report, write_report, write_report_csv

_GRID_FLAGS = ("theta", "p")
_CONFIG_FLAGS = (
    ("L", int, "lattice side length"),
    ("variant", str, "disorder variant: fixed_h, box_h, or diluted"),
    ("theta", str, "control parameter (comma list sweeps it)"),
    ("p", str, "bond dilution probability (comma list sweeps it)"),
    ("kind", str, "packing kind: spiral or hex"),
    ("gamma", float, "disk radius power-law exponent"),
    ("r_min", float, "smallest disk radius"),
    ("r_max", float, "largest disk radius (default L/8)"),
    ("coverage", float, "target packed area fraction"),
    ("pitch", float, "hex lattice pitch (default from coverage)"),
    ("hex_match", int, "hex node count to match a spiral run"),
    ("rule", str, "link rule: node_exclusive or pair_contained"),
    ("samples", int, "disorder samples per grid point"),
    ("seed", int, "master seed"),
    ("workers", int, "parallel sample workers"),
    ("path_mode", str, "mean-distance mode: auto, exact, or sampled"),
    ("path_sources", int, "BFS sources in sampled mode"),
    ("bin_ratio", float, "log-bin ratio for degree curves"),
    ("outdir", str, "artifact directory"),
)


def _log(msg: str) -> None:
    print(msg, file=sys.stderr)


def _add_config_flags(ap: argparse.ArgumentParser) -> None:
    ap.add_argument("--config", metavar="FILE", help="key = value config file")
    for name, typ, help_ in _CONFIG_FLAGS:
        flag = "--" + name.replace("_", "-")
        ap.add_argument(flag, dest=name, type=typ, default=None, help=help_)


def _build_config(args):
    if args.config is not None:
        with open(args.config) as fh:
            values = parse_config_text(fh.read(), origin=args.config)
    else:
        values = {}
    for name, _, _ in _CONFIG_FLAGS:
        v = getattr(args, name, None)
        if v is None:
            continue
        values[name] = _parse_value(name, v) if name in _GRID_FLAGS else v
    return config_from_values(values)


def _emit(write_fn, out_path, stdout: bool) -> None:
    """Run a path-taking writer, optionally copying the result to stdout."""
    if out_path is not None:
        write_fn(out_path)
        _log(f"wrote {out_path}")
        if stdout:
            with open(out_path) as fh:
                shutil.copyfileobj(fh, sys.stdout)
    elif stdout:
        with tempfile.NamedTemporaryFile("w+", suffix=".txt") as tmp:
            write_fn(tmp.name)
            with open(tmp.name) as fh:
                shutil.copyfileobj(fh, sys.stdout)
    else:
        raise ParameterError("nothing to do: give -o/--output or --stdout")


def _cmd_generate(args) -> int:
    cfg = _build_config(args)
    name, values = cfg.grid()
    if len(values) != 1:
        raise ParameterError(f"generate needs a scalar {name}")
    spec = LatticeSpec(cfg.L)
    model = cfg.model_for(values[0])
    iseed = derive_instance_seed(cfg.seed, args.grid_index, args.sample_index)
    inst = sample_disorder(spec, model, iseed)
    if args.instance_out:
        write_instance_debug(inst, args.instance_out)
        _log(f"wrote {args.instance_out}")
    if Variant(cfg.variant) is Variant.DILUTED:
        decomp = percolation_clusters(inst)
    else:
        decomp = run_sdrg(inst)
    _log(
        f"L={cfg.L} {model.param_text()} instance_seed={iseed} "
        f"clusters={decomp.n_clusters}"
    )
    _emit(lambda p: write_decomposition(decomp, p), args.output, args.stdout)
    return 0


def _cmd_pack(args) -> int:
    cfg = _build_config(args)
    spec = LatticeSpec(cfg.L)
    if cfg.kind == "spiral":
        lseed = derive_layout_seed(cfg.seed, args.sample_index)
        layout = pack_spiral(
            spec,
            lseed,
            gamma=cfg.gamma,
            r_min=cfg.r_min,
            r_max=cfg.effective_r_max(),
            coverage_target=cfg.coverage,
        )
    else:
        layout = pack_hexagonal(
            spec,
            cfg.coverage,
            pitch=cfg.pitch,
            gamma=cfg.gamma,
            r_min=cfg.r_min,
            r_max=cfg.effective_r_max(),
            match_count=cfg.hex_match,
        )
    _log(
        f"packed {layout.n_nodes} {cfg.kind} nodes on L={cfg.L}, "
        f"coverage={layout.coverage:.4f}"
    )
    _emit(
        lambda p: write_layout(layout, p, include_sites=args.include_sites),
        args.output,
        args.stdout,
    )
    return 0


def _cmd_network(args) -> int:
    decomp = read_decomposition(args.decomposition)
    layout = read_layout(args.layout)
    rule = parse_rule(args.rule or "node_exclusive")
    net = build_network(decomp, layout, rule)
    lcc = largest_connected_component(net)
    _log(
        f"network: {net.n_nodes} nodes, {net.n_edges} links; "
        f"LCC: {lcc.n_nodes} nodes, {lcc.n_edges} links"
    )
    if args.lcc_out:
        write_edgelist(lcc, args.lcc_out)
        _log(f"wrote {args.lcc_out}")
    _emit(lambda p: write_edgelist(net, p), args.output, args.stdout)
    return 0


def _cmd_analyze(args) -> int:
    net = import_edgelist(args.edges)
    dropped = net.provenance["duplicates"] + net.provenance["self_loops"]
    if dropped:
        _log(f"dropped {net.provenance['duplicates']} duplicate and "
             f"{net.provenance['self_loops']} self-loop lines")
    if not args.no_lcc:
        net = largest_connected_component(net)
    _log(f"analyzing {net.n_nodes} nodes, {net.n_edges} links")
    report = topology_report(
        net,
        path_mode=args.path_mode or "auto",
        path_sources=args.path_sources or 1000,
        path_seed=args.path_seed,
        bin_ratio=args.bin_ratio or 2.0,
    )
    fit = report.fit
    if fit.status == "ok":
        _log(f"degree exponent {fit.gamma:.4f} +/- {fit.error:.4f} (k_min={fit.k_min})")
    else:
        _log(f"degree fit: {fit.status}")
    if args.csv_dir:
        for p in write_report_csv(report, args.csv_dir):
            _log(f"wrote {p}")
    _emit(lambda p: write_report(report, p), args.output, args.stdout)
    return 0


def _progress(sample) -> None:
    rep = sample.report
    _log(
        f"[g{sample.grid_index:03d} s{sample.sample_index:04d}] "
        f"seed={sample.instance_seed} clusters={sample.n_clusters} "
        f"lcc={sample.lcc_nodes}n/{sample.lcc_links}e d={rep.mean_path:.3f}"
    )


def _cmd_pipeline(args) -> int:
    cfg = _build_config(args)
    outdir = args.outdir if args.outdir is not None else cfg.outdir
    if outdir is None:
        raise ParameterError("pipeline needs --outdir (or outdir in the config)")
    artifact_dir = None if args.no_artifacts else outdir
    if cfg.is_sweep:
        result = sweep_parameter(cfg, artifact_dir=artifact_dir, progress=_progress)
    else:
        result = run_ensemble(cfg, artifact_dir=artifact_dir, progress=_progress)
    written = export_artifacts(result, outdir)
    _log(f"exported {len(written)} aggregate files to {outdir}")
    if args.stdout:
        if cfg.is_sweep:
            sys.stdout.write(result.to_csv())
        else:
            import json

            json.dump(result.to_json(), sys.stdout, indent=2, sort_keys=True)
            sys.stdout.write("\n")
    return 0


def _cmd_sweep(args) -> int:
    cfg = _build_config(args)
    if not cfg.is_sweep:
        name, _ = cfg.grid()
        raise ParameterError(f"sweep needs a comma grid for {name}; use pipeline for one point")
    outdir = args.outdir if args.outdir is not None else cfg.outdir
    if outdir is None:
        raise ParameterError("sweep needs --outdir (or outdir in the config)")
    artifact_dir = outdir if args.artifacts else None
    result = sweep_parameter(cfg, artifact_dir=artifact_dir, progress=_progress)
    export_artifacts(result, outdir)
    peak = result.argmax_value()
    _log(f"mean LCC links peak at {result.param_name}={peak!r}")
    if args.stdout:
        sys.stdout.write(result.to_csv())
    return 0


def _cmd_import(args) -> int:
    net = import_edgelist(args.source)
    _log(
        f"imported {net.n_nodes} nodes, {net.n_edges} links "
        f"(dropped {net.provenance['duplicates']} duplicates, "
        f"{net.provenance['self_loops']} self-loops)"
    )
    _emit(lambda p: write_edgelist(net, p), args.output, args.stdout)
    return 0


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="spinweb",
        description="entanglement networks of the 2d random transverse-field Ising model",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="sample disorder and decompose into clusters")
    _add_config_flags(g)
    g.add_argument("--grid-index", type=int, default=0, help="grid point this sample belongs to")
    g.add_argument("--sample-index", type=int, default=0, help="sample index within the ensemble")
    g.add_argument("--instance-out", metavar="FILE", help="also dump raw fields and bonds")
    g.add_argument("-o", "--output", metavar="FILE", help="decomposition file")
    g.add_argument("--stdout", action="store_true", help="copy the decomposition to stdout")
    g.set_defaults(func=_cmd_generate)

    k = sub.add_parser("pack", help="pack nodes into a layout")
    _add_config_flags(k)
    k.add_argument("--sample-index", type=int, default=0, help="sample index within the ensemble")
    k.add_argument("--include-sites", action="store_true", help="embed the site map in the file")
    k.add_argument("-o", "--output", metavar="FILE", help="layout file")
    k.add_argument("--stdout", action="store_true", help="copy the layout to stdout")
    k.set_defaults(func=_cmd_pack)

    n = sub.add_parser("network", help="build the link network from clusters and a layout")
    n.add_argument("--decomposition", required=True, metavar="FILE")
    n.add_argument("--layout", required=True, metavar="FILE")
    n.add_argument("--rule", default=None, help="node_exclusive or pair_contained")
    n.add_argument("--lcc-out", metavar="FILE", help="also write the largest component")
    n.add_argument("-o", "--output", metavar="FILE", help="edge list file")
    n.add_argument("--stdout", action="store_true", help="copy the edge list to stdout")
    n.set_defaults(func=_cmd_network)

    a = sub.add_parser("analyze", help="topology report for an edge list")
    a.add_argument("edges", metavar="EDGELIST", help="edge list file (ours or external)")
    a.add_argument("--no-lcc", action="store_true", help="analyze the whole graph, not its LCC")
    a.add_argument("--path-mode", choices=("auto", "exact", "sampled"), default=None)
    a.add_argument("--path-sources", type=int, default=None)
    a.add_argument("--path-seed", type=int, default=0)
    a.add_argument("--bin-ratio", type=float, default=None)
    a.add_argument("--csv-dir", metavar="DIR", help="also write per-curve CSVs here")
    a.add_argument("-o", "--output", metavar="FILE", help="report JSON")
    a.add_argument("--stdout", action="store_true", help="copy the report to stdout")
    a.set_defaults(func=_cmd_analyze)

    p = sub.add_parser("pipeline", help="run a full ensemble (or sweep) from a config")
    _add_config_flags(p)
    p.add_argument("--no-artifacts", action="store_true", help="skip per-sample files")
    p.add_argument("--stdout", action="store_true", help="print the aggregate to stdout")
    p.set_defaults(func=_cmd_pipeline)

    s = sub.add_parser("sweep", help="sweep theta (or p) and track mean LCC links")
    _add_config_flags(s)
    s.add_argument("--artifacts", action="store_true", help="stream per-sample files too")
    s.add_argument("--stdout", action="store_true", help="print the sweep CSV to stdout")
    s.set_defaults(func=_cmd_sweep)

    i = sub.add_parser("import", help="normalize an external edge list")
    i.add_argument("source", metavar="EDGELIST")
    i.add_argument("-o", "--output", metavar="FILE", help="canonical edge list")
    i.add_argument("--stdout", action="store_true", help="copy the edge list to stdout")
    i.set_defaults(func=_cmd_import)

    return ap


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        return args.func(args)
    except ParameterError as exc:
        _log(f"error: {exc}")
        return 2
    except ContractError as exc:
        _log(f"error: {exc}")
        return 3
    except (FormatError, OSError) as exc:
        _log(f"error: {exc}")
        return 4


if __name__ == "__main__":
    sys.exit(main())
