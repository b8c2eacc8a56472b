#!/usr/bin/env python
#-*- coding: utf-8 -*-
"""Command line interface: spectrepy {align,generate,evaluate,sweep,runtime}.

Exit codes: 0 success, 1 runtime failure, 2 usage, I/O, parse or parameter error.
"""
import argparse
import logging
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor, as_completed
from dataclasses import asdict, dataclass

import numpy as np
import pandas as pd
from tqdm import tqdm

from spectrepy.alignment import default_k, read_matching, read_pairs, spectre, write_matching
from spectrepy.centrality import eigenvector_centrality, write_centrality
from spectrepy.datagen import make_correlated_pair, save_pair
from spectrepy.graphs import (induced_subgraph, is_connected, largest_connected_component, read_edge_list,
                              read_node_set, write_node_set)
from spectrepy.metrics import GroundTruth, evaluate, seed_precision

logger = logging.getLogger(__name__)

SWEEP_COLUMNS = ["dataset", "s", "k", "w", "r", "seed", "trial", "precision", "recall", "ec", "ics",
                 "matching_size", "seed_precision", "sim_e", "rounds", "runtime_ms", "error"]

RUNTIME_COLUMNS = ["dataset", "nodes", "edges", "runtime_ms", "matching_size"]

@dataclass
class RunConfig:
    """parameters of a spectre run

    k = None stands for ceil(10 ln n), n being the smallest node count,
    see resolve_k.
    """
    k: int = None
    w: int = 1
    r: int = 4
    f: float = 0.75
    max_rounds: int = 5
    seed: int = 0
    tol: float = 1e-10
    max_iters: int = 1000

    def validate(self):
        if self.k is not None and self.k < 0:
            raise ValueError("--k should be non-negative.")
        if self.w < 0:
            raise ValueError("--w should be non-negative.")
        if self.r < 2:
            raise ValueError("--r should be at least 2.")
        if not 0.0 <= self.f <= 1.0:
            raise ValueError("--f should be between 0 and 1.")
        if self.max_rounds < 1:
            raise ValueError("--max-rounds should be at least 1.")
        if self.tol <= 0:
            raise ValueError("--tol should be positive.")
        if self.max_iters < 1:
            raise ValueError("--max-power-iters should be at least 1.")
        return self

    def resolve_k(self, n):
        """the k to use on graphs whose smallest node count is n"""
        if self.k is not None:
            return self.k
        k = default_k(n)
        if k + self.w > n:
            logger.warning("default k=%d capped to %d for %d nodes", k, max(n - self.w, 0), n)
            k = max(n - self.w, 0)
        return k

    def spectre_kwargs(self, n):
        return {"k": self.resolve_k(n), "w": self.w, "r": self.r, "f": self.f,
                "max_rounds": self.max_rounds, "tol": self.tol, "max_iters": self.max_iters}

    @classmethod
    def from_args(cls, args):
        k = getattr(args, "k", None)
        w = getattr(args, "w", 1)
        return cls(k=k if not isinstance(k, list) else None,
                   w=w if not isinstance(w, list) else 1,
                   r=args.r, f=args.f, max_rounds=args.max_rounds, seed=args.seed,
                   tol=args.tol, max_iters=args.max_power_iters).validate()

def load_graph(path, connected=True, nodes=None):
    """read an edge list, optionally restricted to a node set; with connected=True
    reduce it to its largest connected component

    Parameters
    ----------
    path : str
        edge-list file.
    connected : bool, optional
        keep only the largest connected component. Default = True.
    nodes : str, optional
        node-set file; the graph is first induced on these labels.

    Returns
    -------
    g : Graph
    labels : NodeLabelMap
        labels of the nodes of g.
    full_labels : NodeLabelMap
        labels of the file's nodes.
    mapping : NodeLabelMap or None
        ids in the file's graph of the nodes of g, None if no reduction happened.
    """
    g, full = read_edge_list(path)
    labels, mapping = full, None
    if nodes is not None:
        wanted = read_node_set(nodes)
        unknown = [label for label in wanted if label not in full]
        if unknown:
            raise ValueError("%s: %d label(s) not in %s, e.g. %r" % (nodes, len(unknown), path, unknown[0]))
        g, mapping = induced_subgraph(g, [full.id_of(label) for label in wanted])
        labels = mapping.compose(full)
        logger.info("%s restricted to the %d node(s) of %s", path, g.node_count, nodes)
    if g.node_count == 0:
        raise ValueError("%s holds no edge" % path)
    if not connected or is_connected(g):
        return g, labels, full, mapping
    sub, lcc = induced_subgraph(g, largest_connected_component(g))
    logger.info("%s is disconnected: using its largest connected component (%d of %d nodes)",
                path, sub.node_count, g.node_count)
    mapping = lcc if mapping is None else lcc.compose(mapping)
    return sub, lcc.compose(labels), full, mapping

def _restrict(pairs, mapping1, mapping2):
    """carry (id, id) pairs of the file graphs onto the reduced graphs, dropping lost nodes"""
    out = []
    for i, j in pairs:
        i = mapping1.index.get(i) if mapping1 is not None else i
        j = mapping2.index.get(j) if mapping2 is not None else j
        if i is not None and j is not None:
            out.append((i, j))
    if len(out) < len(pairs):
        logger.warning("%d ground truth pair(s) outside the aligned components ignored", len(pairs) - len(out))
    return out

def cmd_align(graph1, graph2, config, out, ground_truth=None, centrality=False, **kwargs):
    """align two edge-list files and write the results in the directory out

    Writes matching.tsv, stats.json, report.json (with a ground truth only) and, if
    centrality is set, centrality_g1.csv and centrality_g2.csv. When a graph was
    reduced (node set or largest component), the labels of the aligned nodes are
    written to nodes_g1.txt or nodes_g2.txt, which can be passed back as node sets.

    Parameters
    ----------
    nodes1, nodes2 : str, optional
        node-set files restricting graph1 and graph2 before alignment.

    Returns
    -------
    matching : Matching
    stats : RunStats
    report : MetricReport or None
    """
    config.validate()
    g1, labels1, full1, map1 = load_graph(graph1, nodes=kwargs.get("nodes1", None))
    g2, labels2, full2, map2 = load_graph(graph2, nodes=kwargs.get("nodes2", None))
    gt = None
    if ground_truth is not None:
        gt = GroundTruth(_restrict(read_pairs(ground_truth, full1, full2), map1, map2))

    c1 = eigenvector_centrality(g1, tol=config.tol, max_iters=config.max_iters)
    c2 = eigenvector_centrality(g2, tol=config.tol, max_iters=config.max_iters)
    kwargs = config.spectre_kwargs(min(g1.node_count, g2.node_count))
    matching, stats = spectre(g1, g2, rng=config.seed, centralities=(c1, c2), **kwargs)
    report = evaluate(g1, g2, matching, gt) if gt is not None else None

    os.makedirs(out, exist_ok=True)
    write_matching(os.path.join(out, "matching.tsv"), matching, labels1, labels2)
    with open(os.path.join(out, "stats.json"), "w", encoding="utf-8") as handle:
        handle.write(stats.to_json(indent=2))
    if report is not None:
        with open(os.path.join(out, "report.json"), "w", encoding="utf-8") as handle:
            handle.write(report.to_json(indent=2))
        logger.info("precision=%s recall=%s EC=%s ICS=%s",
                    report.precision, report.recall, report.edge_correctness, report.ics)
    if centrality:
        write_centrality(os.path.join(out, "centrality_g1.csv"), c1, labels1)
        write_centrality(os.path.join(out, "centrality_g2.csv"), c2, labels2)
    for name, mapping, labels in (("nodes_g1.txt", map1, labels1), ("nodes_g2.txt", map2, labels2)):
        if mapping is not None:
            write_node_set(os.path.join(out, name), labels.labels)
    logger.info("matched %d pairs in %d round(s) (%s)", len(matching), len(stats.rounds), stats.stop_reason)
    return matching, stats, report

def cmd_generate(graph, s, seed, out, max_retries=20):
    """generate a correlated pair from an edge-list file and save it in the directory out"""
    g, labels, _, _ = load_graph(graph)
    name = os.path.splitext(os.path.basename(graph))[0]
    pair = make_correlated_pair(g, s, rng=seed, max_retries=max_retries, name=name, labels=labels)
    save_pair(pair, out)
    return pair

def cmd_evaluate(graph1, graph2, matching, ground_truth=None, out=None):
    """score a matching file; the report is written to out, or printed if out is None"""
    g1, labels1, _, _ = load_graph(graph1, connected=False)
    g2, labels2, _, _ = load_graph(graph2, connected=False)
    m = read_matching(matching, labels1, labels2)
    gt = GroundTruth(read_pairs(ground_truth, labels1, labels2)) if ground_truth is not None else None
    report = evaluate(g1, g2, m, gt)
    if out is not None:
        with open(out, "w", encoding="utf-8") as handle:
            handle.write(report.to_json(indent=2))
    else:
        print(report.to_json(indent=2))
    return report

def _stream(master, *key):
    return np.random.default_rng(np.random.SeedSequence(master, spawn_key=key))

def _sweep_unit(g, labels, dataset, s_idx, s, trial, ks, ws, config):
    """all (k, w) cells of one (s, trial) work unit; they share the generated pair"""
    base = {"dataset": dataset, "s": s, "r": config.r, "seed": config.seed, "trial": trial}
    rows = []
    try:
        pair = make_correlated_pair(g, s, rng=_stream(config.seed, 0, s_idx, trial), name=dataset, labels=labels)
        t0 = time.perf_counter()
        c1 = eigenvector_centrality(pair.g1, tol=config.tol, max_iters=config.max_iters)
        c2 = eigenvector_centrality(pair.g2, tol=config.tol, max_iters=config.max_iters)
        centrality_ms = 1000.0 * (time.perf_counter() - t0)
    except (ValueError, RuntimeError) as err:
        logger.warning("sweep unit s=%g trial=%d failed: %s", s, trial, err)
        for k_idx, k in enumerate(ks):
            for w_idx, w in enumerate(ws):
                rows.append(((s_idx, k_idx, w_idx, trial), dict(base, k=k, w=w, error=str(err))))
        return rows

    n = min(pair.g1.node_count, pair.g2.node_count)
    for k_idx, k in enumerate(ks):
        for w_idx, w in enumerate(ws):
            cell = RunConfig(**dict(asdict(config), k=k, w=w))
            row = dict(base, k=k, w=w, sim_e=pair.realized_similarity)
            try:
                kwargs = cell.spectre_kwargs(n)
                row["k"] = kwargs["k"]
                matching, stats = spectre(pair.g1, pair.g2, rng=_stream(config.seed, 1, s_idx, k_idx, w_idx, trial),
                                          centralities=(c1, c2), **kwargs)
            except (ValueError, RuntimeError) as err:
                row["error"] = str(err)
            else:
                report = evaluate(pair.g1, pair.g2, matching, pair.ground_truth)
                row = report.to_row(**row)
                row.update({"seed_precision": seed_precision(stats.seeds, pair.ground_truth),
                            "rounds": len(stats.rounds),
                            "runtime_ms": centrality_ms + stats.total_ms,
                            "error": ""})
            rows.append(((s_idx, k_idx, w_idx, trial), row))
    return rows

def cmd_sweep(graph, dropouts, ks, ws, trials, config, out, workers=1):
    """parameter sweep over s x k x w x trials, one CSV row per cell and trial

    Correlated pairs are generated once per (s, trial) and shared by all (k, w)
    cells. Random streams are derived from config.seed and the cell indices, so
    the CSV does not depend on the number of workers. Failed cells keep a row
    with their error message.

    Returns
    -------
    frame : pandas.DataFrame
    """
    if not dropouts or not ks or not ws or trials < 1:
        raise ValueError("sweep grids should be nonempty and trials at least 1.")
    if workers is not None and workers < 1:
        raise ValueError("--workers should be at least 1.")
    config.validate()
    g, labels, _, _ = load_graph(graph)
    dataset = os.path.splitext(os.path.basename(graph))[0]
    units = [(s_idx, s, trial) for s_idx, s in enumerate(dropouts) for trial in range(trials)]

    results = []
    if workers == 1:
        for s_idx, s, trial in tqdm(units, desc="sweep", unit="pair", disable=None):
            results.extend(_sweep_unit(g, labels, dataset, s_idx, s, trial, ks, ws, config))
    else:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            futures = [ex.submit(_sweep_unit, g, labels, dataset, s_idx, s, trial, ks, ws, config)
                       for s_idx, s, trial in units]
            for fut in tqdm(as_completed(futures), total=len(futures), desc="sweep", unit="pair", disable=None):
                results.extend(fut.result())

    results.sort(key=lambda item: item[0])
    frame = pd.DataFrame([row for _, row in results], columns=SWEEP_COLUMNS)
    dirname = os.path.dirname(out)
    if dirname:
        os.makedirs(dirname, exist_ok=True)
    frame.to_csv(out, index=False)
    failed = int((frame["error"].fillna("") != "").sum())
    logger.info("sweep: %d rows written to %s, %d failed", len(frame), out, failed)
    return frame

def cmd_runtime(graphs, config, out, s=0.1):
    """runtime against edge count over a ladder of graphs

    Each graph gives a correlated pair at dropout s, aligned with config. The CSV
    holds nodes, edges, runtime_ms and matching_size per graph.

    Returns
    -------
    frame : pandas.DataFrame
    slope : float or None
        slope of log(runtime) against log(edges), None with fewer than two
        distinct edge counts.
    """
    config.validate()
    rows = []
    for path in graphs:
        g, labels, _, _ = load_graph(path)
        dataset = os.path.splitext(os.path.basename(path))[0]
        pair = make_correlated_pair(g, s, rng=config.seed, name=dataset, labels=labels)
        kwargs = config.spectre_kwargs(min(pair.g1.node_count, pair.g2.node_count))
        t0 = time.perf_counter()
        matching, _ = spectre(pair.g1, pair.g2, rng=config.seed, **kwargs)
        runtime = 1000.0 * (time.perf_counter() - t0)
        rows.append({"dataset": dataset, "nodes": pair.g1.node_count,
                     "edges": pair.g1.edge_count + pair.g2.edge_count,
                     "runtime_ms": runtime, "matching_size": len(matching)})
        logger.info("%s: %d nodes, %d edges, %.1f ms", dataset, rows[-1]["nodes"], rows[-1]["edges"], runtime)

    frame = pd.DataFrame(rows, columns=RUNTIME_COLUMNS)
    slope = None
    if frame["edges"].nunique() >= 2:
        slope = float(np.polyfit(np.log(frame["edges"]), np.log(frame["runtime_ms"]), 1)[0])
        logger.info("log-log slope of runtime against edges: %.3f", slope)
    frame.to_csv(out, index=False)
    return frame, slope

def _run_align(args):
    cmd_align(args.graph1, args.graph2, RunConfig.from_args(args), args.out,
              ground_truth=args.ground_truth, centrality=args.centrality,
              nodes1=args.nodes1, nodes2=args.nodes2)

def _run_generate(args):
    cmd_generate(args.graph, args.dropout, args.seed, args.out, max_retries=args.max_retries)

def _run_evaluate(args):
    cmd_evaluate(args.graph1, args.graph2, args.matching, ground_truth=args.ground_truth, out=args.out)

def _run_sweep(args):
    cmd_sweep(args.graph, args.dropout, args.k or [None], args.w, args.trials,
              RunConfig.from_args(args), args.out, workers=args.workers)

def _run_runtime(args):
    cmd_runtime(args.graphs, RunConfig.from_args(args), args.out, s=args.dropout)

def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("-v", "--verbose", action="store_true", help="debug messages")
    common.add_argument("-q", "--quiet", action="store_true", help="warnings and errors only")

    params = argparse.ArgumentParser(add_help=False)
    params.add_argument("--r", type=int, default=4, help="SafeExpand threshold (default 4)")
    params.add_argument("--f", type=float, default=0.75, help="target matched fraction (default 0.75)")
    params.add_argument("--max-rounds", type=int, default=5, help="maximal number of rounds (default 5)")
    params.add_argument("--seed", type=int, default=0, help="master random seed (default 0)")
    params.add_argument("--tol", type=float, default=1e-10, help="power iteration tolerance")
    params.add_argument("--max-power-iters", type=int, default=1000, help="power iteration cap")

    parser = argparse.ArgumentParser(prog="spectrepy", description="Seedless network alignment.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("align", parents=[common, params], help="align two edge lists")
    p.add_argument("graph1")
    p.add_argument("graph2")
    p.add_argument("--k", type=int, default=None, help="top-ranked nodes (default ceil(10 ln n))")
    p.add_argument("--w", type=int, default=1, help="rank window half-width (default 1)")
    p.add_argument("--ground-truth", default=None, help="TSV of true pairs, enables report.json")
    p.add_argument("--centrality", action="store_true", help="also dump centrality CSVs")
    p.add_argument("--nodes1", default=None, help="node-set file restricting graph1")
    p.add_argument("--nodes2", default=None, help="node-set file restricting graph2")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=_run_align)

    p = sub.add_parser("generate", parents=[common], help="generate a correlated pair")
    p.add_argument("graph")
    p.add_argument("--dropout", type=float, required=True, help="edge dropout probability s")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-retries", type=int, default=20)
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=_run_generate)

    p = sub.add_parser("evaluate", parents=[common], help="score a matching")
    p.add_argument("graph1")
    p.add_argument("graph2")
    p.add_argument("matching")
    p.add_argument("--ground-truth", default=None)
    p.add_argument("--out", default=None, help="JSON report file (default: stdout)")
    p.set_defaults(func=_run_evaluate)

    p = sub.add_parser("sweep", parents=[common, params], help="parameter sweep to CSV")
    p.add_argument("graph")
    p.add_argument("--dropout", type=float, nargs="+", default=[0.0])
    p.add_argument("--k", type=int, nargs="+", default=None)
    p.add_argument("--w", type=int, nargs="+", default=[1])
    p.add_argument("--trials", type=int, default=1)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", required=True, help="output CSV")
    p.set_defaults(func=_run_sweep)

    p = sub.add_parser("runtime", parents=[common, params], help="runtime against edge count")
    p.add_argument("graphs", nargs="+")
    p.add_argument("--dropout", type=float, default=0.1)
    p.add_argument("--out", required=True, help="output CSV")
    p.set_defaults(func=_run_runtime)
    return parser

def main(argv=None):
    args = build_parser().parse_args(argv)
    level = logging.DEBUG if args.verbose else logging.WARNING if args.quiet else logging.INFO
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    logging.getLogger("spectrepy").setLevel(level)
    try:
        args.func(args)
    except (OSError, ValueError) as err:
        logger.error("%s", err)
        return 2
    except Exception as err:
        logger.error("%s: %s", type(err).__name__, err)
        return 1
    return 0

if __name__ == "__main__":
    sys.exit(main())
