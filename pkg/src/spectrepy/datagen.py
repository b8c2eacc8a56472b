#!/usr/bin/env python
#-*- coding: utf-8 -*-
import json
import logging
import os
from dataclasses import dataclass, field

import numpy as np

from spectrepy.alignment import as_generator, read_pairs
from spectrepy.graphs import (Graph, NodeLabelMap, induced_subgraph, is_connected,
                              largest_connected_component, read_edge_list, write_edge_list)
from spectrepy.metrics import GroundTruth, edge_similarity

logger = logging.getLogger(__name__)

PAIR_FILES = {"g1": "g1.edges", "g2": "g2.edges", "ground_truth": "ground_truth.tsv", "params": "pair.json"}

class GenerationError(RuntimeError):
    """the subsampled graphs have no usable common connected core"""

@dataclass
class CorrelatedPair:
    """two correlated graphs with their node correspondence

    Attributes
    ----------
    g1, g2 : Graph
        connected graphs; g2 has shuffled node ids.
    ground_truth : GroundTruth
        node i of g1 corresponds to node ground_truth.forward[i] of g2.
    params : dict
        dropout s, seed, source name and number of attempts.
    realized_similarity : float
        edge similarity of the common core before shuffling.
    core_nodes : ndarray
        ids in the source graph of the nodes of g1 (g1 node t is core_nodes[t]).
    labels1, labels2 : NodeLabelMap, optional
        external labels of g1 and g2 nodes.
    """
    g1: Graph
    g2: Graph
    ground_truth: GroundTruth
    params: dict = field(default_factory=dict)
    realized_similarity: float = None
    core_nodes: np.ndarray = None
    labels1: NodeLabelMap = None
    labels2: NodeLabelMap = None

def subsample_edges(g, s, rng=None):
    """keep each edge of g independently with probability 1 - s; same node set"""
    if not 0.0 <= s <= 1.0:
        raise ValueError("s should be a probability.")
    rng = as_generator(rng)
    edges = g.edges()
    keep = rng.random(len(edges)) >= s
    return Graph(g.node_count, edges[keep])

def common_core(t1, t2, min_core=1):
    """largest common connected core of two graphs on the same nodes

    Takes the largest connected components of both graphs, induces both on the
    intersection, and repeats until both induced graphs are connected.

    Parameters
    ----------
    t1, t2 : Graph
        graphs on the same node ids.
    min_core : int, optional
        smallest acceptable core size. Default = 1.

    Returns
    -------
    c1, c2 : Graph
        connected graphs on the same nodes.
    nodes : ndarray
        ids in t1/t2 of the core nodes, in the order of c1/c2 nodes.

    Raises
    ------
    GenerationError
        if the intersection gets smaller than min_core (or empty).
    """
    if t1.node_count != t2.node_count:
        raise ValueError("both graphs should have the same node set.")
    nodes = np.arange(t1.node_count)
    passes = 0
    while True:
        passes += 1
        common = np.intersect1d(largest_connected_component(t1), largest_connected_component(t2))
        if common.size == 0 or common.size < min_core:
            raise GenerationError("common core shrank to %d node(s)" % common.size)
        t1, _ = induced_subgraph(t1, common)
        t2, _ = induced_subgraph(t2, common)
        nodes = nodes[common]
        if is_connected(t1) and is_connected(t2):
            logger.debug("common core: %d nodes after %d pass(es)", len(nodes), passes)
            return t1, t2, nodes

def make_correlated_pair(g, s, rng=None, **kwargs):
    """generate two correlated graphs from g with a known correspondence

    Two independent edge subsamples of g are reduced to their common connected
    core; the second graph's node ids are then shuffled.

    Parameters
    ----------
    g : Graph
        connected source graph.
    s : float
        edge dropout probability, 0 <= s < 1.
    rng : None, int or numpy.random.Generator
        random source. Default seed = 0.
    max_retries : int, optional
        number of attempts before giving up. Default = 20.
    min_core : int, optional
        smallest acceptable core. Default = 2.
    name : str, optional
        source graph name stored in params.
    labels : NodeLabelMap, optional
        labels of g; g1 nodes keep them, g2 nodes are labelled by their new ids.

    Returns
    -------
    pair : CorrelatedPair

    Raises
    ------
    GenerationError
        if every attempt fails.
    """
    max_retries = kwargs.get("max_retries", 20)
    min_core = kwargs.get("min_core", 2)
    name = kwargs.get("name", "")
    labels = kwargs.get("labels", None)

    if not 0.0 <= s < 1.0:
        raise ValueError("s should be in [0, 1).")
    if not is_connected(g):
        raise ValueError("the source graph should be connected; use its largest_connected_component.")
    if rng is None:
        rng = 0
    seed = rng if isinstance(rng, (int, np.integer)) else None
    rng = as_generator(rng)

    for attempt in range(1, max_retries + 1):
        t1 = subsample_edges(g, s, rng)
        t2 = subsample_edges(g, s, rng)
        try:
            c1, c2, nodes = common_core(t1, t2, min_core=min_core)
        except GenerationError as err:
            logger.warning("attempt %d/%d failed: %s", attempt, max_retries, err)
            continue
        break
    else:
        raise GenerationError("no common core after %d attempts at s=%g" % (max_retries, s))

    similarity = edge_similarity(c1, c2)
    permutation = rng.permutation(c2.node_count)
    g2 = c2.relabel(permutation)

    labels1 = NodeLabelMap([labels.label_of(i) for i in nodes] if labels is not None else [str(i) for i in nodes])
    pair = CorrelatedPair(g1=c1, g2=g2,
                          ground_truth=GroundTruth.from_permutation(permutation),
                          params={"source": name, "dropout": float(s),
                                  "seed": None if seed is None else int(seed), "attempts": attempt},
                          realized_similarity=similarity,
                          core_nodes=nodes,
                          labels1=labels1,
                          labels2=NodeLabelMap.identity(g2.node_count))
    logger.info("generated pair: %d nodes, %d/%d edges, Sim_e=%.4f",
                c1.node_count, c1.edge_count, g2.edge_count, similarity)
    return pair

def write_ground_truth(path, gt, labels1=None, labels2=None):
    """TSV lines `<label_g1>\\t<label_g2>`, sorted by g1 id"""
    with open(path, "w", encoding="utf-8") as handle:
        for i, j in gt:
            a = labels1.label_of(i) if labels1 is not None else i
            b = labels2.label_of(j) if labels2 is not None else j
            handle.write("%s\t%s\n" % (a, b))

def read_ground_truth(path, labels1, labels2):
    """read a ground-truth TSV against the labels of both graphs

    Raises
    ------
    GraphParseError
        malformed line.
    ValueError
        unknown label or a correspondence that is not injective.
    """
    return GroundTruth(read_pairs(path, labels1, labels2))

def save_pair(pair, directory):
    """write g1.edges, g2.edges, ground_truth.tsv and the pair.json sidecar"""
    os.makedirs(directory, exist_ok=True)
    labels1 = pair.labels1 or NodeLabelMap.identity(pair.g1.node_count)
    labels2 = pair.labels2 or NodeLabelMap.identity(pair.g2.node_count)
    write_edge_list(os.path.join(directory, PAIR_FILES["g1"]), pair.g1, labels1)
    write_edge_list(os.path.join(directory, PAIR_FILES["g2"]), pair.g2, labels2)
    write_ground_truth(os.path.join(directory, PAIR_FILES["ground_truth"]), pair.ground_truth, labels1, labels2)
    sidecar = dict(pair.params)
    sidecar.update({"nodes": pair.g1.node_count,
                    "edges_g1": pair.g1.edge_count,
                    "edges_g2": pair.g2.edge_count,
                    "realized_similarity": pair.realized_similarity})
    with open(os.path.join(directory, PAIR_FILES["params"]), "w", encoding="utf-8") as handle:
        json.dump(sidecar, handle, indent=2)

def load_pair(directory):
    """read back a pair written by save_pair"""
    g1, labels1 = read_edge_list(os.path.join(directory, PAIR_FILES["g1"]))
    g2, labels2 = read_edge_list(os.path.join(directory, PAIR_FILES["g2"]))
    gt = read_ground_truth(os.path.join(directory, PAIR_FILES["ground_truth"]), labels1, labels2)
    params = {}
    sidecar = os.path.join(directory, PAIR_FILES["params"])
    if os.path.exists(sidecar):
        with open(sidecar, "r", encoding="utf-8") as handle:
            params = json.load(handle)
    return CorrelatedPair(g1=g1, g2=g2, ground_truth=gt, params=params,
                          realized_similarity=params.get("realized_similarity"),
                          labels1=labels1, labels2=labels2)
