#!/usr/bin/env python
#-*- coding: utf-8 -*-
import itertools
import logging
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sparse
from scipy.sparse.csgraph import connected_components

logger = logging.getLogger(__name__)

COMMENT_PREFIXES = ("#", "%")

class GraphParseError(ValueError):
    """raised when a line of an edge list, node set or pair file cannot be read"""

class DisconnectedGraphError(ValueError):
    """raised when an operation needs a connected graph"""

class Graph:
    """immutable simple undirected graph on the node ids 0..n-1

    Parameters
    ----------
    node_count : int
        number of nodes n.
    edges : array-like, shape (m, 2)
        edge endpoints. Self-loops are dropped and duplicated edges collapse,
        in any orientation.

    Attributes
    ----------
    node_count : int
        number of nodes.
    edge_count : int
        number of undirected edges.
    adjacency : scipy.sparse.csr_matrix
        symmetric 0/1 adjacency matrix with sorted column indices.
    dropped_self_loops : int
        number of self-loop entries removed at construction.

    Notes
    -----
    Neighbor lists are the sorted column indices of the CSR rows, so iteration
    order is deterministic for a given graph.
    """

    def __init__(self, node_count, edges=()):
        node_count = int(node_count)
        if node_count < 0:
            raise ValueError("node_count should be non-negative.")

        edges = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
        if edges.size and (edges.min() < 0 or edges.max() >= node_count):
            raise IndexError("edge endpoint outside 0..%d" % (node_count - 1))

        loops = edges[:, 0] == edges[:, 1]
        self.dropped_self_loops = int(loops.sum())
        edges = np.sort(edges[~loops], axis=1)
        edges = np.unique(edges, axis=0) if edges.size else edges.reshape(0, 2)

        rows = np.concatenate((edges[:, 0], edges[:, 1]))
        cols = np.concatenate((edges[:, 1], edges[:, 0]))
        data = np.ones(len(rows), dtype=np.int8)
        adjacency = sparse.csr_matrix((data, (rows, cols)), shape=(node_count, node_count))
        adjacency.sort_indices()

        self.node_count = node_count
        self.edge_count = len(edges)
        self.adjacency = adjacency
        self._edges = edges
        self._lists = None

    @classmethod
    def from_adjacency(cls, matrix):
        """build a Graph from a (possibly non-symmetric) sparse or dense matrix"""
        coo = sparse.coo_matrix(matrix)
        return cls(coo.shape[0], np.column_stack((coo.row, coo.col)))

    def __repr__(self):
        return "Graph(node_count=%d, edge_count=%d)" % (self.node_count, self.edge_count)

    def __eq__(self, other):
        if not isinstance(other, Graph):
            return NotImplemented
        return self.node_count == other.node_count and np.array_equal(self._edges, other._edges)

    __hash__ = None

    @property
    def degrees(self):
        """ndarray of node degrees"""
        return np.diff(self.adjacency.indptr)

    @property
    def adjacency_lists(self):
        """per-node sorted neighbor lists as Python ints, built once"""
        if self._lists is None:
            indptr, indices = self.adjacency.indptr, self.adjacency.indices.tolist()
            self._lists = tuple(tuple(indices[indptr[i]:indptr[i + 1]]) for i in range(self.node_count))
        return self._lists

    def edges(self):
        """returns a (m, 2) array of edges with the smaller endpoint first, sorted"""
        return self._edges.copy()

    def has_edge(self, i, j):
        row = self.adjacency_lists[i]
        return j in row

    def relabel(self, permutation):
        """returns the graph where node x becomes node permutation[x]

        Parameters
        ----------
        permutation : array-like of int
            a permutation of 0..n-1.
        """
        permutation = np.asarray(permutation, dtype=np.int64)
        if permutation.shape != (self.node_count,) or not np.array_equal(np.sort(permutation), np.arange(self.node_count)):
            raise ValueError("permutation should be a permutation of 0..%d" % (self.node_count - 1))
        return Graph(self.node_count, permutation[self._edges])

    def validate(self):
        """check symmetry, absence of self-loops and the edge count; raise AssertionError otherwise"""
        a = self.adjacency
        assert (a != a.T).nnz == 0, "adjacency is not symmetric"
        assert a.diagonal().sum() == 0, "graph has self-loops"
        assert a.nnz == 2 * self.edge_count, "edge_count does not match adjacency"
        assert a.data.size == 0 or a.data.max() == 1, "graph has multi-edges"
        return True

@dataclass
class NodeLabelMap:
    """bijection between external node labels and the dense ids 0..n-1

    Parameters
    ----------
    labels : list
        labels[i] is the external label of node i. Labels are strings for parsed
        files and parent node ids for induced subgraphs.
    """
    labels: list = field(default_factory=list)

    def __post_init__(self):
        self.labels = list(self.labels)
        self.index = {label: i for i, label in enumerate(self.labels)}
        if len(self.index) != len(self.labels):
            raise ValueError("node labels should be unique.")

    def __len__(self):
        return len(self.labels)

    def __contains__(self, label):
        return label in self.index

    def id_of(self, label):
        try:
            return self.index[label]
        except KeyError:
            raise KeyError("unknown node label %r" % (label,)) from None

    def label_of(self, node):
        return self.labels[node]

    def compose(self, parent):
        """express the labels of this map in terms of the labels of `parent`

        Used after induced_subgraph: this map sends new ids to parent ids, the
        result sends new ids to the parent's external labels.
        """
        return NodeLabelMap([parent.labels[i] for i in self.labels])

    @classmethod
    def identity(cls, n):
        return cls([str(i) for i in range(n)])

def _check_node(g, i):
    if not 0 <= i < g.node_count:
        raise IndexError("node id %r outside 0..%d" % (i, g.node_count - 1))

def parse_edge_list(text):
    """parse a whitespace separated edge list

    Parameters
    ----------
    text : str or iterable of str
        the file content, one `<label> <label>` edge per line. Empty lines and lines
        starting with # or % are ignored.

    Returns
    -------
    g : Graph
        the simple graph over all labels seen; duplicated edges collapse and self-loop
        lines are dropped (their count is in g.dropped_self_loops).
    labels : NodeLabelMap
        labels in order of first appearance.

    Raises
    ------
    GraphParseError
        if a line does not hold exactly two labels.
    """
    lines = text.splitlines() if isinstance(text, str) else text
    index = {}
    edges = []
    for lineno, line in enumerate(lines, start=1):
        line = line.strip()
        if not line or line.startswith(COMMENT_PREFIXES):
            continue
        tokens = line.split()
        if len(tokens) != 2:
            raise GraphParseError("line %d: expected 2 labels, found %d" % (lineno, len(tokens)))
        u = index.setdefault(tokens[0], len(index))
        v = index.setdefault(tokens[1], len(index))
        edges.append((u, v))

    g = Graph(len(index), edges)
    if g.dropped_self_loops:
        logger.warning("dropped %d self-loop line(s)", g.dropped_self_loops)
    return g, NodeLabelMap(list(index))

def format_edge_list(g, labels=None):
    """returns the edge list text of g, one edge per line, using labels if given"""
    names = labels.labels if labels is not None else list(range(g.node_count))
    return "".join("%s %s\n" % (names[u], names[v]) for u, v in g.edges())

def read_edge_list(path):
    """read an edge list file (UTF-8), see parse_edge_list"""
    with open(path, "r", encoding="utf-8") as handle:
        return parse_edge_list(handle.read())

def write_edge_list(path, g, labels=None):
    with open(path, "w", encoding="utf-8") as handle:
        handle.write(format_edge_list(g, labels))

def read_node_set(path):
    """read a node-set file, one label per line; returns the list of labels"""
    out = []
    with open(path, "r", encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, start=1):
            line = line.strip()
            if not line or line.startswith(COMMENT_PREFIXES):
                continue
            if len(line.split()) != 1:
                raise GraphParseError("line %d: expected a single label" % lineno)
            out.append(line)
    return out

def write_node_set(path, nodes):
    with open(path, "w", encoding="utf-8") as handle:
        handle.write("".join("%s\n" % n for n in nodes))

def neighbors(g, i):
    """sorted list of the neighbors of node i"""
    _check_node(g, i)
    return list(g.adjacency_lists[i])

def pair_neighbors(g1, g2, pair):
    """iterate over the neighbors of the pair (i, j) in the product graph

    The neighbors are N_i(g1) x N_j(g2), in lexicographic order. The pair itself
    is never produced since graphs have no self-loops.
    """
    i, j = pair
    _check_node(g1, i)
    _check_node(g2, j)
    return itertools.product(g1.adjacency_lists[i], g2.adjacency_lists[j])

def _components(g):
    return connected_components(g.adjacency, directed=False)

def is_connected(g):
    """True if g has at least one node and a single connected component"""
    if g.node_count == 0:
        return False
    count, _ = _components(g)
    return count == 1

def largest_connected_component(g):
    """node ids of a largest connected component

    Returns
    -------
    nodes : ndarray
        sorted node ids. Among components of maximal size, the one holding the
        smallest node id wins. Empty for the empty graph.
    """
    if g.node_count == 0:
        return np.empty(0, dtype=np.int64)
    _, labels = _components(g)
    comps, first = np.unique(labels, return_index=True)
    sizes = np.bincount(labels)[comps]
    # lexsort: last key is primary -> largest size, then smallest first node
    best = comps[np.lexsort((first, -sizes))[0]]
    return np.flatnonzero(labels == best)

def induced_subgraph(g, nodes):
    """subgraph of g induced by nodes

    Parameters
    ----------
    g : Graph
    nodes : array-like of int
        node ids of g; duplicates are ignored.

    Returns
    -------
    sub : Graph
        graph on len(nodes) nodes, node t of sub being the t-th smallest given id.
    mapping : NodeLabelMap
        mapping.labels[t] is the id in g of node t of sub.
    """
    nodes = np.unique(np.asarray(nodes, dtype=np.int64))
    if nodes.size and (nodes[0] < 0 or nodes[-1] >= g.node_count):
        raise IndexError("node set is not contained in the graph")
    sub = Graph.from_adjacency(g.adjacency[nodes][:, nodes]) if nodes.size else Graph(0)
    return sub, NodeLabelMap(nodes.tolist())
