#!/usr/bin/env python
#-*- coding: utf-8 -*-
import json
import logging
from dataclasses import asdict, dataclass

import numpy as np

logger = logging.getLogger(__name__)

class GroundTruth:
    """known correspondence between nodes of g1 and nodes of g2

    Parameters
    ----------
    pairs : iterable of (int, int) or dict
        (id in g1, id in g2) pairs; must be injective both ways.
    """

    def __init__(self, pairs=()):
        items = pairs.items() if isinstance(pairs, dict) else pairs
        self.forward = {}
        self.backward = {}
        for i, j in items:
            i, j = int(i), int(j)
            if i in self.forward or j in self.backward:
                raise ValueError("ground truth is not injective at (%d, %d)" % (i, j))
            self.forward[i] = j
            self.backward[j] = i

    @classmethod
    def from_permutation(cls, permutation):
        """node x of g1 corresponds to node permutation[x] of g2"""
        return cls(enumerate(np.asarray(permutation).tolist()))

    def __len__(self):
        return len(self.forward)

    def __iter__(self):
        return iter(sorted(self.forward.items()))

    def is_correct(self, i, j):
        return self.forward.get(i, -1) == j

    def as_array(self, n1):
        """array of length n1 with the g2 image of each g1 node, -1 if none"""
        out = np.full(n1, -1, dtype=np.int64)
        for i, j in self.forward.items():
            out[i] = j
        return out

@dataclass
class MetricReport:
    """evaluation of a matching; undefined fractions are None

    precision, recall and sim_e (edge similarity through the ground truth) need a
    ground truth and stay None without one.
    """
    precision: float = None
    recall: float = None
    edge_correctness: float = None
    ics: float = None
    matching_size: int = 0
    correct_pairs: int = None
    recall_denominator: int = None
    conserved_edges: int = 0
    ec_denominator: int = 0
    ics_denominator: int = 0
    sim_e: float = None

    def to_dict(self):
        return asdict(self)

    def to_json(self, **kwargs):
        return json.dumps(self.to_dict(), **kwargs)

    def to_row(self, **context):
        """flat CSV row: context columns (dataset, s, k, ...) then the scores"""
        row = dict(context)
        row.update({"precision": self.precision, "recall": self.recall,
                    "ec": self.edge_correctness, "ics": self.ics,
                    "matching_size": self.matching_size})
        return row

def _ratio(num, den):
    return num / den if den > 0 else None

def _edge_keys(edges, n):
    # (a, b) with a < b -> a * n + b
    return edges[:, 0] * n + edges[:, 1]

def _image(m, n1):
    image = np.full(n1, -1, dtype=np.int64)
    for i, j in (m.by_left.items() if hasattr(m, "by_left") else m):
        image[i] = j
    return image

def _conserved_edges(g1, g2, image):
    """number of g1 edges whose both endpoints have an image that is a g2 edge"""
    edges = g1.edges()
    a, b = image[edges[:, 0]], image[edges[:, 1]]
    keep = (a >= 0) & (b >= 0)
    mapped = np.sort(np.column_stack((a[keep], b[keep])), axis=1)
    n = max(g2.node_count, 1)
    return int(np.isin(_edge_keys(mapped, n), _edge_keys(g2.edges(), n)).sum())

def _correct_pairs(m, gt):
    return sum(1 for i, j in m if gt.is_correct(i, j))

def precision(m, gt):
    """fraction of matched pairs that agree with the ground truth, None for an empty matching"""
    return _ratio(_correct_pairs(m, gt), len(m))

def _recall_counts(m, gt, g1, g2):
    d1, d2 = g1.degrees, g2.degrees
    population = {i for i, j in gt.forward.items() if d1[i] >= 2 and d2[j] >= 2}
    found = sum(1 for i, j in m if i in population and gt.is_correct(i, j))
    return found, len(population)

def recall(m, gt, g1, g2):
    """fraction of ground-truth nodes of degree >= 2 in both graphs that are correctly matched

    Only nodes in that population count in the numerator as well, so the value stays
    in [0, 1]. The usual published formula counts every correct pair in the
    numerator and can exceed 1. None if the population is empty.
    """
    found, population = _recall_counts(m, gt, g1, g2)
    return _ratio(found, population)

def edge_correctness(g1, g2, m):
    """fraction of the edges of g1 mapped by m onto edges of g2, None if g1 has no edge"""
    return _ratio(_conserved_edges(g1, g2, _image(m, g1.node_count)), g1.edge_count)

def _induced_edge_count(g2, m):
    matched = np.zeros(g2.node_count, dtype=bool)
    matched[list(m.by_right)] = True
    edges = g2.edges()
    return int((matched[edges[:, 0]] & matched[edges[:, 1]]).sum())

def ics_score(g1, g2, m):
    """induced conserved structure: conserved edges over the edges of g2 between matched nodes"""
    return _ratio(_conserved_edges(g1, g2, _image(m, g1.node_count)), _induced_edge_count(g2, m))

def edge_similarity(g1, g2, gt=None):
    """edge overlap 2|E1 & E2| / (|E1| + |E2|)

    Parameters
    ----------
    g1, g2 : Graph
        graphs on a shared node identification.
    gt : GroundTruth, optional
        if given, edges of g1 are first carried to g2 ids through gt (edges with an
        endpoint outside gt are kept in the denominator but never shared).

    Returns
    -------
    sim : float or None
        None if both graphs have no edge.
    """
    if gt is None:
        image = np.arange(g1.node_count)
        if g1.node_count > g2.node_count:
            image[g2.node_count:] = -1
    else:
        image = gt.as_array(g1.node_count)
    shared = _conserved_edges(g1, g2, image)
    return _ratio(2.0 * shared, g1.edge_count + g2.edge_count)

def seed_precision(seeds, gt):
    """fraction of the pairs of a noisy seed set that are correct"""
    seeds = list(seeds)
    return _ratio(sum(1 for i, j in seeds if gt.is_correct(i, j)), len(seeds))

def evaluate(g1, g2, m, gt=None):
    """all metrics of a matching in a MetricReport

    Parameters
    ----------
    g1, g2 : Graph
    m : Matching
    gt : GroundTruth, optional
        without it only the topological scores (EC, ICS) are computed.
    """
    image = _image(m, g1.node_count)
    conserved = _conserved_edges(g1, g2, image)
    induced = _induced_edge_count(g2, m)
    report = MetricReport(edge_correctness=_ratio(conserved, g1.edge_count),
                          ics=_ratio(conserved, induced),
                          matching_size=len(m),
                          conserved_edges=conserved,
                          ec_denominator=g1.edge_count,
                          ics_denominator=induced)
    if gt is not None:
        correct = _correct_pairs(m, gt)
        found, population = _recall_counts(m, gt, g1, g2)
        report.precision = _ratio(correct, len(m))
        report.recall = _ratio(found, population)
        report.correct_pairs = correct
        report.recall_denominator = population
        report.sim_e = edge_similarity(g1, g2, gt)
    return report
