#!/usr/bin/env python
#-*- coding: utf-8 -*-
import logging
from dataclasses import dataclass

import numpy as np
import pandas as pd
import scipy.sparse as sparse

from spectrepy.graphs import DisconnectedGraphError, is_connected

logger = logging.getLogger(__name__)

@dataclass
class CentralityRanking:
    """eigenvector centrality scores and the ranking they induce

    Attributes
    ----------
    scores : ndarray
        nonnegative per-node scores, unit Euclidean norm.
    order : ndarray
        node ids by decreasing score, ties by increasing node id.
    rank_of : ndarray
        inverse permutation of order (0-based rank of each node).
    eigenvalue : float
        Rayleigh quotient of the adjacency matrix at scores.
    iterations : int
        number of power iterations performed.
    converged : bool
        False if max_iters was reached before the tolerance.
    """
    scores: np.ndarray
    order: np.ndarray
    rank_of: np.ndarray
    eigenvalue: float = 0.0
    iterations: int = 0
    converged: bool = True

    def __len__(self):
        return len(self.scores)

    @classmethod
    def from_scores(cls, scores, **kwargs):
        """build the ranking from a score vector; kwargs are stored as is"""
        scores = np.asarray(scores, dtype=float)
        n = len(scores)
        order = np.lexsort((np.arange(n), -scores))
        rank_of = np.empty(n, dtype=np.int64)
        rank_of[order] = np.arange(n)
        return cls(scores=scores, order=order, rank_of=rank_of, **kwargs)

def eigenvector_centrality(g, tol=1e-10, max_iters=1000):
    """eigenvector centrality of a connected graph by power iteration

    Parameters
    ----------
    g : Graph
        a connected graph.
    tol : float, optional
        stop when the infinity norm between two successive iterates is below tol. Default = 1e-10.
    max_iters : int, optional
        maximal number of iterations. Default = 1000.

    Returns
    -------
    ranking : CentralityRanking

    Notes
    -----
    Iterates on A + I, which has the Perron vector of A but no eigenvalue of the
    opposite sign with equal modulus, so bipartite graphs converge as well.
    Starts from the uniform vector and renormalises at each step. Reaching
    max_iters only logs a warning and sets ranking.converged to False.
    """
    if tol <= 0:
        raise ValueError("tol should be positive.")
    if max_iters < 1:
        raise ValueError("max_iters should be at least 1.")
    if not is_connected(g):
        raise DisconnectedGraphError(
            "eigenvector centrality needs a connected graph; "
            "restrict it to its largest_connected_component first.")

    n = g.node_count
    shifted = (g.adjacency.astype(float) + sparse.identity(n, format="csr")).tocsr()

    x = np.full(n, 1.0 / np.sqrt(n))
    converged = False
    for it in range(1, max_iters + 1):
        y = shifted @ x
        y /= np.linalg.norm(y)
        delta = np.abs(y - x).max()
        x = y
        if delta < tol:
            converged = True
            break

    if not converged:
        logger.warning("power iteration stopped at max_iters=%d before reaching tol=%g", max_iters, tol)

    x = np.abs(x)
    x /= np.linalg.norm(x)
    eigenvalue = float(x @ (g.adjacency @ x))
    logger.debug("eigenvector centrality: %d iterations, lambda=%.6g", it, eigenvalue)
    return CentralityRanking.from_scores(x, eigenvalue=eigenvalue, iterations=it, converged=converged)

def top_k(ranking, k):
    """the k most central node ids, most central first"""
    if k < 0 or k > len(ranking):
        raise ValueError("k should be between 0 and the number of nodes (%d)." % len(ranking))
    return ranking.order[:k].tolist()

def write_centrality(path, ranking, labels=None):
    """dump a ranking as CSV with columns label, score, rank (1-based)

    Parameters
    ----------
    path : str
        output file.
    ranking : CentralityRanking
    labels : NodeLabelMap, optional
        external labels; node ids are written if not provided.
    """
    order = ranking.order
    names = [labels.label_of(i) for i in order] if labels is not None else order
    frame = pd.DataFrame({"label": names,
                          "score": ranking.scores[order],
                          "rank": np.arange(1, len(order) + 1)})
    frame.to_csv(path, index=False)
    return frame
