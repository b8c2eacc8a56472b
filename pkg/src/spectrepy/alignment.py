#!/usr/bin/env python
#-*- coding: utf-8 -*-
"""Seedless alignment by centrality-ranked seeds and iterated bootstrap percolation.

The percolation works on the implicit product graph of g1 and g2: the pair (i, j)
is adjacent to every pair of N_i(g1) x N_j(g2). Scores are kept sparsely, only for
pairs that have received at least one increment.
"""
import json
import logging
import math
import time
from collections import defaultdict
from dataclasses import asdict, dataclass, field

import numpy as np

from spectrepy.centrality import eigenvector_centrality
from spectrepy.graphs import DisconnectedGraphError, GraphParseError, COMMENT_PREFIXES, _check_node, is_connected

logger = logging.getLogger(__name__)

# a noisy seed set: a set of (i, j) pairs where a node may appear in several pairs
PairSet = frozenset

def as_generator(rng=None):
    """normalise None, an int seed or a Generator to a numpy Generator (None means seed 0)"""
    if isinstance(rng, np.random.Generator):
        return rng
    return np.random.default_rng(0 if rng is None else rng)

class Matching:
    """a set of node pairs where each node of either graph appears at most once

    Parameters
    ----------
    pairs : iterable of (int, int), optional
        initial pairs.

    Attributes
    ----------
    by_left : dict
        node of g1 -> node of g2.
    by_right : dict
        node of g2 -> node of g1.
    match_scores : dict
        pair -> score it had when it was matched by a percolation routine.
    """

    def __init__(self, pairs=()):
        self.by_left = {}
        self.by_right = {}
        self.match_scores = {}
        for i, j in pairs:
            self.add(i, j)

    def add(self, i, j, score=None):
        if i in self.by_left or j in self.by_right:
            raise ValueError("pair (%r, %r) conflicts with the matching" % (i, j))
        self.by_left[i] = j
        self.by_right[j] = i
        if score is not None:
            self.match_scores[(i, j)] = score

    def is_free(self, pair):
        """True if neither node of pair is matched"""
        return pair[0] not in self.by_left and pair[1] not in self.by_right

    @property
    def pairs(self):
        return set(self.by_left.items())

    def __len__(self):
        return len(self.by_left)

    def __iter__(self):
        return iter(sorted(self.by_left.items()))

    def __contains__(self, pair):
        i, j = pair
        return i in self.by_left and self.by_left[i] == j

    def __eq__(self, other):
        if not isinstance(other, Matching):
            return NotImplemented
        return self.by_left == other.by_left

    __hash__ = None

    def __repr__(self):
        return "Matching(%d pairs)" % len(self)

    def check(self):
        """assert injectivity and consistency of both lookups"""
        assert len(self.by_left) == len(self.by_right), "matching is not injective"
        for i, j in self.by_left.items():
            assert self.by_right.get(j) == i, "inconsistent pair (%r, %r)" % (i, j)
        return True

class ScoreTable:
    """sparse scores over the product graph, bucketed by score

    Only pairs that received an increment are stored; absent pairs score 0.
    buckets[s] holds every stored pair of score s, in insertion order. Pairs
    that stopped being eligible (one node matched) are removed lazily, when a
    query meets them.
    """

    def __init__(self):
        self.scores = {}
        self.buckets = defaultdict(dict)
        self.max_score = 0

    def __len__(self):
        return len(self.scores)

    def __getitem__(self, pair):
        return self.scores.get(pair, 0)

    def increment(self, pair):
        old = self.scores.get(pair, 0)
        new = old + 1
        self.scores[pair] = new
        if old:
            bucket = self.buckets[old]
            bucket.pop(pair, None)
            if not bucket:
                del self.buckets[old]
        self.buckets[new][pair] = None
        if new > self.max_score:
            self.max_score = new

    def total(self):
        """sum of all scores"""
        return sum(self.scores.values())

    def _compact(self, score, eligible):
        bucket = self.buckets.get(score)
        if bucket is None:
            return []
        stale = [p for p in bucket if not eligible(p)]
        for p in stale:
            del bucket[p]
        if not bucket:
            del self.buckets[score]
            return []
        return list(bucket)

    def best(self, eligible, threshold=1):
        """highest score among eligible pairs and the pairs reaching it

        Parameters
        ----------
        eligible : callable
            pair -> bool. A pair that is not eligible is dropped from the buckets
            and never reconsidered, so eligibility may only be lost.
        threshold : int
            minimal score of interest.

        Returns
        -------
        score : int
            0 if no eligible pair reaches threshold.
        pairs : list
            eligible pairs of that score, in insertion order.
        """
        threshold = max(threshold, 1)
        while self.max_score >= threshold:
            pairs = self._compact(self.max_score, eligible)
            if pairs:
                return self.max_score, pairs
            # nothing eligible left at the top: lower the ceiling
            self.max_score -= 1
        return 0, []

    def pairs_with_score(self, score, eligible):
        """eligible pairs holding exactly score"""
        return self._compact(score, eligible)

    def check(self):
        """assert that buckets and the score map agree"""
        seen = 0
        for s, bucket in self.buckets.items():
            assert bucket, "empty bucket %d kept" % s
            assert s <= self.max_score, "bucket above max_score"
            for p in bucket:
                assert self.scores[p] == s, "pair %r filed under %d" % (p, s)
            seen += len(bucket)
        assert seen <= len(self.scores)
        return True

# pairs that already spread their increments in LooseExpand
UsedSet = set

@dataclass
class RoundStats:
    round: int
    seed_count: int
    safe_size: int
    loose_size: int
    safe_ms: float
    loose_ms: float

@dataclass
class RunStats:
    """per-round record of a spectre run

    `seeds` (the initial noisy seed set) is kept for inspection and left out of
    the JSON form.
    """
    k: int
    w: int
    r: int
    f: float
    max_rounds: int
    seed_count: int = 0
    centrality_ms: float = 0.0
    total_ms: float = 0.0
    stop_reason: str = ""
    rounds: list = field(default_factory=list)
    seeds: frozenset = field(default_factory=frozenset, repr=False)

    def to_dict(self):
        out = asdict(self)
        out.pop("seeds")
        return out

    def to_json(self, **kwargs):
        return json.dumps(self.to_dict(), **kwargs)

def default_k(n):
    """ceil(10 ln n), the default number of top-ranked nodes used as seeds"""
    return int(math.ceil(10.0 * math.log(n))) if n > 1 else 1

def estimate_seeds(k, w, c1, c2):
    """noisy seed set from two centrality rankings

    Each of the top-k nodes of g1, at rank t, is paired with the nodes of g2 of
    ranks t-w..t+w, the window being clipped to the top-k band [1, k].

    Parameters
    ----------
    k : int
        number of top-ranked nodes.
    w : int
        window half-width.
    c1, c2 : CentralityRanking
        rankings of g1 and g2.

    Returns
    -------
    seeds : PairSet
        (2w+1)k - w(w+1) pairs when w <= k.

    Examples
    --------
    With k = 3 and w = 1, rank 1 of g1 is paired with ranks 1, 2 of g2, rank 2 with
    ranks 1, 2, 3 and rank 3 with ranks 2, 3.
    """
    n1, n2 = len(c1), len(c2)
    if k < 0 or w < 0:
        raise ValueError("k and w should be non-negative.")
    if k + w > min(n1, n2):
        raise ValueError("k + w = %d exceeds the smallest graph (%d nodes)." % (k + w, min(n1, n2)))

    left = c1.order[:k].tolist()
    right = c2.order[:k].tolist()
    seeds = set()
    for t, i in enumerate(left):
        for s in range(max(0, t - w), min(k, t + w + 1)):
            seeds.add((i, right[s]))
    return PairSet(seeds)

def spread(table, g1, g2, pair):
    """add one to the score of every product-graph neighbor of pair

    Raises
    ------
    IndexError
        if i is not a node of g1 or j is not a node of g2.
    """
    i, j = pair
    _check_node(g1, i)
    _check_node(g2, j)
    right = g2.adjacency_lists[j]
    increment = table.increment
    for u in g1.adjacency_lists[i]:
        for v in right:
            increment((u, v))
    return table

def safe_expand(g1, g2, seeds, r=4, rng=None):
    """confident percolation from a noisy seed set

    Every seed spreads once. Then, while an unmatched pair (both nodes free) has
    score at least r, one of the highest-scoring such pairs is drawn at random,
    matched, and spreads.

    Parameters
    ----------
    g1, g2 : Graph
    seeds : iterable of pairs
        the noisy seed set; may repeat nodes.
    r : int, optional
        matching threshold, at least 2. Default = 4.
    rng : None, int or numpy.random.Generator
        source of the tie-breaking draws.

    Returns
    -------
    m0 : Matching
        its match_scores hold the score of each pair when it was matched.
    """
    if r < 2:
        raise ValueError("r should be at least 2.")
    rng = as_generator(rng)

    table = ScoreTable()
    matching = Matching()
    for pair in sorted(set(seeds)):
        spread(table, g1, g2, pair)

    while True:
        score, candidates = table.best(matching.is_free, threshold=r)
        if not candidates:
            break
        pair = candidates[rng.integers(len(candidates))] if len(candidates) > 1 else candidates[0]
        matching.add(*pair, score=score)
        spread(table, g1, g2, pair)

    logger.debug("safe_expand: %d seeds -> %d pairs", len(seeds), len(matching))
    return matching

def _closest_in_centrality(candidates, c1, c2, rng):
    s1, s2 = c1.scores, c2.scores
    gaps = np.array([abs(s1[u] - s2[v]) for u, v in candidates])
    ties = np.flatnonzero(gaps == gaps.min())
    return candidates[ties[rng.integers(len(ties))] if len(ties) > 1 else ties[0]]

def loose_expand(g1, g2, seeds, c1, c2, rng=None, **kwargs):
    """relaxed percolation with rebuilding of the seed set

    Parameters
    ----------
    g1, g2 : Graph
    seeds : iterable of pairs
        usually the matching returned by safe_expand.
    c1, c2 : CentralityRanking
        used to prefer, among highest-scoring pairs, the one with the smallest
        centrality gap |C1(u) - C2(v)|.
    rng : None, int or numpy.random.Generator
        breaks the remaining ties.
    on_rebuild : callable, optional
        called as on_rebuild(rebuilt_pairs, matching, used) after each rebuild.

    Returns
    -------
    m : Matching

    Notes
    -----
    Seeds spread once and enter the used set. Pairs with both nodes free and
    score >= 2 are then matched one at a time; a matched pair spreads only if it
    is not used yet. When no such pair is left, the seed set is rebuilt from the
    free, unused product-graph neighbors of the pairs that spread, i.e. the free
    pairs of score one, and the process repeats until that set is empty.
    Seeds that were never matched have spread too, so a rebuilt pair is only
    guaranteed a used neighbor, not a matched one.
    """
    rng = as_generator(rng)
    on_rebuild = kwargs.get("on_rebuild", None)

    table = ScoreTable()
    matching = Matching()
    used = UsedSet()
    current = sorted(set(seeds))
    rebuilds = 0

    while current:
        for pair in current:
            spread(table, g1, g2, pair)
            used.add(pair)

        while True:
            score, candidates = table.best(matching.is_free, threshold=2)
            if not candidates:
                break
            pair = _closest_in_centrality(candidates, c1, c2, rng)
            matching.add(*pair, score=score)
            if pair not in used:
                spread(table, g1, g2, pair)
                used.add(pair)

        # every free pair left has score <= 1
        current = sorted(p for p in table.pairs_with_score(1, matching.is_free) if p not in used)
        rebuilds += 1
        if on_rebuild is not None and current:
            on_rebuild(current, matching, used)

    logger.debug("loose_expand: %d seeds -> %d pairs after %d rebuild(s)",
                 len(seeds), len(matching), rebuilds - 1)
    return matching

def spectre(g1, g2, k=None, w=1, r=4, f=0.75, max_rounds=5, rng=None, **kwargs):
    """align two connected graphs without seeds

    Parameters
    ----------
    g1, g2 : Graph
        connected graphs.
    k : int, optional
        number of top-ranked nodes for the seed estimate. Default = ceil(10 ln n)
        with n = min(|V1|, |V2|), capped at n - w.
    w : int, optional
        rank window half-width. Default = 1.
    r : int, optional
        SafeExpand threshold. Default = 4.
    f : float, optional
        target fraction of min(|V1|, |V2|) to match before stopping. Default = 0.75.
    max_rounds : int, optional
        maximal number of SafeExpand + LooseExpand rounds. Default = 5.
    rng : None, int or numpy.random.Generator
        all tie-breaking draws come from this generator. Default seed = 0.
    tol : float, optional
        power iteration tolerance. Default = 1e-10.
    max_iters : int, optional
        power iteration cap. Default = 1000.
    centralities : tuple of CentralityRanking, optional
        precomputed rankings (c1, c2) of g1 and g2.

    Returns
    -------
    matching : Matching
    stats : RunStats

    Notes
    -----
    The first round always runs. Rounds feed their output back as the next seed
    set until the matching covers f * min(|V1|, |V2|) nodes or max_rounds is
    reached. An empty seed set ends the run early since every later round
    would return the same empty matching.
    """
    for name, g in (("g1", g1), ("g2", g2)):
        if not is_connected(g):
            raise DisconnectedGraphError(
                "%s is not connected; align its largest_connected_component instead." % name)
    if not 0.0 <= f <= 1.0:
        raise ValueError("f should be between 0 and 1.")
    if max_rounds < 1:
        raise ValueError("max_rounds should be at least 1.")

    tol = kwargs.get("tol", 1e-10)
    max_iters = kwargs.get("max_iters", 1000)
    centralities = kwargs.get("centralities", None)
    rng = as_generator(rng)
    n = min(g1.node_count, g2.node_count)

    if k is None:
        k = default_k(n)
        if k + w > n:
            logger.warning("default k=%d capped to %d for %d nodes", k, max(n - w, 0), n)
            k = max(n - w, 0)

    start = time.perf_counter()
    if centralities is None:
        c1 = eigenvector_centrality(g1, tol=tol, max_iters=max_iters)
        c2 = eigenvector_centrality(g2, tol=tol, max_iters=max_iters)
    else:
        c1, c2 = centralities
    stats = RunStats(k=k, w=w, r=r, f=f, max_rounds=max_rounds,
                     centrality_ms=1000.0 * (time.perf_counter() - start))

    seeds = estimate_seeds(k, w, c1, c2)
    stats.seeds = seeds
    stats.seed_count = len(seeds)
    logger.info("spectre: k=%d w=%d r=%d, %d seed pairs", k, w, r, len(seeds))

    target = f * n
    matching = Matching()
    stats.stop_reason = "max_rounds"
    for rnd in range(1, max_rounds + 1):
        if not seeds:
            stats.stop_reason = "empty"
            logger.warning("spectre: empty seed set, stopping after %d round(s)", rnd - 1)
            break
        t0 = time.perf_counter()
        m0 = safe_expand(g1, g2, seeds, r=r, rng=rng)
        t1 = time.perf_counter()
        matching = loose_expand(g1, g2, m0, c1, c2, rng=rng)
        t2 = time.perf_counter()
        stats.rounds.append(RoundStats(round=rnd, seed_count=len(seeds),
                                       safe_size=len(m0), loose_size=len(matching),
                                       safe_ms=1000.0 * (t1 - t0), loose_ms=1000.0 * (t2 - t1)))
        logger.info("round %d: |M0|=%d |M|=%d (target %.1f)", rnd, len(m0), len(matching), target)
        seeds = list(matching)
        if len(matching) >= target:
            stats.stop_reason = "target"
            break

    stats.total_ms = 1000.0 * (time.perf_counter() - start)
    return matching, stats

def write_matching(path, matching, labels1=None, labels2=None):
    """write a matching as TSV lines `<label_g1>\\t<label_g2>`, sorted by g1 id"""
    with open(path, "w", encoding="utf-8") as handle:
        for i, j in matching:
            a = labels1.label_of(i) if labels1 is not None else i
            b = labels2.label_of(j) if labels2 is not None else j
            handle.write("%s\t%s\n" % (a, b))

def read_pairs(path, labels1, labels2):
    """read a two-column label file into (id_g1, id_g2) pairs

    Raises
    ------
    GraphParseError
        malformed line.
    ValueError
        label unknown to the corresponding graph.
    """
    pairs = []
    with open(path, "r", encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, start=1):
            line = line.strip()
            if not line or line.startswith(COMMENT_PREFIXES):
                continue
            tokens = line.split()
            if len(tokens) != 2:
                raise GraphParseError("line %d: expected 2 labels, found %d" % (lineno, len(tokens)))
            a, b = tokens
            if a not in labels1 or b not in labels2:
                raise ValueError("line %d: unknown node label in pair (%s, %s)" % (lineno, a, b))
            pairs.append((labels1.id_of(a), labels2.id_of(b)))
    return pairs

def read_matching(path, labels1, labels2):
    return Matching(read_pairs(path, labels1, labels2))
