import os
import tempfile
import unittest

import networkx as nx
import numpy as np

import spectrepy as spy

K3 = spy.Graph(3, [(0, 1), (0, 2), (1, 2)])

def shuffled_copy(nxg, seed):
    g = spy.Graph(nxg.number_of_nodes(), list(nxg.edges()))
    permutation = np.random.default_rng(seed).permutation(g.node_count)
    return g, g.relabel(permutation), spy.GroundTruth.from_permutation(permutation)

class TestMatching(unittest.TestCase):

    def test_injectivity(self):
        m = spy.Matching([(0, 1), (1, 0)])
        self.assertIn((0, 1), m)
        self.assertNotIn((0, 0), m)
        self.assertEqual(len(m), 2)
        self.assertFalse(m.is_free((0, 2)))
        self.assertFalse(m.is_free((2, 0)))
        self.assertTrue(m.is_free((2, 2)))
        with self.assertRaises(ValueError):
            m.add(0, 2)
        with self.assertRaises(ValueError):
            m.add(2, 1)
        self.assertTrue(m.check())
        self.assertEqual(list(m), [(0, 1), (1, 0)])
        self.assertEqual(m, spy.Matching([(1, 0), (0, 1)]))

class TestScoreTable(unittest.TestCase):

    def test_buckets(self):
        table = spy.ScoreTable()
        for pair in [(0, 0), (0, 1), (0, 0), (1, 1), (0, 0)]:
            table.increment(pair)
        self.assertEqual(table[(0, 0)], 3)
        self.assertEqual(table[(2, 2)], 0)
        self.assertEqual(table.total(), 5)
        self.assertEqual(table.max_score, 3)
        self.assertEqual(sorted(table.buckets), [1, 3])
        self.assertTrue(table.check())

    def test_best_with_lazy_removal(self):
        table = spy.ScoreTable()
        for pair in [(0, 0), (0, 0), (1, 1), (1, 1), (2, 2)]:
            table.increment(pair)
        m = spy.Matching()
        score, pairs = table.best(m.is_free)
        self.assertEqual((score, pairs), (2, [(0, 0), (1, 1)]))

        m.add(0, 5)
        m.add(7, 1)
        score, pairs = table.best(m.is_free)
        self.assertEqual((score, pairs), (1, [(2, 2)]))
        self.assertEqual(table.max_score, 1)
        self.assertNotIn(2, table.buckets)
        self.assertEqual(table.best(m.is_free, threshold=2), (0, []))
        self.assertTrue(table.check())

class TestEstimateSeeds(unittest.TestCase):

    def setUp(self):
        # g1 order 0, 1, 2, 3 ; g2 order 1, 2, 3, 0
        self.c1 = spy.CentralityRanking.from_scores([0.9, 0.5, 0.3, 0.1])
        self.c2 = spy.CentralityRanking.from_scores([0.1, 0.9, 0.5, 0.3])

    def test_window(self):
        seeds = spy.estimate_seeds(3, 1, self.c1, self.c2)
        self.assertEqual(seeds, {(0, 1), (0, 2), (1, 1), (1, 2), (1, 3), (2, 2), (2, 3)})

    def test_identity_window(self):
        seeds = spy.estimate_seeds(3, 0, self.c1, self.c2)
        self.assertEqual(seeds, {(0, 1), (1, 2), (2, 3)})

    def test_count(self):
        ranking = spy.CentralityRanking.from_scores(np.linspace(1, 0, 8))
        self.assertEqual(len(spy.estimate_seeds(5, 2, ranking, ranking)), 19)
        rng = np.random.default_rng(3)
        for _ in range(100):
            n = int(rng.integers(1, 60))
            c1 = spy.CentralityRanking.from_scores(rng.random(n))
            c2 = spy.CentralityRanking.from_scores(rng.random(n + int(rng.integers(0, 5))))
            k = int(rng.integers(0, n + 1))
            w = int(rng.integers(0, min(k, n - k) + 1))
            self.assertEqual(len(spy.estimate_seeds(k, w, c1, c2)), (2 * w + 1) * k - w * (w + 1))

    def test_wide_window(self):
        ranking = spy.CentralityRanking.from_scores(np.linspace(1, 0, 6))
        self.assertEqual(len(spy.estimate_seeds(2, 3, ranking, ranking)), 4)

    def test_errors(self):
        with self.assertRaises(ValueError):
            spy.estimate_seeds(4, 1, self.c1, self.c2)
        with self.assertRaises(ValueError):
            spy.estimate_seeds(-1, 0, self.c1, self.c2)
        with self.assertRaises(ValueError):
            spy.estimate_seeds(2, -1, self.c1, self.c2)

class TestSpread(unittest.TestCase):

    def test_spread(self):
        table = spy.spread(spy.ScoreTable(), K3, K3, (0, 0))
        self.assertEqual(table.scores, {(1, 1): 1, (1, 2): 1, (2, 1): 1, (2, 2): 1})
        spy.spread(table, K3, K3, (2, 2))
        self.assertEqual(table[(1, 1)], 2)
        self.assertEqual(table[(0, 0)], 1)
        self.assertEqual(table[(2, 2)], 1)

    def test_isolated(self):
        lonely = spy.Graph(2, [])
        table = spy.spread(spy.ScoreTable(), lonely, K3, (0, 0))
        self.assertEqual(len(table), 0)

    def test_invalid_ids(self):
        for pair in ((-1, 0), (3, 0), (0, -1), (0, 3)):
            table = spy.ScoreTable()
            with self.assertRaises(IndexError):
                spy.spread(table, K3, K3, pair)
            self.assertEqual(len(table), 0)
            with self.assertRaises(IndexError):
                spy.safe_expand(K3, K3, {pair}, r=2)
            with self.assertRaises(IndexError):
                spy.loose_expand(K3, K3, {pair}, spy.eigenvector_centrality(K3), spy.eigenvector_centrality(K3))

class TestSafeExpand(unittest.TestCase):

    def test_identity_seeds(self):
        seeds = {(0, 0), (1, 1), (2, 2)}
        m = spy.safe_expand(K3, K3, seeds, r=2)
        self.assertEqual(m.pairs, seeds)
        self.assertTrue(all(score >= 2 for score in m.match_scores.values()))

    def test_empty_and_unreachable(self):
        self.assertEqual(len(spy.safe_expand(K3, K3, set(), r=2)), 0)
        self.assertEqual(len(spy.safe_expand(K3, K3, {(0, 0), (1, 1), (2, 2)}, r=10)), 0)
        with self.assertRaises(ValueError):
            spy.safe_expand(K3, K3, {(0, 0)}, r=1)

    def test_reproducible(self):
        nxg = nx.barabasi_albert_graph(80, 4, seed=5)
        g1, g2, gt = shuffled_copy(nxg, 5)
        seeds = set(list(gt)[:15])
        a = spy.safe_expand(g1, g2, seeds, r=3, rng=11)
        b = spy.safe_expand(g1, g2, seeds, r=3, rng=11)
        self.assertEqual(a, b)
        self.assertTrue(a.check())
        self.assertTrue(all(score >= 3 for score in a.match_scores.values()))
        self.assertEqual(len(a.match_scores), len(a))

class TestLooseExpand(unittest.TestCase):

    def setUp(self):
        self.c = spy.eigenvector_centrality(K3)

    def test_triangle(self):
        m = spy.loose_expand(K3, K3, {(0, 0)}, self.c, self.c, rng=0)
        self.assertEqual(len(m), 3)
        self.assertIn((0, 0), m)
        self.assertTrue(m.check())

    def test_empty(self):
        self.assertEqual(len(spy.loose_expand(K3, K3, [], self.c, self.c)), 0)

    def test_rebuild_sets(self):
        nxg = nx.barabasi_albert_graph(60, 3, seed=8)
        g1, g2, gt = shuffled_copy(nxg, 8)
        c1, c2 = spy.eigenvector_centrality(g1), spy.eigenvector_centrality(g2)
        seen = []

        # rebuilt pairs neighbour a pair that spread (matched or an unmatched seed),
        # not necessarily a matched one
        def on_rebuild(current, matching, used):
            for u, v in current:
                self.assertTrue(matching.is_free((u, v)))
                self.assertNotIn((u, v), used)
                self.assertTrue(any(p in used for p in spy.pair_neighbors(g1, g2, (u, v))))
            seen.append(len(current))

        m = spy.loose_expand(g1, g2, list(gt)[:5], c1, c2, rng=1, on_rebuild=on_rebuild)
        self.assertTrue(m.check())
        self.assertTrue(seen)

class TestSpectre(unittest.TestCase):

    def test_rigid_shuffle(self):
        nxg = nx.gnp_random_graph(40, 0.3, seed=4)
        self.assertTrue(nx.is_connected(nxg))
        g1, g2, gt = shuffled_copy(nxg, 4)
        m, stats = spy.spectre(g1, g2, w=0, rng=0)
        self.assertEqual(spy.precision(m, gt), 1.0)
        self.assertGreaterEqual(len(m), 0.75 * 40)
        self.assertEqual(stats.stop_reason, "target")

    def test_self_alignment(self):
        nxg = nx.barabasi_albert_graph(200, 5, seed=1)
        g1, g2, gt = shuffled_copy(nxg, 1)
        m, stats = spy.spectre(g1, g2, rng=0)
        self.assertGreaterEqual(spy.precision(m, gt), 0.9)
        self.assertGreaterEqual(spy.edge_correctness(g1, g2, m), 0.9)
        self.assertEqual(stats.k, 53)
        self.assertEqual(stats.seed_count, 3 * 53 - 2)

    def test_self_alignment_over_seeds(self):
        nxg = nx.barabasi_albert_graph(332, 7, seed=0)
        good = 0
        for seed in range(5):
            g1, g2, gt = shuffled_copy(nxg, seed)
            m, _ = spy.spectre(g1, g2, rng=seed)
            if spy.precision(m, gt) >= 0.95 and spy.edge_correctness(g1, g2, m) >= 0.95:
                good += 1
        self.assertGreaterEqual(good, 4)

    def test_round_control(self):
        nxg = nx.barabasi_albert_graph(50, 3, seed=2)
        g1, g2, _ = shuffled_copy(nxg, 2)
        m, stats = spy.spectre(g1, g2, f=0.0, max_rounds=5)
        self.assertEqual(len(stats.rounds), 1)
        self.assertEqual(stats.stop_reason, "target")

        m, stats = spy.spectre(g1, g2, f=1.0, max_rounds=1, k=2)
        self.assertEqual(len(stats.rounds), 1)
        if len(m) < 50:
            self.assertEqual(stats.stop_reason, "max_rounds")

    def test_deterministic(self):
        nxg = nx.barabasi_albert_graph(70, 3, seed=3)
        g1, g2, _ = shuffled_copy(nxg, 3)
        a, _ = spy.spectre(g1, g2, rng=42)
        b, _ = spy.spectre(g1, g2, rng=42)
        self.assertEqual(a, b)

    def test_empty_seed_set(self):
        path = spy.Graph(4, [(0, 1), (1, 2), (2, 3)])
        m, stats = spy.spectre(path, path, k=0)
        self.assertEqual(len(m), 0)
        self.assertEqual(stats.stop_reason, "empty")
        self.assertEqual(stats.rounds, [])

    def test_errors(self):
        with self.assertRaises(spy.DisconnectedGraphError):
            spy.spectre(spy.Graph(4, [(0, 1), (2, 3)]), K3)
        with self.assertRaises(ValueError):
            spy.spectre(K3, K3, k=3, w=1)
        with self.assertRaises(ValueError):
            spy.spectre(K3, K3, f=1.5)
        with self.assertRaises(ValueError):
            spy.spectre(K3, K3, max_rounds=0)

    def test_stats_json(self):
        nxg = nx.barabasi_albert_graph(40, 3, seed=6)
        g1, g2, _ = shuffled_copy(nxg, 6)
        _, stats = spy.spectre(g1, g2)
        out = stats.to_dict()
        self.assertNotIn("seeds", out)
        self.assertEqual(len(out["rounds"]), len(stats.rounds))
        self.assertIn("safe_ms", out["rounds"][0])
        self.assertIn('"stop_reason"', stats.to_json())

class TestMatchingFiles(unittest.TestCase):

    def test_write_read(self):
        labels1 = spy.NodeLabelMap(["a", "b", "c"])
        labels2 = spy.NodeLabelMap(["x", "y", "z"])
        m = spy.Matching([(0, 2), (2, 1)])
        with tempfile.TemporaryDirectory() as tmp:
            path = os.path.join(tmp, "m.tsv")
            spy.write_matching(path, m, labels1, labels2)
            with open(path) as handle:
                self.assertEqual(handle.read(), "a\tz\nc\ty\n")
            self.assertEqual(spy.read_matching(path, labels1, labels2), m)

            with open(path, "a") as handle:
                handle.write("b\tq\n")
            with self.assertRaises(ValueError):
                spy.read_matching(path, labels1, labels2)
            with open(path, "w") as handle:
                handle.write("a\n")
            with self.assertRaises(spy.GraphParseError):
                spy.read_matching(path, labels1, labels2)

if __name__ == '__main__':
    unittest.main()
