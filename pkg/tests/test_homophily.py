import numpy as np
import pytest
import scipy.stats

from sentepi.homophily import (
    assortativity,
    bootstrap_null,
    community_enrichment,
    detect_communities,
    in_fraction,
    in_fraction_test,
    modularity,
)
from sentepi.stats import derive_stream
from sentepi.synthetic import synthetic_opinionated_network


def brute_force_assortativity(labels, edges):
    """Naive mixing-matrix evaluation, independent of the library path."""
    types = sorted({labels[n] for n in labels}, key=repr)
    e = {(a, b): 0.0 for a in types for b in types}
    for u, v in edges:
        e[(labels[u], labels[v])] += 1.0
    m = len(edges)
    for key in e:
        e[key] /= m
    a = {t: sum(e[(t, s)] for s in types) for t in types}
    b = {t: sum(e[(s, t)] for s in types) for t in types}
    trace = sum(e[(t, t)] for t in types)
    sab = sum(a[t] * b[t] for t in types)
    return (trace - sab) / (1.0 - sab)


class TestAssortativity:
    def test_two_same_sign_cliques(self):
        labels = {i: 1 for i in range(4)} | {i: -1 for i in range(4, 8)}
        edges = [(i, j) for i in range(4) for j in range(4) if i != j]
        edges += [(i, j) for i in range(4, 8) for j in range(4, 8) if i != j]
        result = assortativity(labels, edges)
        assert result.r == 1.0
        assert not result.degenerate

    def test_complete_bipartite_both_directions(self):
        labels = {0: 1, 1: 1, 2: -1, 3: -1}
        edges = []
        for i in (0, 1):
            for j in (2, 3):
                edges += [(i, j), (j, i)]
        assert assortativity(labels, edges).r == pytest.approx(-1.0, abs=1e-15)

    def test_three_node_worked_example(self):
        labels = {"A": 1, "B": 1, "C": -1}
        edges = [("A", "B"), ("B", "A"), ("A", "C"), ("C", "B")]
        assert assortativity(labels, edges).r == pytest.approx(-1 / 3, abs=1e-15)

    def test_sign_swap_invariance(self):
        gen = derive_stream(31).generator()
        labels = {i: 1 if gen.random() < 0.5 else -1 for i in range(30)}
        edges = [
            (int(a), int(b))
            for a, b in gen.integers(0, 30, size=(120, 2))
            if a != b
        ]
        swapped = {node: -sign for node, sign in labels.items()}
        assert assortativity(labels, edges).r == pytest.approx(
            assortativity(swapped, edges).r, abs=1e-15
        )

    def test_matches_brute_force_on_random_graphs(self):
        gen = derive_stream(32).generator()
        checked = 0
        while checked < 100:
            n = int(gen.integers(3, 21))
            labels = {i: int(gen.integers(0, 3)) for i in range(n)}
            k = int(gen.integers(1, n * 3))
            edges = list(
                {
                    (int(a), int(b))
                    for a, b in gen.integers(0, n, size=(k, 2))
                    if a != b
                }
            )
            if not edges:
                continue
            result = assortativity(labels, edges)
            if result.degenerate:
                continue
            expected = brute_force_assortativity(labels, edges)
            assert result.r == pytest.approx(expected, abs=1e-12)
            checked += 1

    def test_single_type_degenerates_to_one(self):
        result = assortativity({0: 1, 1: 1}, [(0, 1)])
        assert result.r == 1.0
        assert result.degenerate

    def test_no_edges_rejected(self):
        with pytest.raises(ValueError):
            assortativity({0: 1, 1: -1}, [])


class TestBootstrapNull:
    def test_mean_near_zero(self):
        signs, edges = synthetic_opinionated_network(300, 2400, derive_stream(41))
        null = bootstrap_null(signs, edges, 400, derive_stream(41, 1))
        assert abs(null.mean) < 0.02
        assert len(null) == 400

    def test_reproducible(self):
        signs, edges = synthetic_opinionated_network(100, 600, derive_stream(42))
        a = bootstrap_null(signs, edges, 50, derive_stream(7))
        b = bootstrap_null(signs, edges, 50, derive_stream(7))
        assert np.array_equal(a.values, b.values)

    def test_planted_homophily_beats_null_max(self):
        signs, edges = synthetic_opinionated_network(
            400, 3200, derive_stream(43), homophily=0.7
        )
        observed = assortativity(signs, edges).r
        null = bootstrap_null(signs, edges, 500, derive_stream(43, 1))
        assert observed > null.max

    def test_summary_order(self):
        signs, edges = synthetic_opinionated_network(100, 800, derive_stream(44))
        null = bootstrap_null(signs, edges, 200, derive_stream(44, 1))
        assert null.ci_low <= null.mean <= null.ci_high <= null.max

    def test_depends_only_on_topology_multiset_and_seed(self):
        signs, edges = synthetic_opinionated_network(60, 400, derive_stream(45))
        # rotate the label assignment around the nodes: same multiset
        nodes = sorted(signs)
        rotated = {
            node: signs[nodes[(i + 7) % len(nodes)]] for i, node in enumerate(nodes)
        }
        a = bootstrap_null(signs, edges, 40, derive_stream(46))
        b = bootstrap_null(rotated, edges, 40, derive_stream(46))
        assert np.array_equal(a.values, b.values)

    def test_worker_count_does_not_change_values(self):
        signs, edges = synthetic_opinionated_network(80, 500, derive_stream(47))
        serial = bootstrap_null(signs, edges, 60, derive_stream(48), workers=1)
        parallel = bootstrap_null(signs, edges, 60, derive_stream(48), workers=2)
        assert np.array_equal(serial.values, parallel.values)

    def test_nearest_rank_percentiles(self):
        signs, edges = synthetic_opinionated_network(40, 200, derive_stream(49))
        null = bootstrap_null(signs, edges, 100, derive_stream(49, 1))
        ordered = np.sort(null.values)
        # nearest-rank: ceil(q * n) ordinal
        assert null.ci_low == ordered[2]  # ceil(0.025 * 100) = 3rd
        assert null.ci_high == ordered[97]  # ceil(0.975 * 100) = 98th
        assert null.max == ordered[-1]


class TestInFraction:
    def test_mixed_incoming_edges(self):
        labels = {0: 1, 1: 1, 2: 1, 3: -1}
        edges = [(1, 0), (2, 0), (3, 0)]  # two same-sign, one opposite
        f = in_fraction(labels, edges)
        assert f[0] == pytest.approx(2 / 3)

    def test_no_incoming_edges_absent(self):
        f = in_fraction({0: 1, 1: 1}, [(0, 1)])
        assert 0 not in f
        assert f[1] == 1.0

    def test_all_same_sign(self):
        labels = {i: 1 for i in range(5)}
        edges = [(i, (i + 1) % 5) for i in range(5)]
        f = in_fraction(labels, edges)
        assert all(v == 1.0 for v in f.values())

    def test_indegree_weighted_mean_equals_same_sign_edge_fraction(self):
        gen = derive_stream(51).generator()
        labels = {i: 1 if gen.random() < 0.6 else -1 for i in range(40)}
        edges = list(
            {
                (int(a), int(b))
                for a, b in gen.integers(0, 40, size=(300, 2))
                if a != b
            }
        )
        f = in_fraction(labels, edges)
        indeg = {}
        for _, v in edges:
            indeg[v] = indeg.get(v, 0) + 1
        weighted = sum(f[v] * indeg[v] for v in f) / sum(indeg.values())
        same = sum(1 for u, v in edges if labels[u] == labels[v]) / len(edges)
        assert weighted == pytest.approx(same, abs=1e-12)


class TestInFractionTest:
    def test_single_sign_gives_p_one(self):
        labels = {i: 1 for i in range(6)}
        edges = [(i, (i + 1) % 6) for i in range(6)]
        result = in_fraction_test(labels, edges, 20, derive_stream(61))
        assert np.all(result.p_values == 1.0)
        assert result.fraction_significant == 0.0

    def test_planted_homophily_is_significant(self):
        signs, edges = synthetic_opinionated_network(
            400, 3200, derive_stream(62), homophily=0.7
        )
        result = in_fraction_test(signs, edges, 100, derive_stream(62, 1))
        assert result.fraction_significant >= 0.95
        assert result.original_mean > result.replicate_means.mean()

    def test_reproducible(self):
        signs, edges = synthetic_opinionated_network(100, 700, derive_stream(63))
        a = in_fraction_test(signs, edges, 30, derive_stream(8))
        b = in_fraction_test(signs, edges, 30, derive_stream(8))
        assert np.array_equal(a.p_values, b.p_values)


def _two_cliques(k=10):
    edges = [(i, j) for i in range(k) for j in range(i + 1, k)]
    edges += [(i, j) for i in range(k, 2 * k) for j in range(i + 1, 2 * k)]
    edges.append((0, k))  # bridge
    return list(range(2 * k)), edges


def _best_two_partition_modularity(n, edges):
    """Exhaustive vectorized search over all 2-partitions."""
    masks = np.arange(1 << n, dtype=np.uint32)
    m = len(edges)
    deg = np.zeros(n, dtype=np.int64)
    for u, v in edges:
        deg[u] += 1
        deg[v] += 1
    same_side = np.zeros(masks.size, dtype=np.int64)
    for u, v in edges:
        same_side += ((masks >> u) & 1) == ((masks >> v) & 1)
    deg_s = np.zeros(masks.size, dtype=np.int64)
    for i in range(n):
        deg_s += ((masks >> i) & 1) * deg[i]
    q = same_side / m - (deg_s / (2 * m)) ** 2 - ((2 * m - deg_s) / (2 * m)) ** 2
    best = int(np.argmax(q))
    return float(q[best]), best


class TestDetectCommunities:
    def test_two_cliques_found_exactly(self):
        nodes, edges = _two_cliques(10)
        partition = detect_communities(nodes, edges, derive_stream(71))
        groups = {}
        for node, c in partition.items():
            groups.setdefault(c, set()).add(node)
        assert sorted(groups.values(), key=min) == [
            set(range(10)),
            set(range(10, 20)),
        ]
        # the clique split is also the best of all 2^20 two-partitions
        best_q, best_mask = _best_two_partition_modularity(20, edges)
        clique_mask = sum(1 << i for i in range(10))
        assert best_mask in (clique_mask, (1 << 20) - 1 - clique_mask)
        assert modularity(partition, edges) == pytest.approx(best_q, abs=1e-12)

    def test_complete_graph_single_community(self):
        nodes = list(range(8))
        edges = [(i, j) for i in range(8) for j in range(i + 1, 8)]
        partition = detect_communities(nodes, edges, derive_stream(72))
        assert set(partition.values()) == {0}

    def test_beats_all_in_one_partition(self):
        signs, edges = synthetic_opinionated_network(80, 500, derive_stream(73))
        partition = detect_communities(signs.keys(), edges, derive_stream(73, 1))
        lumped = {node: 0 for node in signs}
        assert modularity(partition, edges) >= modularity(lumped, edges)
        assert modularity(lumped, edges) <= 0.0

    def test_every_node_assigned_once_and_reproducible(self):
        signs, edges = synthetic_opinionated_network(60, 300, derive_stream(74))
        a = detect_communities(signs.keys(), edges, derive_stream(9))
        b = detect_communities(signs.keys(), edges, derive_stream(9))
        assert a == b
        assert set(a) == set(signs)

    def test_modularity_formula_matches_networkx(self):
        nx = pytest.importorskip("networkx")
        from networkx.algorithms.community import modularity as nx_modularity

        gen = derive_stream(76).generator()
        for trial in range(10):
            n = int(gen.integers(8, 40))
            edges = list(
                {
                    (int(a), int(b))
                    for a, b in gen.integers(0, n, size=(4 * n, 2))
                    if a != b
                }
            )
            graph = nx.Graph()
            graph.add_nodes_from(range(n))
            graph.add_edges_from(edges)
            if graph.number_of_edges() == 0:
                continue
            assignment = {i: int(gen.integers(0, 4)) for i in range(n)}
            groups = {}
            for node, cid in assignment.items():
                groups.setdefault(cid, set()).add(node)
            ours = modularity(assignment, edges)
            theirs = nx_modularity(graph, list(groups.values()))
            assert ours == pytest.approx(theirs, abs=1e-12)

    def test_partition_quality_close_to_networkx_louvain(self):
        nx = pytest.importorskip("networkx")
        from networkx.algorithms.community import louvain_communities
        from networkx.algorithms.community import modularity as nx_modularity

        signs, edges = synthetic_opinionated_network(150, 900, derive_stream(77))
        partition = detect_communities(signs.keys(), edges, derive_stream(77, 1))
        ours = modularity(partition, edges)

        graph = nx.Graph()
        graph.add_nodes_from(signs)
        graph.add_edges_from((a, b) for a, b in edges if a != b)
        reference = nx_modularity(graph, louvain_communities(graph, seed=1))
        assert ours >= reference - 0.05

    def test_ring_of_cliques(self):
        # six 5-cliques joined in a ring: the cliques are the communities
        k, n_cliques = 5, 6
        edges = []
        for c in range(n_cliques):
            base = c * k
            edges += [
                (base + i, base + j) for i in range(k) for j in range(i + 1, k)
            ]
            edges.append((base, ((c + 1) % n_cliques) * k + 1))
        nodes = range(n_cliques * k)
        partition = detect_communities(nodes, edges, derive_stream(75))
        groups = {}
        for node, cid in partition.items():
            groups.setdefault(cid, set()).add(node)
        expected = [set(range(c * k, (c + 1) * k)) for c in range(n_cliques)]
        assert sorted(groups.values(), key=min) == expected


class TestCommunityEnrichment:
    def test_community_matching_global_mix_is_unremarkable(self):
        signs = {i: -1 if i % 2 == 0 else 1 for i in range(200)}
        partition = {i: 0 if i < 20 else 1 for i in range(200)}
        report = community_enrichment(partition, signs, min_size_fraction=0.01)
        row = next(r for r in report.rows if r.community_id == 0)
        assert row.p_neg == pytest.approx(report.global_p_neg)
        assert row.fisher_p == pytest.approx(1.0)
        assert row.direction == "none"

    def test_all_negative_community_highly_significant(self):
        signs = {i: -1 if i < 100 else 1 for i in range(200)}
        partition = {i: 0 if i < 20 else 1 for i in range(200)}
        report = community_enrichment(partition, signs)
        row = next(r for r in report.rows if r.community_id == 0)
        assert row.p_neg == 1.0
        assert row.direction == "more-negative"
        assert row.fisher_p < 1e-6
        # hypergeometric tail oracle: point-probability two-sided sum
        rv = scipy.stats.hypergeom(200, 100, 20)
        p_obs = rv.pmf(20)
        expected = sum(rv.pmf(k) for k in range(21) if rv.pmf(k) <= p_obs * (1 + 1e-9))
        assert row.fisher_p == pytest.approx(expected, rel=1e-9)

    def test_small_community_dropped(self):
        signs = {i: -1 if i % 3 == 0 else 1 for i in range(1000)}
        partition = {i: 0 for i in range(997)} | {i: 1 for i in range(997, 1000)}
        report = community_enrichment(partition, signs, min_size_fraction=0.01)
        assert [r.community_id for r in report.rows] == [0]
        assert report.n_communities == 2

    def test_unsigned_nodes_rejected(self):
        with pytest.raises(ValueError):
            community_enrichment({0: 0, 1: 0}, {0: 1})
