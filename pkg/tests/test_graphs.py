"""Tests for the graph representation and the three samplers."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import geodetect.graphs as graphs_mod
from geodetect.graphs import (
    Graph,
    ModelParams,
    Seed,
    pair_index,
    sample_full_geometric,
    sample_null,
    sample_planted,
    sample_planted_fixed_community,
    sample_planted_fixed_size,
)
from geodetect.sphere import solve_threshold
from geodetect.stats import signed_triangle_count


class TestModelParams:
    def test_k_bounds(self):
        with pytest.raises(ValueError):
            ModelParams(n=10, p=0.5, d=4, k=11)
        with pytest.raises(ValueError):
            ModelParams(n=10, p=0.5, d=4, k=0)

    def test_derived_sizes(self):
        params = ModelParams(n=100, p=0.5, d=4, k=50)
        assert params.k_minus == 45
        assert params.k_plus == 55
        odd = ModelParams(n=100, p=0.5, d=4, k=33)
        assert odd.k_minus == math.floor(0.9 * 33)
        assert odd.k_plus == math.ceil(1.1 * 33)


class TestGraph:
    def test_pair_index_bijection(self):
        for n in (2, 3, 7, 12):
            seen = [pair_index(i, j, n) for i in range(n) for j in range(i + 1, n)]
            assert seen == list(range(n * (n - 1) // 2))

    def test_pair_index_matches_triu_order(self):
        n = 9
        iu, ju = np.triu_indices(n, k=1)
        for idx, (i, j) in enumerate(zip(iu, ju)):
            assert pair_index(int(i), int(j), n) == idx

    def test_immutable(self):
        g = Graph(4, np.zeros(6, dtype=bool))
        with pytest.raises(AttributeError):
            g.n = 5
        with pytest.raises(ValueError):
            g.edges[0] = True

    def test_adjacency_matrix(self):
        edges = np.zeros(6, dtype=bool)
        edges[pair_index(1, 3, 4)] = True
        g = Graph(4, edges)
        a = g.adjacency_matrix()
        assert a[1, 3] == 1 and a[3, 1] == 1
        assert np.all(np.diag(a) == 0)
        assert np.array_equal(a, a.T)
        assert g.has_edge(3, 1) and not g.has_edge(0, 1)

    @given(st.integers(2, 12), st.integers(0, 2**32 - 1))
    @settings(max_examples=40, deadline=None)
    def test_serialization_round_trips(self, n, seed):
        g = sample_null(n, 0.4, np.random.default_rng(seed))
        assert Graph.from_edgelist_text(g.to_edgelist_text()) == g
        assert Graph.from_bitfield_bytes(g.to_bitfield_bytes()) == g

    def test_edgelist_format(self):
        edges = np.zeros(3, dtype=bool)
        edges[pair_index(0, 2, 3)] = True
        g = Graph(3, edges)
        assert g.to_edgelist_text() == "3\n1\n0 2\n"

    def test_bitfield_header(self):
        g = Graph(5, np.ones(10, dtype=bool))
        blob = g.to_bitfield_bytes()
        assert blob[:8] == (5).to_bytes(8, "little")
        assert len(blob) == 8 + 2  # ceil(10 / 8)


class TestSeed:
    def test_streams_reproducible(self):
        a = Seed(42).stream(7).random(5)
        b = Seed(42).stream(7).random(5)
        assert np.array_equal(a, b)

    def test_streams_distinct(self):
        a = Seed(42).stream(7).random(5)
        b = Seed(42).stream(8).random(5)
        c = Seed(43).stream(7).random(5)
        assert not np.array_equal(a, b)
        assert not np.array_equal(a, c)


class TestSampleNull:
    def test_degenerate(self):
        rng = np.random.default_rng(0)
        assert sample_null(5, 0.0, rng).edge_count == 0
        assert sample_null(5, 1.0, rng).edge_count == 10

    def test_edge_frequency(self):
        rng = np.random.default_rng(11)
        trials, n, p = 10_000, 100, 0.3
        m = n * (n - 1) // 2
        count = sum(sample_null(n, p, rng).edge_count for _ in range(trials))
        total = trials * m
        se = math.sqrt(p * (1 - p) / total)
        assert abs(count / total - p) <= 3 * se


class TestFullGeometric:
    def test_edge_rule_matches_latents(self):
        rng = np.random.default_rng(3)
        g, latents = sample_full_geometric(12, 0.2, 8, rng)
        tau = solve_threshold(0.2, 8).tau
        gram = latents @ latents.T
        for i in range(12):
            for j in range(i + 1, 12):
                assert g.has_edge(i, j) == (gram[i, j] >= tau)

    def test_edge_marginal(self):
        seed = Seed(4)
        trials, n, p, d = 30_000, 10, 0.2, 8
        count = sum(
            sample_full_geometric(n, p, d, seed.stream(t))[0].edge_count
            for t in range(trials)
        )
        total = trials * 45
        se = math.sqrt(p * (1 - p) / total)
        assert abs(count / total - p) <= 3 * se

    def test_pairwise_independence(self):
        # edges sharing a vertex are pairwise independent
        seed = Seed(5)
        trials, p = 40_000, 0.3
        both = 0
        for t in range(trials):
            g, _ = sample_full_geometric(3, p, 6, seed.stream(t))
            both += g.has_edge(0, 1) and g.has_edge(0, 2)
        se = math.sqrt(p**2 * (1 - p**2) / trials)
        assert abs(both / trials - p**2) <= 3 * se

    def test_high_dimension_kills_triangle_signal(self):
        from geodetect.sphere import signed_cycle_expectation

        # d = 1e6 forces the Gram route; the signed-triangle mean is consistent
        # with the vanishing series prediction, itself far below the per-draw
        # noise (signal ~ 1/sqrt(d))
        seed = Seed(6)
        trials, n, p, d = 10_000, 50, 0.3, 10**6
        assert n * d > graphs_mod.LATENT_ELEMENT_LIMIT
        vals = np.empty(trials)
        for t in range(trials):
            g, latents = sample_full_geometric(n, p, d, seed.stream(t))
            assert latents is None
            vals[t] = signed_triangle_count(g, p)
        se = vals.std() / math.sqrt(trials)
        predicted = math.comb(n, 3) * signed_cycle_expectation(3, p, d).value
        assert abs(vals.mean() - predicted) <= 3 * se
        assert predicted <= 0.1 * vals.std()  # drowned by per-draw noise

    def test_gram_route_matches_direct_route(self, monkeypatch):
        # force the Bartlett path (needs d >= n) and compare edge marginals
        trials, n, p, d = 30_000, 6, 0.2, 8
        monkeypatch.setattr(graphs_mod, "LATENT_ELEMENT_LIMIT", 0)
        seed = Seed(4)
        count = 0
        for t in range(trials):
            g, latents = sample_full_geometric(n, p, d, seed.stream(t))
            assert latents is None
            count += g.edge_count
        total = trials * 15
        se = math.sqrt(p * (1 - p) / total)
        assert abs(count / total - p) <= 3 * se


class TestSamplePlanted:
    def test_membership_binomial(self):
        params = ModelParams(n=200, p=0.5, d=4, k=100)
        seed = Seed(7)
        sizes = np.array(
            [sample_planted(params, seed.stream(t)).members.size for t in range(10_000)]
        )
        assert sizes.mean() == pytest.approx(100, rel=0.05)
        assert sizes.var() == pytest.approx(50, rel=0.05)

    def test_latents_cover_community_exactly(self):
        params = ModelParams(n=40, p=0.4, d=6, k=20)
        s = sample_planted(params, Seed(8).stream(0))
        assert s.latents.shape == (s.members.size, 6)
        norms = np.linalg.norm(s.latents, axis=1)
        assert np.max(np.abs(norms - 1)) <= 1e-12
        with pytest.raises(KeyError):
            outsider = next(v for v in range(40) if not s.community[v])
            s.latent_of(outsider)

    def test_community_edges_follow_geometry(self):
        params = ModelParams(n=30, p=0.3, d=5, k=20)
        tau = solve_threshold(0.3, 5).tau
        s = sample_planted(params, Seed(9).stream(1))
        members = s.members
        for a in range(members.size):
            for b in range(a + 1, members.size):
                i, j = int(members[a]), int(members[b])
                expected = float(s.latents[a] @ s.latents[b]) >= tau
                assert s.graph.has_edge(i, j) == expected

    def test_marginal_indistinguishable(self):
        # every single edge has marginal p under the planted model
        params = ModelParams(n=6, p=0.35, d=4, k=3)
        seed = Seed(10)
        trials = 100_000
        counts = np.zeros(15)
        for t in range(trials):
            counts += sample_planted(params, seed.stream(t)).graph.edges
        se = math.sqrt(0.35 * 0.65 / trials)
        assert np.all(np.abs(counts / trials - 0.35) <= 3 * se)

    def test_degree_symmetry_between_members_and_outsiders(self):
        from scipy.stats import ks_2samp

        params = ModelParams(n=50, p=0.3, d=6, k=25)
        seed = Seed(11)
        inside, outside = [], []
        degrees_of = lambda g: g.adjacency_matrix().sum(axis=0)  # noqa: E731
        for t in range(10_000):
            s = sample_planted(params, seed.stream(t))
            if 0 < s.members.size < 50:
                deg = degrees_of(s.graph)
                inside.append(deg[s.members[0]])
                outside.append(deg[next(v for v in range(50) if not s.community[v])])
        stat = ks_2samp(inside, outside).statistic
        assert stat <= 0.02

    def test_reproducible(self):
        params = ModelParams(n=25, p=0.4, d=5, k=10)
        a = sample_planted(params, Seed(12).stream(3))
        b = sample_planted(params, Seed(12).stream(3))
        assert a.graph == b.graph
        assert np.array_equal(a.community, b.community)


class TestFixedCommunity:
    def test_empty_community_is_null(self):
        params = ModelParams(n=30, p=0.4, d=4, k=10)
        seed = Seed(13)
        trials = 20_000
        counts = np.array(
            [
                sample_planted_fixed_community([], params, seed.stream(t)).graph.edge_count
                for t in range(trials)
            ]
        )
        m = 435
        assert counts.mean() / m == pytest.approx(0.4, abs=3 * math.sqrt(0.24 / (trials * m)))
        assert counts.var() == pytest.approx(m * 0.24, rel=0.05)

    def test_full_community_matches_geometric(self):
        # k = n: same distribution as the full geometric model (f_tri mean)
        params = ModelParams(n=20, p=0.5, d=4, k=20)
        seed = Seed(14)
        trials = 20_000
        t1 = np.empty(trials)
        t2 = np.empty(trials)
        for t in range(trials):
            s = sample_planted_fixed_community(range(20), params, seed.stream(t, arm=0))
            t1[t] = signed_triangle_count(s.graph, 0.5)
            g, _ = sample_full_geometric(20, 0.5, 4, seed.stream(t, arm=1))
            t2[t] = signed_triangle_count(g, 0.5)
        se = math.hypot(t1.std(), t2.std()) / math.sqrt(trials)
        assert abs(t1.mean() - t2.mean()) <= 3 * se

    def test_mixture_identity(self):
        # averaging over uniform fixed communities of size s equals the
        # fixed-size sampler at s (f_tri means agree)
        params = ModelParams(n=16, p=0.5, d=4, k=8)
        seed = Seed(15)
        trials, s = 20_000, 8
        a = np.empty(trials)
        b = np.empty(trials)
        for t in range(trials):
            rng = seed.stream(t, arm=0)
            members = rng.permutation(16)[:s]
            samp = sample_planted_fixed_community(members, params, rng)
            a[t] = signed_triangle_count(samp.graph, 0.5)
            samp2 = sample_planted_fixed_size(s, params, seed.stream(t, arm=1))
            b[t] = signed_triangle_count(samp2.graph, 0.5)
        se = math.hypot(a.std(), b.std()) / math.sqrt(trials)
        assert abs(a.mean() - b.mean()) <= 3 * se

    def test_rejects_out_of_range(self):
        params = ModelParams(n=10, p=0.5, d=4, k=5)
        with pytest.raises(ValueError):
            sample_planted_fixed_community([3, 11], params, Seed(0).stream(0))


class TestFixedSize:
    def test_exact_size(self):
        params = ModelParams(n=30, p=0.4, d=4, k=10)
        for t in range(50):
            s = sample_planted_fixed_size(9, params, Seed(16).stream(t))
            assert s.members.size == 9

    def test_degenerate_sizes(self):
        params = ModelParams(n=12, p=0.3, d=4, k=6)
        empty = sample_planted_fixed_size(0, params, Seed(17).stream(0))
        assert empty.members.size == 0
        full = sample_planted_fixed_size(12, params, Seed(17).stream(1))
        assert full.members.size == 12
        with pytest.raises(ValueError):
            sample_planted_fixed_size(13, params, Seed(17).stream(2))
