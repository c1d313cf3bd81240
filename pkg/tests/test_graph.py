import itertools
import os

import numpy as np
import pytest

from simrerank import (
    DistanceMatrix,
    SimParams,
    ValidationError,
    build_graph,
    oracle_shortest_path,
    sgr_distances,
)
from simrerank.graph import SimilarityGraph

from conftest import gallery_registry, query_registry, random_instance


def make_dqg(values):
    values = np.atleast_2d(np.asarray(values, dtype=float))
    return DistanceMatrix(
        query_registry(values.shape[0]), gallery_registry(values.shape[1]), values
    )


def make_dgg(values):
    values = np.asarray(values, dtype=float)
    reg = gallery_registry(values.shape[0])
    return DistanceMatrix(reg, reg, values)


class TestBuildGraph:
    def test_no_pruning_unit_scale_reproduces_gallery_edges(self, rng):
        dqg, dgg = random_instance(rng, 3, 8)
        p = SimParams(lam=1.0, big_k=1, k_q=1, k_g=1, prune_k=8)
        g = build_graph(dqg, dgg, p)
        for j in range(8):
            adj = dict(g.gallery_adjacency(j))
            assert set(adj) == set(range(8))
            for t, w in adj.items():
                assert w == dgg.values[j, t]

    def test_zero_scale_annihilates_weights(self, rng):
        dqg, dgg = random_instance(rng, 2, 5)
        p = SimParams(lam=0.0, big_k=1, k_q=1, k_g=1, prune_k=3)
        g = build_graph(dqg, dgg, p)
        assert np.all(g.nbr_weights == 0.0)

    def test_pruning_worked_example(self):
        dqg = make_dqg([[1.0, 1.0, 1.0]])
        dgg = make_dgg([[0, 1, 4], [1, 0, 2], [4, 2, 0]])
        p = SimParams(lam=0.5, big_k=1, k_q=1, k_g=1, prune_k=2)
        g = build_graph(dqg, dgg, p)
        assert g.gallery_adjacency(0) == [(0, 0.0), (1, 0.5)]
        assert g.gallery_adjacency(1) == [(1, 0.0), (0, 0.5)]
        assert g.gallery_adjacency(2) == [(2, 0.0), (1, 1.0)]

    def test_self_edge_always_first(self, rng):
        dqg, dgg = random_instance(rng, 2, 7)
        p = SimParams(lam=0.01, big_k=2, k_q=1, k_g=1, prune_k=3)
        g = build_graph(dqg, dgg, p)
        assert np.array_equal(g.nbr_indices[:, 0], np.arange(7))
        assert np.all(g.nbr_weights[:, 0] == 0.0)
        assert g.nbr_indices.shape == (7, 3)

    def test_self_survives_duplicate_zero_ties(self):
        # three identical points: every pairwise distance is zero
        dqg = make_dqg([[1.0, 1.0, 1.0]])
        dgg = make_dgg(np.zeros((3, 3)))
        p = SimParams(lam=1.0, big_k=1, k_q=1, k_g=1, prune_k=1)
        g = build_graph(dqg, dgg, p)
        assert np.array_equal(g.nbr_indices[:, 0], np.arange(3))

    def test_registry_mismatch(self, rng):
        dqg, _ = random_instance(rng, 2, 5)
        _, other = random_instance(rng, 2, 4)
        with pytest.raises(ValidationError, match="registry"):
            build_graph(dqg, other, SimParams(big_k=1, k_q=1, k_g=1, prune_k=1))


class TestSgrDistances:
    def test_direct_path_only_reduces_to_raw(self, rng):
        dqg, dgg = random_instance(rng, 4, 6)
        p = SimParams(big_k=1, k_q=1, k_g=1, prune_k=1)
        g = build_graph(dqg, dgg, p)
        assert np.array_equal(sgr_distances(g, p).values, dqg.values)

    def test_two_path_worked_example(self):
        dqg = make_dqg([[5.0, 2.0]])
        dgg = make_dgg([[0.0, 1.0], [1.0, 0.0]])
        p = SimParams(lam=0.5, big_k=2, k_q=1, k_g=1, prune_k=2)
        d_s = sgr_distances(build_graph(dqg, dgg, p), p)
        # target 0: direct 5 and 2 + 0.5 via the other node; target 1: 2 and 5.5
        assert d_s.values[0, 0] == pytest.approx(3.75)
        assert d_s.values[0, 1] == pytest.approx(3.75)

    def test_reference_defaults_run(self, rng):
        dqg, dgg = random_instance(rng, 5, 30)
        p = SimParams(lam=0.01, big_k=9, alpha=0.3, k_q=10, k_g=10, prune_k=9)
        d_s = sgr_distances(build_graph(dqg, dgg, p), p)
        assert d_s.values.shape == (5, 30)
        assert np.all(np.isfinite(d_s.values)) and np.all(d_s.values >= 0)

    def test_cheapest_candidate_dominates_raw(self, rng):
        # the self edge keeps the direct distance among the candidates
        dqg, dgg = random_instance(rng, 4, 12)
        p = SimParams(lam=0.3, big_k=1, k_q=1, k_g=1, prune_k=5)
        g = build_graph(dqg, dgg, p)
        assert np.all(sgr_distances(g, p).values <= dqg.values)

    def test_monotone_in_big_k(self, rng):
        dqg, dgg = random_instance(rng, 4, 12)
        build_p = SimParams(lam=0.3, big_k=1, k_q=1, k_g=1, prune_k=6)
        g = build_graph(dqg, dgg, build_p)
        previous = None
        for k in range(1, 7):
            p = SimParams(lam=0.3, big_k=k, k_q=1, k_g=1, prune_k=6)
            current = sgr_distances(g, p).values
            if previous is not None:
                assert np.all(current >= previous - 1e-12)
            previous = current

    def test_scale_equivariance(self, rng):
        dqg, dgg = random_instance(rng, 3, 10)
        p = SimParams(lam=0.2, big_k=3, k_q=1, k_g=1, prune_k=4)
        base = sgr_distances(build_graph(dqg, dgg, p), p).values
        c = 4.0  # power of two keeps the scaling exact in floating point
        scaled_dqg = make_dqg(c * dqg.values)
        scaled_dgg = make_dgg(c * dgg.values)
        scaled = sgr_distances(build_graph(scaled_dqg, scaled_dgg, p), p).values
        assert np.array_equal(scaled, c * base)
        assert np.array_equal(np.argsort(scaled, axis=1), np.argsort(base, axis=1))

    def test_deterministic_across_worker_counts(self, rng, monkeypatch):
        dqg, dgg = random_instance(rng, 16, 40)
        p = SimParams(lam=0.05, big_k=4, k_q=1, k_g=1, prune_k=6)
        g = build_graph(dqg, dgg, p)
        results = []
        for threads in ("1", "3", "8"):
            monkeypatch.setenv("SIM_THREADS", threads)
            results.append(sgr_distances(g, p).values)
        assert np.array_equal(results[0], results[1])
        assert np.array_equal(results[0], results[2])

    def test_too_few_candidates_reported(self, rng):
        dqg, dgg = random_instance(rng, 2, 3)
        p = SimParams(big_k=1, k_q=1, k_g=1, prune_k=2)
        g = build_graph(dqg, dgg, p)
        oversized = SimParams(big_k=3, k_q=1, k_g=1, prune_k=3)
        with pytest.raises(ValidationError, match="path candidates"):
            sgr_distances(g, oversized)


def exhaustive_shortest(dqg_values, dgg_values, lam):
    """Enumerate every simple path through gallery intermediates."""
    n_q, n_g = dqg_values.shape
    gg = lam * dgg_values
    out = np.full((n_q, n_g), np.inf)
    for i in range(n_q):
        for j in range(n_g):
            best = dqg_values[i, j]
            others = [t for t in range(n_g) if t != j]
            for r in range(1, n_g):
                for mids in itertools.permutations(others, r):
                    cost = dqg_values[i, mids[0]]
                    for a, b in zip(mids, mids[1:]):
                        cost += gg[a, b]
                    cost += gg[mids[-1], j]
                    best = min(best, cost)
            out[i, j] = best
    return out


class TestOracle:
    def test_single_gallery_node(self):
        dqg = make_dqg([[3.0], [7.0]])
        dgg = make_dgg([[0.0]])
        assert np.array_equal(oracle_shortest_path(dqg, dgg, 0.5), dqg.values)

    def test_two_gallery_worked_example(self):
        dqg = make_dqg([[5.0, 2.0]])
        dgg = make_dgg([[0.0, 1.0], [1.0, 0.0]])
        got = oracle_shortest_path(dqg, dgg, 0.5)
        assert got[0, 0] == 2.5  # hop through the cheaper entry point
        assert got[0, 1] == 2.0

    def test_matches_exhaustive_enumeration_nonmetric(self, rng):
        # triangle violations force genuinely multi-hop optima
        for _ in range(5):
            n_q, n_g = 2, 5
            dqg = make_dqg(rng.uniform(0.5, 4.0, size=(n_q, n_g)))
            raw = rng.uniform(0.0, 4.0, size=(n_g, n_g))
            sym = (raw + raw.T) / 2.0
            np.fill_diagonal(sym, 0.0)
            dgg = make_dgg(sym)
            got = oracle_shortest_path(dqg, dgg, 1.0)
            want = exhaustive_shortest(dqg.values, dgg.values, 1.0)
            assert np.allclose(got, want, atol=1e-12)

    def test_zero_scale_collapses_to_row_minimum(self, rng):
        dqg, dgg = random_instance(rng, 3, 6)
        got = oracle_shortest_path(dqg, dgg, 0.0)
        want = np.tile(dqg.values.min(axis=1, keepdims=True), (1, 6))
        assert np.allclose(got, want, atol=1e-12)

    def test_simplification_on_metric_instances(self, rng):
        # multi-hop never beats the best one-stop path when edges are metric
        for _ in range(10):
            n_q = int(rng.integers(1, 6))
            n_g = int(rng.integers(2, 15))
            dqg, dgg = random_instance(rng, n_q, n_g)
            lam = float(rng.uniform(0.0, 1.0))
            oracle = oracle_shortest_path(dqg, dgg, lam)
            one_stop = (dqg.values[:, :, None] + lam * dgg.values[None, :, :]).min(axis=1)
            assert np.max(np.abs(oracle - one_stop)) < 1e-6
