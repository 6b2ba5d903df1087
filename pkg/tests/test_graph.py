import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from evonet.distributions import parse_dist
from evonet.graph import (
    GraphError,
    HalfEdgeGraph,
    StaleEdgeError,
    config_model_from_degrees,
    gen_config_model,
    gen_er,
    sample_degrees,
)


def perfect_matchings(items):
    if not items:
        yield []
        return
    a, rest = items[0], items[1:]
    for i, b in enumerate(rest):
        for m in perfect_matchings(rest[:i] + rest[i + 1:]):
            yield [(a, b)] + m


def test_two_vertex_regular_one():
    g = gen_config_model(2, parse_dist("regular:1"), 0)
    assert g.n_edges == 1
    assert sorted(g.endpoints(0)) == [0, 1]


def test_zero_vertices_rejected():
    with pytest.raises(GraphError):
        gen_config_model(0, parse_dist("poisson:2"), 0)


def test_degree_histogram_close_to_pmf():
    d = parse_dist("poisson:5")
    for seed in range(5):
        g = gen_config_model(100_000, d, seed)
        g.check_invariants()
        hist = np.bincount(g.degrees(), minlength=d.pmf.size)[: d.pmf.size] / g.n
        tv = 0.5 * np.abs(hist - d.pmf).sum()
        assert tv < 0.01


@pytest.mark.slow
def test_simple_fraction_matches_enumeration():
    # exhaustive: 12 half-edges, three per vertex
    stubs = [v for v in range(4) for _ in range(3)]
    total = simple = 0
    for m in perfect_matchings(list(range(12))):
        total += 1
        pairs = {tuple(sorted((stubs[a], stubs[b]))) for a, b in m}
        simple += len(pairs) == 6 and all(u != v for u, v in pairs)
    assert total == 10395
    p = simple / total
    d = parse_dist("regular:3")
    runs = 100_000
    hits = sum(gen_config_model(4, d, s).is_simple() for s in range(runs))
    se = np.sqrt(p * (1 - p) / runs)
    assert abs(hits / runs - p) < 3 * se


def test_odd_degree_sum_is_repaired():
    d = parse_dist("poisson:3")
    for seed in range(50):
        deg = sample_degrees(11, d, np.random.default_rng(seed))
        assert deg.sum() % 2 == 0


def test_odd_sum_impossible():
    with pytest.raises(GraphError):
        gen_config_model(3, parse_dist("regular:3"), 0)


def test_config_model_needs_even_sum():
    with pytest.raises(GraphError):
        config_model_from_degrees([1, 1, 1], np.random.default_rng(0))


def test_config_model_reproducible():
    d = parse_dist("geometric:0.4")
    a = gen_config_model(5000, d, 42)
    b = gen_config_model(5000, d, 42)
    assert np.array_equal(a.owner, b.owner)
    assert a.n_edges == b.n_edges


def test_er_trivial_cases():
    assert gen_er(50, 0.0, 1).n_edges == 0
    g = gen_er(2, 2.0, 1)
    assert g.n_edges == 1
    with pytest.raises(GraphError):
        gen_er(10, 11.0, 0)
    with pytest.raises(GraphError):
        gen_er(10, -1.0, 0)


def test_er_mean_degree():
    for seed in range(5):
        g = gen_er(100_000, 5.0, seed)
        assert g.is_simple()
        assert abs(g.degrees().mean() - 5.0) < 0.05


def test_er_small_is_simple_and_binomial():
    n, mu = 200, 4.0
    counts = [gen_er(n, mu, s).n_edges for s in range(200)]
    mean = (n * (n - 1) / 2) * mu / n
    assert abs(np.mean(counts) - mean) < 3 * np.sqrt(mean / 200)


def test_rewire_and_back():
    g = HalfEdgeGraph.from_edges(4, [(0, 1), (1, 2), (2, 3)])
    g.rewire(1, 0, 3)
    assert g.endpoints(1) == (3, 2)
    g.rewire(1, 0, 1)
    assert g.endpoints(1) == (1, 2)
    assert g.rewirings[1] == 2
    g.check_invariants()


def test_rewire_to_same_vertex_counts():
    g = HalfEdgeGraph.from_edges(3, [(0, 1)])
    before = g.owner.copy()
    g.rewire(0, 1, 1)
    assert np.array_equal(g.owner, before)
    assert g.rewirings[0] == 1


def test_stale_edge_handles():
    g = HalfEdgeGraph.from_edges(3, [(0, 1), (1, 2)])
    g.drop(0)
    with pytest.raises(StaleEdgeError):
        g.rewire(0, 0, 2)
    with pytest.raises(StaleEdgeError):
        g.endpoints(5)
    assert g.degree(0) == 0
    assert g.degrees().tolist() == [0, 1, 1]
    g.check_invariants()


def test_self_loops_and_multi_edges_kept():
    g = HalfEdgeGraph.from_edges(2, [(0, 0), (0, 1), (0, 1)])
    assert g.degree(0) == 4
    assert not g.is_simple()
    g.check_invariants()


def test_text_round_trip(tmp_path):
    g = HalfEdgeGraph.from_edges(5, [(0, 1), (1, 1), (3, 4)], unpaired_owners=[2, 2])
    path = tmp_path / "g.txt"
    g.save(path)
    h = HalfEdgeGraph.load(path)
    assert h.n == 5
    assert np.array_equal(h.owner, g.owner)
    assert h.unpaired_owners().tolist() == [2, 2]


def test_text_rejects_garbage():
    with pytest.raises(GraphError):
        HalfEdgeGraph.from_text("0 1\n")
    with pytest.raises(GraphError):
        HalfEdgeGraph.from_text("n=3\n0 1 2\n")


@given(st.integers(0, 10_000), st.lists(st.tuples(st.integers(0, 10**6), st.integers(0, 1),
                                                  st.integers(0, 10**6)), max_size=60))
def test_rewiring_sequences_preserve_invariants(seed, moves):
    g = gen_config_model(30, parse_dist("poisson:3"), seed)
    if g.n_edges == 0:
        return
    H = g.n_half_edges
    deg_sum = g.degrees().sum()
    for e, end, v in moves:
        g.rewire(e % g.n_edges, end, v % g.n)
    g.check_invariants()
    assert g.n_half_edges == H
    assert g.degrees().sum() == deg_sum
    # each half-edge keeps its identity; pairing h <-> h ^ 1 is unchanged
    assert int(g.rewirings.sum()) == len(moves)
