"""Generators: certified pair partitions, blowups, lower-bound instances,
merges, transversals, completions, and the growth hierarchy."""

from fractions import Fraction
from itertools import combinations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hyperreg import (Bigraph, BipartiteColoredGraph, DomainError,
                      GenerationError, Saturated, SizeError, ThreeGraph,
                      ack, blowup, canonical, find_transversal,
                      g_dimension_check, lower_bound_instance,
                      merge_colors_demo, quasirandom_pair_partition,
                      random_decomposition, tower, tripartite_completion,
                      wowzer)


def hand_blowup():
    base = canonical("M", 2)
    gamma = BipartiteColoredGraph(np.array([[0, 1], [1, 0]]), n_colors=2)
    return base, gamma, blowup(base, gamma, n_per_class=1)


# --- certified pair partitions -------------------------------------------------

def test_pair_partition_is_balanced_and_certified():
    gamma, report = quasirandom_pair_partition(12, 15, 4, target_dev=0.05, seed=3)
    sizes = gamma.class_sizes()
    assert sum(sizes) == 12 * 15
    assert max(sizes) - min(sizes) <= 1
    assert report.passed
    assert report.attempts >= 1
    assert len(report.classes) == 4
    for cert in report.classes:
        assert cert.dev_ok and cert.density_ok
        assert cert.normalized_sum <= 0.05
        assert abs(cert.density - 0.25) <= 0.05 ** 0.25


def test_pair_partition_deterministic():
    g1, r1 = quasirandom_pair_partition(10, 10, 2, 0.05, seed=11)
    g2, r2 = quasirandom_pair_partition(10, 10, 2, 0.05, seed=11)
    assert g1 == g2
    assert r1.seed == r2.seed and r1.attempts == r2.attempts
    g3, _ = quasirandom_pair_partition(10, 10, 2, 0.05, seed=12)
    assert g1 != g3


def test_pair_partition_failure_carries_best_report():
    with pytest.raises(GenerationError) as exc:
        quasirandom_pair_partition(8, 8, 2, target_dev=1e-6, seed=0, max_retries=2)
    assert exc.value.best_report is not None
    assert not exc.value.best_report.passed


def test_pair_partition_guards():
    with pytest.raises(DomainError):
        quasirandom_pair_partition(4, 4, 0, 0.1, seed=0)
    with pytest.raises(DomainError):
        quasirandom_pair_partition(2, 8, 3, 0.1, seed=0)


# --- blowups ---------------------------------------------------------------------

def test_blowup_edge_rule_by_hand():
    base, gamma, inst = hand_blowup()
    assert inst.graph.n == 6
    assert inst.graph.edges == {(0, 2, 4), (0, 3, 5), (1, 2, 5), (1, 3, 4)}
    assert inst.class_vertices(0) == (4,)
    assert inst.class_vertices(1) == (5,)
    nat = inst.natural
    assert nat.t == 4 and nat.ell == 2
    assert nat.blocks == ((0, 1), (2, 3), (4,), (5,))
    assert np.array_equal(nat.pair_colors(0, 1), gamma.assignment)
    assert np.array_equal(nat.pair_colors(1, 0), gamma.assignment.T)
    assert not nat.pair_colors(0, 2).any()


def test_blowup_empty_fill_has_only_crossing_edges():
    inst = lower_bound_instance("M", 2, 4, seed=2, target_dev=0.2)
    a, b = inst.a_size, inst.b_size
    for x, y, z in inst.graph.edges:
        assert x < a and a <= y < a + b and z >= a + b


def test_blowup_random_fill_preserves_crossing_triples():
    base, gamma, plain = hand_blowup()
    filled = blowup(base, gamma, 1, fill=("random", 1.0, 99))
    crossing = {e for e in filled.graph.edges
                if e[0] < 2 and 2 <= e[1] < 4 and e[2] >= 4}
    assert crossing == plain.graph.edges
    assert len(filled.graph.edges) == 12 + 4      # all 12 non-crossing triples added
    check = g_dimension_check(filled.graph, base, 1, gamma,
                              embedding=filled.identity_embedding())
    assert check.ok


def test_blowup_guards():
    base = canonical("M", 2)
    gamma = BipartiteColoredGraph(np.array([[0, 1], [1, 0]]), n_colors=2)
    with pytest.raises(DomainError):
        blowup(canonical("M", 3), gamma, 1)
    with pytest.raises(DomainError):
        blowup(base, BipartiteColoredGraph(np.array([[0, 1]]), n_colors=2), 1)
    with pytest.raises(DomainError):
        blowup(base, gamma, 0)
    with pytest.raises(DomainError):
        blowup(base, gamma, 1, fill="everything")
    with pytest.raises(DomainError):
        blowup(base, gamma, 1, fill=("random", 1.5, 0))


@pytest.mark.parametrize("kind,size", [("M", 2), ("H", 2), ("Mbar", 3), ("Ubg", 2)])
def test_lower_bound_instance_shape_and_verification(kind, size):
    n = 8
    inst = lower_bound_instance(kind, size, n, seed=5, target_dev=0.2)
    assert inst.base == canonical(kind, size)
    assert inst.n_per_class == n
    assert inst.gamma.n_colors == inst.base.u_size
    assert inst.graph.n == 2 * n + inst.base.v_size * n
    assert inst.certification is not None and inst.certification.passed
    meta = dict(inst.metadata)
    assert meta["kind"] == kind and meta["prng"] == "pcg64"
    check = g_dimension_check(inst.graph, inst.base, n, inst.gamma,
                              embedding=inst.identity_embedding())
    assert check.ok


def test_blowup_rejects_any_single_flip():
    n = 4
    inst = lower_bound_instance("M", 2, n, seed=2, target_dev=0.2)
    emb = inst.identity_embedding()
    a, b = inst.a_size, inst.b_size
    rng = np.random.default_rng(0)
    for _ in range(10):
        x = int(rng.integers(0, a))
        y = int(rng.integers(a, a + b))
        z = int(rng.integers(a + b, inst.graph.n))
        edges = set(inst.graph.edges)
        edges.symmetric_difference_update({(x, y, z)})
        bad = g_dimension_check(ThreeGraph(inst.graph.n, edges), inst.base, n,
                                inst.gamma, embedding=emb)
        assert not bad.ok
        assert tuple(sorted(bad.violation[0])) == (x, y, z)


def test_lower_bound_instance_unknown_kind():
    with pytest.raises(DomainError):
        lower_bound_instance("X", 2, 8, seed=1)


# --- merge demonstration -----------------------------------------------------------

def test_merge_colors_demo_exact_half_density():
    inst = lower_bound_instance("M", 2, 16, seed=1, target_dev=0.05)
    rep = merge_colors_demo(inst, 0, 1)
    assert rep.v == 0
    assert rep.merged_size == 2 * 16 * 16 // 2
    assert rep.matched_size == 16 * 16 // 2
    assert rep.k3 == rep.merged_size * 16
    assert rep.density == Fraction(1, 2)
    assert not rep.homogeneous(0.1)


def test_merge_colors_demo_guards():
    inst = lower_bound_instance("M", 2, 8, seed=3, target_dev=0.2)
    with pytest.raises(DomainError):
        merge_colors_demo(inst, 1, 1)
    with pytest.raises(DomainError):
        merge_colors_demo(inst, 0, 5)
    inst_h = lower_bound_instance("H", 2, 8, seed=3, target_dev=0.2)
    with pytest.raises(DomainError):
        merge_colors_demo(inst_h, 0, 1, v=1)    # both rows of H(2) hit column 1
    assert merge_colors_demo(inst_h, 0, 1).v == 0


# --- transversals and completions ----------------------------------------------------

def test_find_transversal_planted():
    classes = [[0, 1], [2, 3], [4, 5]]
    graphs = {(i, j): Bigraph.complete(2, 2) for i, j in [(0, 1), (0, 2), (1, 2)]}
    F = ThreeGraph.complete(3)
    H = ThreeGraph(6, [(0, 2, 4)])
    assert find_transversal(classes, graphs, H, F) == (0, 2, 4)
    # empty pattern: requires a non-edge on every transversal triple
    assert find_transversal(classes, graphs, H, ThreeGraph.empty(3)) != (0, 2, 4)
    assert find_transversal([[0], [2], [4]], {k: Bigraph.complete(1, 1) for k in graphs},
                            H, ThreeGraph.empty(3)) is None


def test_find_transversal_respects_pair_bigraphs():
    classes = [[0, 1], [2, 3], [4, 5]]
    graphs = {(i, j): Bigraph.complete(2, 2) for i, j in [(0, 1), (0, 2), (1, 2)]}
    graphs[(0, 1)] = Bigraph.from_edges(2, 2, [(1, 1)])
    F = ThreeGraph.complete(3)
    assert find_transversal(classes, graphs, ThreeGraph(6, [(0, 2, 4)]), F) is None
    assert find_transversal(classes, graphs, ThreeGraph(6, [(1, 3, 5)]), F) == (1, 3, 5)


def test_find_transversal_guards():
    ok = {(0, 1): Bigraph.complete(1, 1)}
    with pytest.raises(SizeError):
        find_transversal([[0]] * 7, {}, ThreeGraph.empty(7), ThreeGraph.empty(7))
    with pytest.raises(SizeError):
        find_transversal([list(range(21)), [0]], ok, ThreeGraph.empty(21),
                         ThreeGraph.empty(2))
    with pytest.raises(DomainError):
        find_transversal([[0], [1]], ok, ThreeGraph.empty(2), ThreeGraph.empty(3))
    with pytest.raises(DomainError):
        find_transversal([[0], [1], [2]], ok, ThreeGraph.empty(3), ThreeGraph.empty(3))
    with pytest.raises(DomainError):
        find_transversal([[0], [1]], {(0, 1): Bigraph.complete(2, 1)},
                         ThreeGraph.empty(2), ThreeGraph.empty(2))


def test_tripartite_completion():
    H = tripartite_completion(2, 2, 2, [(0, 2, 4)])
    assert H.n == 6 and H.edges == {(0, 2, 4)}
    full = tripartite_completion(2, 2, 2, [(0, 2, 4)], fill=("random", 1.0, 7))
    assert len(full.edges) == 13                  # 12 non-crossing + the given one
    assert (0, 2, 4) in full.edges
    with pytest.raises(DomainError):
        tripartite_completion(2, 2, 2, [(0, 1, 2)])   # two vertices on side A
    with pytest.raises(DomainError):
        tripartite_completion(2, 2, 2, [(0, 2, 9)])
    with pytest.raises(DomainError):
        tripartite_completion(2, 2, 2, [(0, 2, 2)])


def test_random_decomposition_shape():
    P = random_decomposition(17, 4, 3, seed=0)
    assert sum(P.block_sizes()) == 17
    assert max(P.block_sizes()) - min(P.block_sizes()) <= 1
    assert P == random_decomposition(17, 4, 3, seed=0)
    with pytest.raises(DomainError):
        random_decomposition(5, 6, 2, seed=0)
    with pytest.raises(DomainError):
        random_decomposition(5, 2, 0, seed=0)


# --- growth hierarchy ------------------------------------------------------------------

def test_tower_values():
    assert [tower(x) for x in range(1, 6)] == [1, 2, 4, 16, 65536]
    assert tower(6) == 2**65536


def test_tower_saturation():
    sat = tower(7)
    assert isinstance(sat, Saturated)
    assert (sat.k, sat.x, sat.depth) == (2, 7, 1)
    tight = tower(5, bit_limit=10)
    assert isinstance(tight, Saturated)
    assert (tight.k, tight.x, tight.depth) == (2, 5, 1)
    assert "x=7" in repr(tower(7))
    assert "x=16" in repr(ack(1, 16, bit_limit=10))
    assert "<large>" in repr(ack(1, 2**100, bit_limit=10))


def test_ack_level_one_doubles_exponentially():
    for x in range(1, 10):
        assert ack(1, x) == 2**x


@settings(max_examples=20, deadline=None)
@given(st.integers(2, 6))
def test_ack_recurrence(x):
    assert ack(2, x) == ack(1, ack(2, x - 1))


def test_high_levels_and_wowzer_degenerate_to_one():
    for x in range(1, 6):
        assert ack(3, x) == 1
        assert wowzer(x) == 1
        assert wowzer(x, convention="ack3") == 1


def test_ack_guards():
    with pytest.raises(DomainError):
        ack(0, 3)
    with pytest.raises(DomainError):
        ack(1, 0)
    with pytest.raises(DomainError):
        ack(1, True)
    with pytest.raises(DomainError):
        wowzer(2, convention="huge")
