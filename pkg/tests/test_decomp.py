"""Decomposition audits: triangle partition invariants, coverage measures,
reference modes, homogeneity, slicing."""

from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hyperreg import (Decomposition, DomainError, ThreeGraph, TriadRef, audit,
                      dev2, homogeneity_audit, lower_bound_instance,
                      materialize, nontrivial_coverage, present_triads,
                      random_decomposition, slice_decomposition, triads_of)


def mod4_decomposition(ell: int) -> Decomposition:
    """Single block on 8 vertices; color 0 where (x+y) % 4 == 0 (density 1/4),
    color 1 elsewhere (density 3/4); both classes have normalized pair
    deviation exactly 3/256."""
    M = np.fromfunction(lambda x, y: ((x + y) % 4 != 0).astype(int), (8, 8))
    return Decomposition.symmetric(8, [list(range(8))], ell, {(0, 0): M.astype(int)})


def test_triads_of_enumeration():
    P = random_decomposition(10, 2, 3, seed=1)
    refs = list(triads_of(P))
    assert len(refs) == P.t**3 * P.ell**3
    assert refs == sorted(refs)
    present = list(present_triads(P))
    assert set(present) <= set(refs)
    for ref in present:
        assert P.class_size(ref.i, ref.j, ref.a) > 0
        assert P.class_size(ref.i, ref.k, ref.b) > 0
        assert P.class_size(ref.j, ref.k, ref.c) > 0


def test_materialize_matches_class_bigraphs():
    P = random_decomposition(12, 3, 2, seed=2)
    for ref in list(present_triads(P))[:10]:
        G = materialize(P, ref)
        bi, bj, bk = (len(P.blocks[x]) for x in (ref.i, ref.j, ref.k))
        assert G.shape == (bi, bj, bk)
        assert np.array_equal(G.exy.adj, P.class_matrix(ref.i, ref.j, ref.a))
        assert np.array_equal(G.eyz.adj, P.class_matrix(ref.j, ref.k, ref.c))


def test_triad_ref_key_and_canonical():
    ref = TriadRef(2, 0, 1, 3, 4, 5)
    assert ref.key() == "2,0,1:3,4,5"
    # swapping the first two roles keeps the (i,j) color and swaps the others
    swapped = TriadRef(0, 2, 1, 3, 5, 4)
    assert ref.canonical() == swapped.canonical()
    assert ref.canonical().canonical() == ref.canonical()


@settings(max_examples=50, deadline=None)
@given(st.tuples(*[st.integers(0, 3)] * 6))
def test_canonical_is_invariant_over_all_role_permutations(parts):
    i, j, k, a, b, c = parts
    ref = TriadRef(i, j, k, a, b, c)
    # all six role permutations of (X, Y, Z) name the same triad
    variants = [
        TriadRef(i, j, k, a, b, c),
        TriadRef(j, i, k, a, c, b),
        TriadRef(i, k, j, b, a, c),
        TriadRef(k, j, i, c, b, a),
        TriadRef(j, k, i, c, a, b),
        TriadRef(k, i, j, b, c, a),
    ]
    canon = {v.canonical() for v in variants}
    assert len(canon) == 1
    assert ref.canonical() in variants


def test_canonical_triads_have_equal_triangle_counts():
    P = random_decomposition(12, 2, 2, seed=3)
    for ref in list(present_triads(P))[:20]:
        perm = TriadRef(ref.j, ref.i, ref.k, ref.a, ref.c, ref.b)
        assert materialize(P, ref).triangle_count() == materialize(P, perm).triangle_count()


def test_audit_rows_partition_all_ordered_triples():
    rng = np.random.default_rng(4)
    for t, ell in [(1, 2), (2, 2), (3, 1)]:
        n = 12
        P = random_decomposition(n, t, ell, seed=int(rng.integers(1 << 20)))
        H = ThreeGraph.random(n, 0.4, rng)
        aud = audit(H, P, 1.0, 1.0)
        assert sum(r.k3 for r in aud.rows) == n**3
        # every relation triple lands in exactly one triad as well
        dens_weighted = sum(r.k3 * r.density for r in aud.rows)
        assert dens_weighted == len(H.edges) * 6 + 0  # ordered relation triples
        cov, hrows = homogeneity_audit(H, P, 0.1)
        assert sum(r.k3 for r in hrows) == n**3


def test_audit_reference_modes_distinguish():
    P2 = mod4_decomposition(2)
    for a in (0, 1):
        assert dev2(P2.class_bigraph(0, 0, a), exact=True).normalized_sum == Fraction(3, 256)
    rng = np.random.default_rng(5)
    H = ThreeGraph.random(8, 0.5, rng)
    # measured-density reference: both classes pass at eps2 = 0.02
    assert audit(H, P2, 1.0, 0.02, reference="self").pair_coverage == 1
    # uniform reference 1/2: both class densities are 1/4 off
    assert audit(H, P2, 1.0, 0.02, reference="uniform").pair_coverage == 0
    # with ell = 4 declared but two colors present, uniform (1/4) passes only
    # the sparse class while per-pair (1/2) passes neither
    P4 = mod4_decomposition(4)
    assert audit(H, P4, 1.0, 0.02, reference="uniform").pair_coverage == Fraction(1, 4)
    assert audit(H, P4, 1.0, 0.02, reference="per-pair").pair_coverage == 0
    assert audit(H, P4, 1.0, 0.02, reference="self").pair_coverage == 1
    with pytest.raises(DomainError):
        audit(H, P2, 1.0, 0.02, reference="other")


def test_audit_uniform_coverage_and_equitability():
    P = mod4_decomposition(2)
    rng = np.random.default_rng(6)
    H = ThreeGraph.random(8, 0.5, rng)
    aud = audit(H, P, 0.5, 0.02, reference="self")
    assert aud.uniform_pair_coverage == 0      # always measured against 1/ell
    assert not aud.equitable
    # balanced blocks and passing uniform classes make the audit equitable
    P2 = random_decomposition(16, 2, 2, seed=7)
    H2 = ThreeGraph.random(16, 0.4, rng)
    aud2 = audit(H2, P2, 0.9, 0.2, reference="self")
    assert max(P2.block_sizes()) - min(P2.block_sizes()) <= 1
    assert aud2.uniform_pair_coverage == 1
    assert aud2.equitable


def test_audit_size_mismatch():
    P = random_decomposition(10, 2, 2, seed=8)
    rng = np.random.default_rng(9)
    with pytest.raises(DomainError):
        audit(ThreeGraph.random(11, 0.3, rng), P, 0.1, 0.1)


def test_audit_threads_deterministic():
    P = random_decomposition(14, 2, 2, seed=10)
    rng = np.random.default_rng(11)
    H = ThreeGraph.random(14, 0.35, rng)
    a1 = audit(H, P, 0.2, 0.05, threads=1)
    a4 = audit(H, P, 0.2, 0.05, threads=4)
    assert a1.rows == a4.rows
    assert a1.pair_coverage == a4.pair_coverage
    assert a1.triple_coverage == a4.triple_coverage


def test_homogeneity_audit_on_exact_blowup():
    inst = lower_bound_instance("M", 2, 16, seed=1, target_dev=0.05)
    cov, rows = homogeneity_audit(inst.graph, inst.natural, 0.1)
    assert cov == 1
    for r in rows:
        if not r.vacuous:
            assert r.density in (0, 1)
    with pytest.raises(DomainError):
        homogeneity_audit(inst.graph, inst.natural, 0.0)
    with pytest.raises(DomainError):
        homogeneity_audit(inst.graph, inst.natural, 0.6)


def test_homogeneity_coverage_from_audit_rows():
    P = random_decomposition(12, 2, 2, seed=12)
    rng = np.random.default_rng(13)
    H = ThreeGraph.random(12, 0.5, rng)
    aud = audit(H, P, 1.0, 1.0)
    mu = 0.25
    want = Fraction(sum(r.k3 for r in aud.rows if r.density < mu or r.density > 1 - mu),
                    12**3)
    assert aud.homogeneity_coverage(mu) == want


def test_nontrivial_coverage_balanced_partition_is_full():
    P = random_decomposition(16, 2, 2, seed=7)
    for mu in (0.1, 0.25):
        nc = nontrivial_coverage(P, mu)
        assert nc.fraction == 1
        assert nc.lemma_bound_ok
    with pytest.raises(DomainError):
        nontrivial_coverage(P, 0.75)


def test_nontrivial_coverage_drops_tiny_blocks():
    n = 12
    blocks = [[0], list(range(1, n))]
    colors = {}
    rng = np.random.default_rng(14)
    for i in range(2):
        for j in range(i, 2):
            m = rng.integers(0, 2, size=(len(blocks[i]), len(blocks[j])))
            if i == j:
                m = np.triu(m) + np.triu(m, 1).T
            colors[(i, j)] = m
    P = Decomposition.symmetric(n, blocks, 2, colors)
    nc = nontrivial_coverage(P, 0.25)       # block floor is 1.5 > 1
    assert all(0 not in (r.i, r.j, r.k) for r in nc.refs)
    assert nc.fraction < 1
    assert nc.lemma_bound_ok == (nc.fraction >= 1 - 2 * 0.25)
    # consistency with the audit-side computation
    H = ThreeGraph.random(n, 0.5, rng)
    aud = audit(H, P, 1.0, 1.0)
    assert aud.nontrivial_coverage(0.25) == nc.fraction


def test_slice_decomposition_preserves_pair_colors():
    P = random_decomposition(12, 2, 2, seed=15)
    new_block_of = [2 * P.block_of[v] + (P.pos_in_block[v] % 2) for v in range(12)]
    res = slice_decomposition(P, new_block_of, C=2, eps1=0.01, eps2=0.01)
    Q = res.decomposition
    assert Q.t == 4 and Q.ell == P.ell
    assert res.pieces_per_block == (2, 2)
    for x in range(12):
        for y in range(12):
            assert P.color_of_pair(x, y)[2] == Q.color_of_pair(x, y)[2]
    assert res.eps1_predicted == pytest.approx(4 * 0.01**0.5 * 2)
    assert res.eps2_predicted == pytest.approx(2 * 2 * 0.01**-0.5 * 0.01 ** (1 / 12))
    assert res.audit is None
    rng = np.random.default_rng(16)
    audited = slice_decomposition(P, new_block_of, 2, 0.01, 0.01,
                                  H=ThreeGraph.random(12, 0.4, rng))
    assert audited.audit is not None and audited.audit.t == 4


def test_slice_decomposition_guards():
    P = random_decomposition(12, 2, 2, seed=17)
    good = [2 * P.block_of[v] + (P.pos_in_block[v] % 2) for v in range(12)]
    with pytest.raises(DomainError):
        slice_decomposition(P, good[:-1], C=2, eps1=0.1, eps2=0.1)
    with pytest.raises(DomainError):
        slice_decomposition(P, [0] * 11 + [2], C=4, eps1=0.1, eps2=0.1)  # sparse ids
    with pytest.raises(DomainError):
        slice_decomposition(P, good, C=1, eps1=0.1, eps2=0.1)            # cap too small
    straddle = list(P.block_of)                 # identity refinement, then break it
    straddle[P.blocks[0][0]] = 1 - straddle[P.blocks[0][0]]
    with pytest.raises(DomainError):
        slice_decomposition(P, straddle, C=2, eps1=0.1, eps2=0.1)
