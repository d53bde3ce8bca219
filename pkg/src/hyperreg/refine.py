"""Color-grouping engine: classify triads as dense/sparse/error, filter
block pairs with too many errors, cluster each remaining pair's colors by
their corner profiles, and merge clusters into a decomposition with fewer
colors.

Classification works on canonical triad references (the lexicographically
smallest role permutation), since density and the deviation sums are
invariant under permuting a triad's three roles.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .core import Bigraph, Decomposition, ThreeGraph
from .decomp import (DecompositionAudit, TriadRef, TriadRow, _class_dev2_cache,
                     _triad_row, audit, class_passes_dev2)
from .errors import CapExceededError, DomainError
from .quasirandom import dev2
from .structure import (ClusterResult, CornerVertex, EdgeColoredBigraph,
                        haussler_cluster, DENSE, SPARSE, ERROR)

__all__ = [
    "TriadClassification",
    "BadPairs",
    "PairGrouping",
    "MergedClassCheck",
    "GroupedDecomposition",
    "classify_triads",
    "bad_pairs",
    "group_colors",
    "split_colors",
]


@dataclass(frozen=True)
class TriadClassification:
    """Canonical triads split into dense (f1), sparse (f0), and error sets.

    Errors are the trivial triads (an undersized block or class at the given
    mu), the triads failing the counting deviation check at (eps1, eps2), and
    the mid-density remainder, whose count is reported separately because the
    pipeline's guarantees assume it is empty.
    """

    f1: frozenset
    f0: frozenset
    f_err: frozenset
    hom_lo: float
    hom_hi: float
    eps1: float
    eps2: float
    mu: float
    reference: str
    mid_density_count: int
    rows: Mapping

    def of(self, ref: TriadRef) -> int:
        """Color of a triad: dense 1, sparse 0, error 2 (any orientation)."""
        c = ref.canonical()
        if c in self.f1:
            return DENSE
        if c in self.f0:
            return SPARSE
        if c in self.f_err:
            return ERROR
        raise DomainError(f"triad {ref} not covered by the classification")

    @property
    def total(self) -> int:
        return len(self.f1) + len(self.f0) + len(self.f_err)


def _is_trivial(row: TriadRow, block_sizes, n: int, t: int, ell: int, mu: float) -> bool:
    r = row.ref
    bi, bj, bk = block_sizes[r.i], block_sizes[r.j], block_sizes[r.k]
    if min(bi, bj, bk) < mu * n / t:
        return True
    s_ab, s_ac, s_bc = row.class_sizes
    return (s_ab < mu * bi * bj / ell or s_ac < mu * bi * bk / ell
            or s_bc < mu * bj * bk / ell)


def classify_triads(
    H: ThreeGraph,
    P: Decomposition,
    eps1: float,
    eps2: float,
    hom: float,
    mu: float = 0.1,
    reference: str = "per-pair",
) -> TriadClassification:
    """Split every present triad (canonically, over block triples i <= j <= k)
    into f1 (density >= 1 - hom), f0 (density <= hom), and f_err (trivial at
    mu, failing dev23(eps1, eps2), or mid-density)."""
    if not 0 < hom < 0.5:
        raise DomainError("hom must lie in (0, 1/2)")
    if H.n != P.n:
        raise DomainError(f"3-graph on {H.n} vertices does not match decomposition on {P.n}")
    tensor = H.tensor()
    dev2_of = _class_dev2_cache(P)
    block_sizes = P.block_sizes()
    rows: dict[TriadRef, TriadRow] = {}
    for i in range(P.t):
        bi = list(P.blocks[i])
        for j in range(i, P.t):
            bj = list(P.blocks[j])
            for k in range(j, P.t):
                bk = list(P.blocks[k])
                t_slice = tensor[np.ix_(bi, bj, bk)]
                for a in P.colors_in(i, j):
                    exy = P.class_matrix(i, j, a)
                    ok_a = class_passes_dev2(P, dev2_of(i, j, a), i, j, eps2, reference)
                    for b in P.colors_in(i, k):
                        exz = P.class_matrix(i, k, b)
                        ok_b = ok_a and class_passes_dev2(P, dev2_of(i, k, b), i, k, eps2, reference)
                        for c in P.colors_in(j, k):
                            ref = TriadRef(i, j, k, a, b, c).canonical()
                            if ref in rows:
                                continue
                            comp_ok = ok_b and class_passes_dev2(
                                P, dev2_of(j, k, c), j, k, eps2, reference)
                            eyz = P.class_matrix(j, k, c)
                            rows[ref] = _triad_row(t_slice, exy, exz, eyz,
                                                   TriadRef(i, j, k, a, b, c), comp_ok, eps1)
    f1, f0, f_err = set(), set(), set()
    mid = 0
    for ref, row in rows.items():
        if _is_trivial(row, block_sizes, P.n, P.t, P.ell, mu) or not row.dev23_passes:
            f_err.add(ref)
        elif row.density >= 1 - hom:
            f1.add(ref)
        elif row.density <= hom:
            f0.add(ref)
        else:
            mid += 1
            f_err.add(ref)
    return TriadClassification(frozenset(f1), frozenset(f0), frozenset(f_err),
                               hom, 1 - hom, eps1, eps2, mu, reference, mid, rows)


@dataclass(frozen=True)
class BadPairs:
    """Block pairs with at least threshold * ell^3 * t error triads, plus the
    per-pair counts and the fraction |psi| / t^2 for comparison with the
    eps1^(1/4) shape the analysis predicts."""

    psi: frozenset
    counts: Mapping
    threshold: float
    cutoff: float
    fraction: float
    predicted_fraction: float

    @property
    def within_prediction(self) -> bool:
        return self.fraction <= self.predicted_fraction


def bad_pairs(cls: TriadClassification, P: Decomposition, threshold: float) -> BadPairs:
    """Unordered block pairs incident to too many error triads."""
    counts: dict[tuple[int, int], int] = {}
    for ref in cls.f_err:
        pairs = {tuple(sorted(p)) for p in ((ref.i, ref.j), (ref.i, ref.k), (ref.j, ref.k))}
        for p in pairs:
            counts[p] = counts.get(p, 0) + 1
    cutoff = threshold * P.ell**3 * P.t
    psi = frozenset(p for p, c in counts.items() if c >= cutoff)
    return BadPairs(psi, counts, threshold, cutoff,
                    len(psi) / P.t**2, cls.eps1 ** 0.25)


@dataclass(frozen=True)
class MergedClassCheck:
    """Measured deviation of one merged class against the union bound: the
    sum of the constituents' measured deviations each raised to 1/12."""

    new_color: int
    old_colors: tuple[int, ...]
    measured: float
    bound: float

    @property
    def within_bound(self) -> bool:
        return self.measured <= self.bound


@dataclass(frozen=True)
class PairGrouping:
    """How one block pair's colors were grouped: in psi (everything residual),
    or clustered with optional residual for non-passing and excluded colors."""

    pair: tuple[int, int]
    in_psi: bool
    passing: tuple[int, ...]
    clusters: tuple[tuple[int, ...], ...]
    residual: tuple[int, ...]
    cluster_result: ClusterResult | None
    merged_checks: tuple[MergedClassCheck, ...]

    @property
    def n_colors(self) -> int:
        return len(self.clusters) + (1 if self.residual else 0)


@dataclass(frozen=True)
class GroupedDecomposition:
    decomposition: Decomposition
    provenance: Mapping            # (i, j) with i <= j -> {new color: old colors}
    audit: DecompositionAudit
    psi: frozenset
    classification: TriadClassification
    pair_reports: tuple[PairGrouping, ...]
    cap: int
    ell_prime: int

    @property
    def cap_achieved(self) -> bool:
        """True when the result used at most `cap` colors on every pair; False
        means some pair needed the one extra residual color."""
        return self.ell_prime <= self.cap


def _corner_cells(cls: TriadClassification, P: Decomposition, i: int, j: int,
                  passing: dict) -> tuple[list[CornerVertex], np.ndarray]:
    rows = passing[(i, j)]
    corners: list[CornerVertex] = []
    for s in range(P.t):
        if s in (i, j):
            continue
        for beta in passing[(s, i)]:
            for gamma in passing[(s, j)]:
                corners.append(CornerVertex(s, beta, gamma))
    color = np.full((len(rows), len(corners)), ERROR, dtype=np.int16)
    for ci, cv in enumerate(corners):
        for ri, alpha in enumerate(rows):
            color[ri, ci] = cls.of(TriadRef(cv.block, i, j, cv.left_color,
                                            cv.right_color, alpha))
    return corners, color


def group_colors(
    H: ThreeGraph,
    P: Decomposition,
    cap: int,
    eps1: float,
    eps2: float,
    hom: float,
    delta: float | None = None,
    mu: float = 0.1,
    threshold: float | None = None,
    cluster_eps: float | None = None,
    reference: str = "per-pair",
    threads: int = 1,
) -> GroupedDecomposition:
    """Compress a decomposition's colors to at most `cap` per block pair
    (plus at most one residual color for leftovers).

    Pipeline: classify triads; exclude block pairs with too many error triads
    (they keep a single residual color); for each remaining pair build the
    edge-colored bigraph whose rows are the pair's deviation-passing colors
    and whose columns are corners (two passing leg classes through a third
    block), with cell colors read off the classification; first-fit cluster
    the rows by corner-profile proximity at delta; merge each cluster into
    one color.  More than `cap` clusters on any pair raises CapExceededError
    with that pair — the signal that the instance genuinely needs more
    colors.

    Defaults: delta = hom / 10, threshold = eps1^(3/4), cluster_eps = eps1.
    """
    if cap < 1:
        raise DomainError("cap must be at least 1")
    if delta is None:
        delta = hom / 10
    if threshold is None:
        threshold = eps1 ** 0.75
    if cluster_eps is None:
        cluster_eps = eps1

    cls = classify_triads(H, P, eps1, eps2, hom, mu=mu, reference=reference)
    bp = bad_pairs(cls, P, threshold)

    passing = {}
    dev2_of = _class_dev2_cache(P)
    for i in range(P.t):
        for j in range(P.t):
            passing[(i, j)] = [a for a in P.colors_in(i, j)
                               if class_passes_dev2(P, dev2_of(i, j, a), i, j, eps2, reference)]

    new_pair_colors: dict[tuple[int, int], np.ndarray] = {}
    provenance: dict[tuple[int, int], dict[int, tuple[int, ...]]] = {}
    reports: list[PairGrouping] = []
    ell_prime = 1

    for i in range(P.t):
        for j in range(i, P.t):
            pair = (i, j)
            all_colors = list(P.colors_in(i, j))
            in_psi = pair in bp.psi
            cluster_res = None
            if in_psi:
                clusters: list[tuple[int, ...]] = []
                residual = tuple(all_colors)
            else:
                rows = passing[pair]
                corners, cells = _corner_cells(cls, P, i, j, passing)
                if rows and corners:
                    ecb = EdgeColoredBigraph(cells, n_colors=3)
                    cluster_res = haussler_cluster(ecb, delta, cluster_eps)
                    if cluster_res.m > cap:
                        raise CapExceededError(
                            f"block pair {pair} clusters into {cluster_res.m} > cap {cap} "
                            f"representatives", pair=pair, reps=cluster_res.m, cap=cap)
                    clusters = tuple(tuple(rows[r] for r in grp)
                                     for grp in cluster_res.clusters)
                else:
                    clusters = (tuple(rows),) if rows else ()
                clustered = {c for grp in clusters for c in grp}
                residual = tuple(c for c in all_colors if c not in clustered)

            mapping: dict[int, int] = {}
            prov: dict[int, tuple[int, ...]] = {}
            for nc, grp in enumerate(clusters):
                prov[nc] = tuple(grp)
                for c in grp:
                    mapping[c] = nc
            if residual:
                nc = len(clusters)
                prov[nc] = tuple(residual)
                for c in residual:
                    mapping[c] = nc
            n_colors = len(prov)
            ell_prime = max(ell_prime, n_colors)

            old = P.pair_colors(i, j)
            lut = np.zeros(P.ell, dtype=np.int16)
            for c, nc in mapping.items():
                lut[c] = nc
            new = lut[old]
            new_pair_colors[(i, j)] = new
            if i != j:
                new_pair_colors[(j, i)] = new.T
            provenance[pair] = prov

            checks = []
            for nc, olds in prov.items():
                merged = np.zeros(old.shape, dtype=bool)
                bound = 0.0
                for c in olds:
                    merged |= P.class_matrix(i, j, c)
                    bound += dev2_of(i, j, c).normalized_sum ** (1.0 / 12.0)
                measured = dev2(Bigraph(merged)).normalized_sum
                checks.append(MergedClassCheck(nc, tuple(olds), measured, bound))
            reports.append(PairGrouping(pair, in_psi, tuple(passing[pair]),
                                        tuple(tuple(g) for g in clusters), residual,
                                        cluster_res, tuple(checks)))

    result = Decomposition(P.n, P.blocks, ell_prime, new_pair_colors)
    aud = audit(H, result, eps1, eps2, reference=reference, threads=threads)
    return GroupedDecomposition(result, provenance, aud, bp.psi, cls,
                                tuple(reports), cap, ell_prime)


def split_colors(P: Decomposition, pieces: int, seed: int) -> tuple[Decomposition, dict]:
    """Refine a decomposition by cutting every color class into `pieces`
    uniformly random parts, the inverse-direction fixture for the grouping
    round trip: group_colors on the result should rediscover the originals.

    Old color a on a pair becomes colors a * pieces .. a * pieces + pieces - 1,
    so the new color budget is ell * pieces.  The cut is mirrored onto the
    transposed orientation so both stay consistent.  Returns the refined
    decomposition and {(i, j) with i <= j: {old color: new colors}}.
    """
    if pieces < 1:
        raise DomainError("pieces must be at least 1")
    if P.ell * pieces > 2**15 - 1:
        raise DomainError("split would overflow the color index range")
    rng = np.random.default_rng(seed)
    colors = {}
    split_map = {}
    for i in range(P.t):
        for j in range(i, P.t):
            old = P.pair_colors(i, j)
            part = np.zeros(old.shape, dtype=np.int16)
            # cut each class into near-equal random parts (sizes within one
            # cell), so the parts keep the class's density profile exactly
            upper = np.triu(np.ones(old.shape, dtype=bool)) if i == j else None
            for a in np.unique(old):
                sel = np.argwhere((old == a) & upper if i == j else old == a)
                order = rng.permutation(len(sel))
                part[sel[order, 0], sel[order, 1]] = np.arange(len(sel)) % pieces
            if i == j:
                part = np.triu(part) + np.triu(part, 1).T
            new = old * pieces + part
            colors[(i, j)] = new
            colors[(j, i)] = new.T
            split_map[(i, j)] = {
                int(a): tuple(range(int(a) * pieces, (int(a) + 1) * pieces))
                for a in np.unique(old)
            }
    return Decomposition(P.n, P.blocks, P.ell * pieces, colors), split_map
