"""Edge-colored bigraph analysis: sparse/dense pattern search, Haussler-type
first-fit clustering, corner graphs built from a decomposition, and encoding
search.

An edge-colored bigraph totally colors U x V with colors 0..r.  The 3-color
case designates 0 = sparse, 1 = dense, 2 = error; pattern search places
pattern edges on dense cells and pattern non-edges on sparse cells, with the
error color forbidden on all pattern pairs.
"""

from __future__ import annotations

from collections.abc import Mapping
from dataclasses import dataclass
from math import sqrt
from typing import Iterable

import numpy as np

from .core import Bigraph, Decomposition, ThreeGraph, Trigraph
from .decomp import TriadRef, class_passes_dev2, materialize
from .dims import Embedding, SearchOutcome, EXHAUSTIVE_PATTERN_MAX_SIDE
from .errors import DomainError, SizeError
from .quasirandom import dev2, dev23

__all__ = [
    "EdgeColoredBigraph",
    "ClusterResult",
    "CornerVertex",
    "CornerGraph",
    "CornerFamily",
    "EncodingResult",
    "find_e0e1_copy",
    "haussler_cluster",
    "corner_graph",
    "find_encoding",
]

SPARSE, DENSE, ERROR = 0, 1, 2


class EdgeColoredBigraph:
    """Total function U x V -> {0, ..., n_colors - 1}, stored dense."""

    def __init__(self, color, n_colors: int | None = None):
        arr = np.array(color, dtype=np.int16, copy=True)
        if arr.ndim != 2:
            raise DomainError("color matrix must be two-dimensional")
        if arr.size == 0:
            raise DomainError("vertex classes must be nonempty")
        if arr.min() < 0:
            raise DomainError("colors must be nonnegative")
        top = int(arr.max()) + 1
        if n_colors is None:
            n_colors = top
        elif top > n_colors:
            raise DomainError(f"color {top - 1} out of range for {n_colors} colors")
        arr.setflags(write=False)
        self._color = arr
        self.n_colors = int(n_colors)

    @property
    def color(self) -> np.ndarray:
        return self._color

    @property
    def u_size(self) -> int:
        return self._color.shape[0]

    @property
    def v_size(self) -> int:
        return self._color.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self._color.shape

    @classmethod
    def from_bigraph(cls, B: Bigraph, dense: int = DENSE, sparse: int = SPARSE,
                     n_colors: int | None = None) -> "EdgeColoredBigraph":
        col = np.where(B.adj, dense, sparse)
        return cls(col, n_colors=n_colors or max(dense, sparse) + 1)

    def color_of(self, u: int, v: int) -> int:
        return int(self._color[u, v])

    def count(self, c: int) -> int:
        return int((self._color == c).sum())

    def row_bits(self, c: int) -> tuple[int, ...]:
        """Per-row neighborhood bitmasks for color c (bit v set iff (u,v) has
        color c)."""
        cached = getattr(self, "_row_bits_cache", None)
        if cached is None:
            cached = {}
            self._row_bits_cache = cached
        if c not in cached:
            eq = (self._color == c)
            packed = np.packbits(eq, axis=1, bitorder="little")
            cached[c] = tuple(int.from_bytes(row.tobytes(), "little") for row in packed)
        return cached[c]

    def neighborhood(self, u: int, c: int) -> int:
        return self.row_bits(c)[u]

    def __eq__(self, other) -> bool:
        if not isinstance(other, EdgeColoredBigraph):
            return NotImplemented
        return (self.n_colors == other.n_colors
                and self._color.shape == other._color.shape
                and bool((self._color == other._color).all()))

    def __hash__(self) -> int:
        return hash((self._color.shape, self.n_colors, self._color.tobytes()))

    def __repr__(self) -> str:
        return f"EdgeColoredBigraph({self.u_size}x{self.v_size}, colors={self.n_colors})"


class _BudgetExhausted(Exception):
    pass


def find_e0e1_copy(G: EdgeColoredBigraph, pattern: Bigraph,
                   budget: int | None = None,
                   dense: int = DENSE, sparse: int = SPARSE) -> SearchOutcome:
    """Copy of `pattern` with edges on `dense` cells and non-edges on `sparse`
    cells; every other color is forbidden on pattern pairs.

    Backtracking with side-alternating vertex order; exhaustive (and hence
    definitive either way) when budget is None, which requires pattern sides
    at most 8.
    """
    pu, pv = pattern.shape
    if budget is None and max(pu, pv) > EXHAUSTIVE_PATTERN_MAX_SIDE:
        raise SizeError(
            f"exhaustive pattern search supports sides <= {EXHAUSTIVE_PATTERN_MAX_SIDE}, "
            f"got {pattern.shape}")
    hu, hv = G.shape
    if pu > hu or pv > hv:
        return SearchOutcome(None, definitive=True)

    dense_bits = G.row_bits(dense)
    sparse_bits = G.row_bits(sparse)
    pat_rows = pattern.row_bits()

    order: list[tuple[str, int]] = []
    ri = ci = 0
    while ri < pu or ci < pv:
        if ri < pu:
            order.append(("r", ri)); ri += 1
        if ci < pv:
            order.append(("c", ci)); ci += 1

    row_assign = [-1] * pu
    col_assign = [-1] * pv
    nodes = 0

    def cell_ok(i: int, j: int, u: int, v: int) -> bool:
        want = dense_bits if (pat_rows[i] >> j) & 1 else sparse_bits
        return bool((want[u] >> v) & 1)

    def rec(pos: int):
        nonlocal nodes
        if pos == len(order):
            return Embedding(tuple(row_assign), tuple(col_assign))
        if budget is not None and nodes > budget:
            raise _BudgetExhausted
        side, idx = order[pos]
        if side == "r":
            for u in range(hu):
                if u in row_assign:
                    continue
                nodes += 1
                if all(cell_ok(idx, j, u, col_assign[j])
                       for j in range(pv) if col_assign[j] >= 0):
                    row_assign[idx] = u
                    got = rec(pos + 1)
                    if got is not None:
                        return got
                    row_assign[idx] = -1
        else:
            for v in range(hv):
                if v in col_assign:
                    continue
                nodes += 1
                if all(cell_ok(i, idx, row_assign[i], v)
                       for i in range(pu) if row_assign[i] >= 0):
                    col_assign[idx] = v
                    got = rec(pos + 1)
                    if got is not None:
                        return got
                    col_assign[idx] = -1
        return None

    try:
        emb = rec(0)
    except _BudgetExhausted:
        return SearchOutcome(None, definitive=False, trials=nodes)
    return SearchOutcome(emb, definitive=True, trials=nodes)


@dataclass(frozen=True)
class ClusterResult:
    """First-fit clustering of the rows of a 3-colored bigraph.

    u0 holds rows with too many error-colored cells; every remaining row
    joins the first representative whose dense and sparse neighborhoods are
    both within delta * |V| in symmetric difference, becoming a new
    representative when none qualifies.
    """

    u0: tuple[int, ...]
    reps: tuple[int, ...]
    clusters: tuple[tuple[int, ...], ...]
    delta: float
    eps: float

    @property
    def m(self) -> int:
        return len(self.reps)

    def validate(self, G: EdgeColoredBigraph) -> bool:
        thresh_e2 = sqrt(self.eps) * G.v_size
        thresh = self.delta * G.v_size
        e2 = G.row_bits(ERROR)
        d1 = G.row_bits(DENSE)
        d0 = G.row_bits(SPARSE)

        def close(u: int, r: int) -> bool:
            return max((d1[u] ^ d1[r]).bit_count(),
                       (d0[u] ^ d0[r]).bit_count()) <= thresh

        members = set(self.u0)
        for rep, cluster in zip(self.reps, self.clusters):
            if rep not in cluster:
                return False
            for u in cluster:
                if u in members:
                    return False
                members.add(u)
                if e2[u].bit_count() > thresh_e2:
                    return False
                if not close(u, rep):
                    return False
                for earlier in self.reps:
                    if earlier == rep:
                        break
                    if close(u, earlier):
                        return False
        for u in self.u0:
            if e2[u].bit_count() <= thresh_e2:
                return False
        return len(members) == G.u_size


def haussler_cluster(G: EdgeColoredBigraph, delta: float, eps: float) -> ClusterResult:
    """Cluster rows by dense/sparse neighborhood proximity.

    Rows whose error-colored neighborhood exceeds sqrt(eps) * |V| are set
    aside in u0; the rest are scanned in ascending index, each joining the
    first representative within delta * |V| on both the dense and the sparse
    neighborhood symmetric differences.  No minimality claim is made on the
    number of representatives.
    """
    if not (0 < delta <= 1):
        raise DomainError("delta must lie in (0, 1]")
    if not (0 < eps < 1):
        raise DomainError("eps must lie in (0, 1)")
    if G.n_colors > 3:
        raise DomainError("clustering expects a 3-colored bigraph")
    thresh_e2 = sqrt(eps) * G.v_size
    thresh = delta * G.v_size
    e2 = G.row_bits(ERROR)
    d1 = G.row_bits(DENSE)
    d0 = G.row_bits(SPARSE)

    u0 = [u for u in range(G.u_size) if e2[u].bit_count() > thresh_e2]
    excluded = set(u0)
    reps: list[int] = []
    clusters: list[list[int]] = []
    for u in range(G.u_size):
        if u in excluded:
            continue
        for i, r in enumerate(reps):
            if max((d1[u] ^ d1[r]).bit_count(),
                   (d0[u] ^ d0[r]).bit_count()) <= thresh:
                clusters[i].append(u)
                break
        else:
            reps.append(u)
            clusters.append([u])
    return ClusterResult(tuple(u0), tuple(reps),
                         tuple(tuple(c) for c in clusters), delta, eps)


@dataclass(frozen=True)
class CornerVertex:
    """Corner indexed by its shared block and the colors of its two legs:
    left on (block, j0), right on (block, k0)."""

    block: int
    left_color: int
    right_color: int


@dataclass(frozen=True)
class CornerGraph:
    """Edge-colored bigraph over one block pair (j0, k0): rows are the
    deviation-passing colors of that pair, columns are corners made of two
    passing leg classes sharing a third block.

    The cell for (alpha, corner) is dense (1) when the edge set covers at
    least a `hi` fraction of the triangles of the associated triad, sparse
    (0) when at most `lo`, and error (2) in between or when the triad fails
    the counting deviation check (when one was requested).
    """

    j0: int
    k0: int
    edge_vertices: tuple[int, ...]
    corner_vertices: tuple[CornerVertex, ...]
    color: np.ndarray
    lo: float
    hi: float
    eps2: float
    reference: str

    def ecb(self) -> EdgeColoredBigraph:
        return EdgeColoredBigraph(self.color, n_colors=3)

    def color_of(self, alpha: int, corner: CornerVertex) -> int:
        return int(self.color[self.edge_vertices.index(alpha),
                              self.corner_vertices.index(corner)])

    def triad_ref(self, corner: CornerVertex, alpha: int) -> TriadRef:
        return TriadRef(corner.block, self.j0, self.k0,
                        corner.left_color, corner.right_color, alpha)


class CornerFamily(Mapping):
    """Corner graphs for every requested block pair, keyed (j0, k0), j0 < k0."""

    def __init__(self, graphs: dict):
        self._graphs = dict(graphs)

    def __getitem__(self, key):
        return self._graphs[tuple(key)]

    def __iter__(self):
        return iter(self._graphs)

    def __len__(self) -> int:
        return len(self._graphs)

    def e2_count(self) -> int:
        return sum(int((g.color == ERROR).sum()) for g in self._graphs.values())


def _passing_colors(P: Decomposition, eps2: float, reference: str) -> dict:
    out: dict[tuple[int, int], list[int]] = {}
    for i in range(P.t):
        for j in range(P.t):
            if i == j:
                continue
            out[(i, j)] = [a for a in P.colors_in(i, j)
                           if class_passes_dev2(P, dev2(P.class_bigraph(i, j, a)),
                                                i, j, eps2, reference)]
    return out


def corner_graph(
    H: ThreeGraph,
    P: Decomposition,
    eps2: float,
    lo: float = 0.5,
    hi: float = 0.5,
    reference: str = "per-pair",
    eps1: float | None = None,
    pairs: Iterable[tuple[int, int]] | None = None,
) -> CornerFamily:
    """Build corner graphs from a decomposition.

    With lo = hi = 1/2 and no counting predicate the density split is
    exhaustive (error color empty): a cell is dense iff the edges cover at
    least half the triad's triangles.  Passing eps1 routes triads failing the
    counting deviation check dev23(eps1, eps2) to the error color instead.
    """
    if not (0 <= lo <= hi <= 1):
        raise DomainError("need 0 <= lo <= hi <= 1")
    passing = _passing_colors(P, eps2, reference)
    tensor = H.tensor()
    if pairs is None:
        pairs = [(j, k) for j in range(P.t) for k in range(j + 1, P.t)]
    graphs = {}
    for j0, k0 in pairs:
        if not (0 <= j0 < k0 < P.t):
            raise DomainError(f"block pair ({j0}, {k0}) out of range or unordered")
        edge_vs = tuple(passing[(j0, k0)])
        corner_vs = []
        for i in range(P.t):
            if i in (j0, k0):
                continue
            for beta in passing[(i, j0)]:
                for gamma in passing[(i, k0)]:
                    corner_vs.append(CornerVertex(i, beta, gamma))
        color = np.full((len(edge_vs), len(corner_vs)), SPARSE, dtype=np.int16)
        Vj, Vk = list(P.blocks[j0]), list(P.blocks[k0])
        eyz_by_alpha = {a: P.class_matrix(j0, k0, a) for a in edge_vs}
        for ci, cv in enumerate(corner_vs):
            Vi = list(P.blocks[cv.block])
            local = tensor[np.ix_(Vi, Vj, Vk)]
            exy = P.class_matrix(cv.block, j0, cv.left_color)
            exz = P.class_matrix(cv.block, k0, cv.right_color)
            legs = exy[:, :, None] & exz[:, None, :]
            for ai, alpha in enumerate(edge_vs):
                tri = legs & eyz_by_alpha[alpha][None, :, :]
                k3 = int(tri.sum())
                hits = int((tri & local).sum())
                if hits >= hi * k3:
                    c = DENSE
                elif hits <= lo * k3:
                    c = SPARSE
                else:
                    c = ERROR
                if eps1 is not None and c != ERROR:
                    ref = TriadRef(cv.block, j0, k0, cv.left_color, cv.right_color, alpha)
                    rep = dev23(Trigraph(local), materialize(P, ref))
                    if not rep.passes(eps1, eps2):
                        c = ERROR
                color[ai, ci] = c
        color.setflags(write=False)
        graphs[(j0, k0)] = CornerGraph(j0, k0, edge_vs, tuple(corner_vs),
                                       color, lo, hi, eps2, reference)
    return CornerFamily(graphs)


@dataclass(frozen=True)
class EncodingResult:
    """Encoding of a bigraph pattern over one block pair: f maps pattern rows
    to edge colors of (j0, k0), g maps pattern columns to corners; pattern
    edges land on dense cells and non-edges on sparse cells."""

    j0: int
    k0: int
    f: tuple[int, ...]
    g: tuple[CornerVertex, ...]
    graph: CornerGraph

    def validate(self, pattern: Bigraph) -> bool:
        if len(set(self.f)) != len(self.f) or len(set(self.g)) != len(self.g):
            return False
        for a in range(pattern.u_size):
            for b in range(pattern.v_size):
                c = self.graph.color_of(self.f[a], self.g[b])
                want = DENSE if pattern.has_edge(a, b) else SPARSE
                if c != want:
                    return False
        return True


def find_encoding(
    pattern: Bigraph,
    H: ThreeGraph,
    P: Decomposition,
    eps2: float,
    lo: float = 0.5,
    hi: float = 0.5,
    reference: str = "per-pair",
    eps1: float | None = None,
    budget: int | None = None,
    pairs: Iterable[tuple[int, int]] | None = None,
) -> EncodingResult | None:
    """First encoding of `pattern` found over any block pair, or None.

    Each block pair's corner graph is searched for a sparse/dense copy of the
    pattern; rows of the corner graph are edge colors (images of f) and
    columns are corners (images of g).
    """
    if pairs is None:
        pairs = [(j, k) for j in range(P.t) for k in range(j + 1, P.t)]
    for j0, k0 in pairs:
        family = corner_graph(H, P, eps2, lo=lo, hi=hi, reference=reference,
                              eps1=eps1, pairs=[(j0, k0)])
        cg = family[(j0, k0)]
        if len(cg.edge_vertices) < pattern.u_size or len(cg.corner_vertices) < pattern.v_size:
            continue
        out = find_e0e1_copy(cg.ecb(), pattern, budget=budget)
        if out.found:
            emb = out.witness
            f = tuple(cg.edge_vertices[r] for r in emb.row_map)
            g = tuple(cg.corner_vertices[c] for c in emb.col_map)
            return EncodingResult(j0, k0, f, g, cg)
    return None
