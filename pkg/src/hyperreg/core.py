"""Core combinatorial types: bigraphs, 3-graphs, trigraphs, triads, decompositions.

All vertex sets are dense integer ranges 0..n-1. Every type is immutable after
construction (numpy buffers are flagged read-only), so instances can be shared
freely across threads and used as cache keys by identity.

Boolean matrices are held as numpy arrays; bit-packed row masks (Python ints)
are derived lazily for the popcount-based counting kernels.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Iterator, Sequence

import numpy as np

from .errors import DomainError

__all__ = [
    "Bigraph",
    "SimpleGraph",
    "ThreeGraph",
    "Trigraph",
    "Triad",
    "Decomposition",
    "density_bigraph",
    "triangles",
    "relative_density",
    "restrict_trigraph",
    "lift",
    "sub_instances",
    "arity1_neighborhood",
    "arity2_neighborhood",
]


def _freeze(arr: np.ndarray) -> np.ndarray:
    arr.setflags(write=False)
    return arr


def _pack_rows(adj: np.ndarray) -> tuple[int, ...]:
    """Each row as a Python int bitmask, bit j = column j."""
    out = []
    for row in adj:
        mask = 0
        for j in np.flatnonzero(row):
            mask |= 1 << int(j)
        out.append(mask)
    return tuple(out)


def _check_indices(idx: Sequence[int], size: int, what: str) -> tuple[int, ...]:
    idx = tuple(int(i) for i in idx)
    if len(idx) == 0:
        raise DomainError(f"empty part: {what}")
    for i in idx:
        if not 0 <= i < size:
            raise DomainError(f"index {i} out of range for {what} of size {size}")
    return idx


class Bigraph:
    """Bipartite graph on ordered vertex classes U (rows) and V (columns)."""

    __slots__ = ("_adj", "u_size", "v_size", "_row_bits", "_col_bits", "_ecount")

    def __init__(self, adj):
        adj = np.ascontiguousarray(adj, dtype=bool)
        if adj.ndim != 2:
            raise DomainError("bigraph adjacency must be a 2d boolean matrix")
        if adj.shape[0] == 0 or adj.shape[1] == 0:
            raise DomainError("empty part: bigraph classes must be nonempty")
        self._adj = _freeze(adj)
        self.u_size, self.v_size = adj.shape
        self._row_bits = None
        self._col_bits = None
        self._ecount = None

    # ----- constructors -----

    @classmethod
    def empty(cls, u_size: int, v_size: int) -> "Bigraph":
        return cls(np.zeros((u_size, v_size), dtype=bool))

    @classmethod
    def complete(cls, u_size: int, v_size: int) -> "Bigraph":
        return cls(np.ones((u_size, v_size), dtype=bool))

    @classmethod
    def from_edges(cls, u_size: int, v_size: int, edges: Iterable[tuple[int, int]]) -> "Bigraph":
        adj = np.zeros((u_size, v_size), dtype=bool)
        for u, v in edges:
            if not (0 <= u < u_size and 0 <= v < v_size):
                raise DomainError(f"edge ({u},{v}) out of range")
            adj[u, v] = True
        return cls(adj)

    @classmethod
    def random(cls, u_size: int, v_size: int, p: float, rng: np.random.Generator) -> "Bigraph":
        return cls(rng.random((u_size, v_size)) < p)

    # ----- basic accessors -----

    @property
    def adj(self) -> np.ndarray:
        return self._adj

    @property
    def shape(self) -> tuple[int, int]:
        return (self.u_size, self.v_size)

    def edge_count(self) -> int:
        if self._ecount is None:
            self._ecount = int(self._adj.sum())
        return self._ecount

    def density(self, rows: Sequence[int] | None = None, cols: Sequence[int] | None = None) -> Fraction:
        """Exact edge density of the induced sub-bigraph on (rows, cols)."""
        if rows is None and cols is None:
            return Fraction(self.edge_count(), self.u_size * self.v_size)
        sub = self.restrict(rows if rows is not None else range(self.u_size),
                            cols if cols is not None else range(self.v_size))
        return Fraction(sub.edge_count(), sub.u_size * sub.v_size)

    def row_bits(self) -> tuple[int, ...]:
        if self._row_bits is None:
            self._row_bits = _pack_rows(self._adj)
        return self._row_bits

    def col_bits(self) -> tuple[int, ...]:
        if self._col_bits is None:
            self._col_bits = _pack_rows(self._adj.T)
        return self._col_bits

    def has_edge(self, u: int, v: int) -> bool:
        return bool(self._adj[u, v])

    def restrict(self, rows: Sequence[int], cols: Sequence[int]) -> "Bigraph":
        rows = _check_indices(rows, self.u_size, "row class")
        cols = _check_indices(cols, self.v_size, "column class")
        return Bigraph(self._adj[np.ix_(rows, cols)])

    def transpose(self) -> "Bigraph":
        return Bigraph(self._adj.T)

    def complement(self) -> "Bigraph":
        return Bigraph(~self._adj)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Bigraph):
            return NotImplemented
        return self.shape == other.shape and bool(np.array_equal(self._adj, other._adj))

    def __hash__(self) -> int:
        return hash((self.shape, self._adj.tobytes()))

    def __repr__(self) -> str:
        return f"Bigraph({self.u_size}x{self.v_size}, edges={self.edge_count()})"


class SimpleGraph:
    """Undirected graph on [n] without loops; edges are 2-subsets."""

    __slots__ = ("n", "edges", "_adj")

    def __init__(self, n: int, edges: Iterable[tuple[int, int]]):
        if n <= 0:
            raise DomainError("empty part: graph needs at least one vertex")
        self.n = int(n)
        norm = set()
        for a, b in edges:
            a, b = int(a), int(b)
            if a == b:
                raise DomainError(f"loop ({a},{b}) is not a 2-subset")
            if not (0 <= a < n and 0 <= b < n):
                raise DomainError(f"edge ({a},{b}) out of range")
            norm.add((min(a, b), max(a, b)))
        self.edges = frozenset(norm)
        self._adj = None

    def adjacency(self) -> np.ndarray:
        if self._adj is None:
            adj = np.zeros((self.n, self.n), dtype=bool)
            for a, b in self.edges:
                adj[a, b] = adj[b, a] = True
            self._adj = _freeze(adj)
        return self._adj

    def lift(self) -> Bigraph:
        """Ordered version: n x n bigraph, zero diagonal."""
        return Bigraph(self.adjacency().copy())

    def __repr__(self) -> str:
        return f"SimpleGraph(n={self.n}, edges={len(self.edges)})"


class ThreeGraph:
    """3-uniform hypergraph on [n]; edges are 3-subsets, stored sorted."""

    __slots__ = ("n", "edges", "_tensor", "_edge_array")

    def __init__(self, n: int, edges: Iterable[tuple[int, int, int]]):
        if n <= 0:
            raise DomainError("empty part: 3-graph needs at least one vertex")
        self.n = int(n)
        norm = set()
        for e in edges:
            t = tuple(sorted(int(x) for x in e))
            if len(t) != 3 or len(set(t)) != 3:
                raise DomainError(f"edge {e} is not a 3-subset")
            if not all(0 <= x < n for x in t):
                raise DomainError(f"edge {e} out of range")
            norm.add(t)
        self.edges = frozenset(norm)
        self._tensor = None
        self._edge_array = None

    @classmethod
    def empty(cls, n: int) -> "ThreeGraph":
        return cls(n, [])

    @classmethod
    def complete(cls, n: int) -> "ThreeGraph":
        from itertools import combinations

        return cls(n, combinations(range(n), 3))

    @classmethod
    def random(cls, n: int, p: float, rng: np.random.Generator) -> "ThreeGraph":
        from itertools import combinations

        cand = list(combinations(range(n), 3))
        keep = rng.random(len(cand)) < p
        return cls(n, [e for e, k in zip(cand, keep) if k])

    def edge_array(self) -> np.ndarray:
        if self._edge_array is None:
            if self.edges:
                arr = np.array(sorted(self.edges), dtype=np.int64)
            else:
                arr = np.zeros((0, 3), dtype=np.int64)
            self._edge_array = _freeze(arr)
        return self._edge_array

    def has_edge(self, a: int, b: int, c: int) -> bool:
        if len({a, b, c}) != 3:
            return False
        return tuple(sorted((a, b, c))) in self.edges

    def tensor(self) -> np.ndarray:
        """Dense ordered indicator: T[x,y,z] = ({x,y,z} in edges). Cached."""
        if self._tensor is None:
            T = np.zeros((self.n, self.n, self.n), dtype=bool)
            arr = self.edge_array()
            if len(arr):
                from itertools import permutations

                for p in permutations(range(3)):
                    T[arr[:, p[0]], arr[:, p[1]], arr[:, p[2]]] = True
            self._tensor = _freeze(T)
        return self._tensor

    def lift(self) -> "Trigraph":
        """Ordered version as a trigraph on (V, V, V); zero on non-injective triples."""
        return Trigraph(self.tensor())

    def density(self) -> Fraction:
        from math import comb

        total = comb(self.n, 3)
        if total == 0:
            return Fraction(0)
        return Fraction(len(self.edges), total)

    def __repr__(self) -> str:
        return f"ThreeGraph(n={self.n}, edges={len(self.edges)})"


class Trigraph:
    """Ternary relation on ordered classes X, Y, Z (dense boolean tensor)."""

    __slots__ = ("_rel", "x_size", "y_size", "z_size")

    def __init__(self, rel):
        rel = np.ascontiguousarray(rel, dtype=bool)
        if rel.ndim != 3:
            raise DomainError("trigraph relation must be a 3d boolean tensor")
        if 0 in rel.shape:
            raise DomainError("empty part: trigraph classes must be nonempty")
        self._rel = _freeze(rel)
        self.x_size, self.y_size, self.z_size = rel.shape

    @property
    def rel(self) -> np.ndarray:
        return self._rel

    @property
    def shape(self) -> tuple[int, int, int]:
        return self._rel.shape

    def count(self) -> int:
        return int(self._rel.sum())

    def density(self) -> Fraction:
        return Fraction(self.count(), self.x_size * self.y_size * self.z_size)

    def restrict(self, xs: Sequence[int], ys: Sequence[int], zs: Sequence[int]) -> "Trigraph":
        xs = _check_indices(xs, self.x_size, "X class")
        ys = _check_indices(ys, self.y_size, "Y class")
        zs = _check_indices(zs, self.z_size, "Z class")
        return Trigraph(self._rel[np.ix_(xs, ys, zs)])

    def __repr__(self) -> str:
        return f"Trigraph({self.x_size}x{self.y_size}x{self.z_size}, count={self.count()})"


class Triad:
    """Three pairwise bigraphs spanning ordered classes X, Y, Z.

    exy relates X to Y, exz relates X to Z, eyz relates Y to Z.
    """

    __slots__ = ("exy", "exz", "eyz", "x_size", "y_size", "z_size", "_tri_count")

    def __init__(self, exy: Bigraph, exz: Bigraph, eyz: Bigraph):
        if exy.u_size != exz.u_size:
            raise DomainError("triad: exy and exz disagree on |X|")
        if exy.v_size != eyz.u_size:
            raise DomainError("triad: exy and eyz disagree on |Y|")
        if exz.v_size != eyz.v_size:
            raise DomainError("triad: exz and eyz disagree on |Z|")
        self.exy, self.exz, self.eyz = exy, exz, eyz
        self.x_size = exy.u_size
        self.y_size = exy.v_size
        self.z_size = exz.v_size
        self._tri_count = None

    @classmethod
    def complete(cls, x: int, y: int, z: int) -> "Triad":
        return cls(Bigraph.complete(x, y), Bigraph.complete(x, z), Bigraph.complete(y, z))

    @property
    def shape(self) -> tuple[int, int, int]:
        return (self.x_size, self.y_size, self.z_size)

    def components(self) -> tuple[Bigraph, Bigraph, Bigraph]:
        return (self.exy, self.exz, self.eyz)

    def triangle_count(self) -> int:
        """Number of ordered triangles (x,y,z), by bit-parallel row intersection."""
        if self._tri_count is None:
            rows_xy = self.exy.row_bits()   # bits over Y
            rows_xz = self.exz.row_bits()   # bits over Z, per x
            cols_yz = self.eyz.col_bits()   # bits over Y, per z
            total = 0
            for x in range(self.x_size):
                ybits = rows_xy[x]
                if not ybits:
                    continue
                zbits = rows_xz[x]
                z = 0
                while zbits:
                    low = zbits & -zbits
                    z = low.bit_length() - 1
                    total += (ybits & cols_yz[z]).bit_count()
                    zbits ^= low
            self._tri_count = total
        return self._tri_count

    def triangle_tensor(self) -> np.ndarray:
        a = self.exy.adj[:, :, None]
        b = self.exz.adj[:, None, :]
        c = self.eyz.adj[None, :, :]
        return a & b & c

    def triangles(self) -> Iterator[tuple[int, int, int]]:
        """Lazy enumeration of ordered triangles in lexicographic order."""
        rows_xy = self.exy.row_bits()
        rows_xz = self.exz.row_bits()
        rows_yz = self.eyz.row_bits()
        for x in range(self.x_size):
            ybits = rows_xy[x]
            yb = ybits
            while yb:
                low = yb & -yb
                y = low.bit_length() - 1
                zbits = rows_xz[x] & rows_yz[y]
                zb = zbits
                while zb:
                    lz = zb & -zb
                    yield (x, y, lz.bit_length() - 1)
                    zb ^= lz
                yb ^= low

    def sub_instance(self, xs: Sequence[int], ys: Sequence[int], zs: Sequence[int]) -> "Triad":
        return Triad(self.exy.restrict(xs, ys), self.exz.restrict(xs, zs), self.eyz.restrict(ys, zs))

    def densities(self) -> tuple[Fraction, Fraction, Fraction]:
        return (self.exy.density(), self.exz.density(), self.eyz.density())

    def __repr__(self) -> str:
        return f"Triad({self.x_size}x{self.y_size}x{self.z_size})"


class Decomposition:
    """Vertex partition into t blocks plus, per ordered block pair, a partition
    of V_i x V_j into at most `ell` color classes.

    `pair_colors[(i, j)][a, b]` is the color of (blocks[i][a], blocks[j][b]).
    Both orientations (i, j) and (j, i) are stored explicitly.
    """

    __slots__ = ("n", "t", "ell", "blocks", "block_of", "pos_in_block", "_pair_colors", "_present")

    def __init__(self, n: int, blocks: Sequence[Sequence[int]], ell: int, pair_colors: dict):
        self.n = int(n)
        self.t = len(blocks)
        self.ell = int(ell)
        if self.t == 0:
            raise DomainError("empty part: decomposition needs at least one block")
        if self.ell < 1:
            raise DomainError("ell must be at least 1")
        self.blocks = tuple(tuple(int(v) for v in blk) for blk in blocks)
        seen = np.zeros(n, dtype=bool)
        block_of = np.full(n, -1, dtype=np.int32)
        pos = np.full(n, -1, dtype=np.int32)
        for i, blk in enumerate(self.blocks):
            if len(blk) == 0:
                raise DomainError(f"empty part: block {i} is empty")
            for p, v in enumerate(blk):
                if not 0 <= v < n:
                    raise DomainError(f"vertex {v} out of range")
                if seen[v]:
                    raise DomainError(f"vertex {v} appears in two blocks")
                seen[v] = True
                block_of[v] = i
                pos[v] = p
        if not seen.all():
            missing = int(np.flatnonzero(~seen)[0])
            raise DomainError(f"vertex {missing} missing from every block")
        self.block_of = _freeze(block_of)
        self.pos_in_block = _freeze(pos)

        store = {}
        for i in range(self.t):
            for j in range(self.t):
                key = (i, j)
                if key not in pair_colors:
                    raise DomainError(f"missing pair colors for ordered block pair {key}")
                mat = np.ascontiguousarray(pair_colors[key], dtype=np.int16)
                want = (len(self.blocks[i]), len(self.blocks[j]))
                if mat.shape != want:
                    raise DomainError(f"pair colors for {key} have shape {mat.shape}, expected {want}")
                if mat.size and (mat.min() < 0 or mat.max() >= self.ell):
                    raise DomainError(f"pair colors for {key} outside [0, {self.ell})")
                store[key] = _freeze(mat)
        self._pair_colors = store
        self._present = {}

    # ----- constructors -----

    @classmethod
    def trivial(cls, n: int) -> "Decomposition":
        colors = {(0, 0): np.zeros((n, n), dtype=np.int16)}
        return cls(n, [list(range(n))], 1, colors)

    @classmethod
    def symmetric(cls, n: int, blocks: Sequence[Sequence[int]], ell: int, upper: dict) -> "Decomposition":
        """Build from colors given only for i <= j; (j, i) is mirrored by transpose.

        The diagonal matrices upper[(i, i)] must be symmetric.
        """
        t = len(blocks)
        colors = {}
        for i in range(t):
            for j in range(i, t):
                if (i, j) not in upper:
                    raise DomainError(f"missing pair colors for block pair ({i},{j})")
                mat = np.asarray(upper[(i, j)])
                if i == j and not np.array_equal(mat, mat.T):
                    raise DomainError(f"diagonal pair colors for block {i} are not symmetric")
                colors[(i, j)] = mat
                colors[(j, i)] = mat.T
        return cls(n, blocks, ell, colors)

    # ----- accessors -----

    def pair_colors(self, i: int, j: int) -> np.ndarray:
        return self._pair_colors[(i, j)]

    def colors_in(self, i: int, j: int) -> tuple[int, ...]:
        """Colors actually present in the (i, j) pair partition."""
        key = (i, j)
        if key not in self._present:
            self._present[key] = tuple(int(c) for c in np.unique(self._pair_colors[key]))
        return self._present[key]

    def class_matrix(self, i: int, j: int, color: int) -> np.ndarray:
        return self._pair_colors[(i, j)] == color

    def class_bigraph(self, i: int, j: int, color: int) -> Bigraph:
        return Bigraph(self.class_matrix(i, j, color))

    def class_size(self, i: int, j: int, color: int) -> int:
        return int(self.class_matrix(i, j, color).sum())

    def color_of_pair(self, x: int, y: int) -> tuple[int, int, int]:
        """(block of x, block of y, color of the ordered pair (x, y))."""
        i = int(self.block_of[x])
        j = int(self.block_of[y])
        c = int(self._pair_colors[(i, j)][self.pos_in_block[x], self.pos_in_block[y]])
        return i, j, c

    def block_sizes(self) -> tuple[int, ...]:
        return tuple(len(b) for b in self.blocks)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Decomposition):
            return NotImplemented
        return (self.n == other.n and self.ell == other.ell
                and self.blocks == other.blocks
                and all(np.array_equal(self._pair_colors[k], other._pair_colors[k])
                        for k in self._pair_colors))

    def __hash__(self) -> int:
        return hash((self.n, self.ell, self.blocks))

    def __repr__(self) -> str:
        return f"Decomposition(n={self.n}, t={self.t}, ell={self.ell})"


# ----- module-level operations -----


def density_bigraph(G: Bigraph, rows: Sequence[int] | None = None, cols: Sequence[int] | None = None) -> Fraction:
    """Exact edge density of G restricted to (rows, cols)."""
    return G.density(rows, cols)


def triangles(G: Triad, enumerate_: bool = False):
    """Ordered triangle count of a triad; optionally also a lazy enumeration."""
    if enumerate_:
        return G.triangle_count(), G.triangles()
    return G.triangle_count()


def relative_density(H: Trigraph, G: Triad) -> tuple[Fraction, bool]:
    """Density of H inside the ordered triangle set of G.

    Returns (density, vacuous). When K3(G) is empty the density is 0 by
    convention and vacuous is True.
    """
    if H.shape != (G.x_size, G.y_size, G.z_size):
        raise DomainError(f"trigraph shape {H.shape} does not match triad {G.shape}")
    tri = G.triangle_tensor()
    den = int(tri.sum())
    if den == 0:
        return Fraction(0), True
    num = int((H.rel & tri).sum())
    return Fraction(num, den), False


def restrict_trigraph(H: Trigraph, G: Triad) -> Trigraph:
    """Zero out H outside the triangle set of G."""
    if H.shape != (G.x_size, G.y_size, G.z_size):
        raise DomainError(f"trigraph shape {H.shape} does not match triad {G.shape}")
    return Trigraph(H.rel & G.triangle_tensor())


def lift(obj):
    """Ordered version of an unordered object.

    SimpleGraph -> Bigraph (zero diagonal); ThreeGraph -> Trigraph (zero on
    non-injective triples).
    """
    if isinstance(obj, (SimpleGraph, ThreeGraph)):
        return obj.lift()
    raise DomainError(f"cannot lift object of type {type(obj).__name__}")


def sub_instances(G: Triad, xs: Sequence[int], ys: Sequence[int], zs: Sequence[int]) -> Triad:
    """Induced sub-triad on class subsets (xs, ys, zs)."""
    return G.sub_instance(xs, ys, zs)


def arity1_neighborhood(H: Trigraph, x: int) -> frozenset:
    """All (y, z) related to x."""
    if not 0 <= x < H.x_size:
        raise DomainError(f"index {x} out of range for X of size {H.x_size}")
    ys, zs = np.nonzero(H.rel[x])
    return frozenset(zip(ys.tolist(), zs.tolist()))


def arity2_neighborhood(H: Trigraph, x: int, y: int) -> frozenset:
    """All z related to the pair (x, y)."""
    if not 0 <= x < H.x_size:
        raise DomainError(f"index {x} out of range for X of size {H.x_size}")
    if not 0 <= y < H.y_size:
        raise DomainError(f"index {y} out of range for Y of size {H.y_size}")
    return frozenset(np.flatnonzero(H.rel[x, y]).tolist())
