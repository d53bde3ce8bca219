"""Generators: certified quasirandom pair partitions, blowups of bigraphs
along pair colorings, lower-bound instances with their natural
decompositions, merge demonstrations, transversal search, tripartite
completions, and the tower/wowzer growth utilities.

All randomness flows through numpy's PCG64 generator seeded explicitly; the
algorithm identifier and seed are recorded on generated instances so reruns
are bit-exact.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Iterable, Mapping, Sequence

import numpy as np

from .core import Bigraph, Decomposition, ThreeGraph, Trigraph, Triad, relative_density
from .dims import BlowupEmbedding, canonical
from .errors import DomainError, GenerationError, SizeError
from .quasirandom import Dev2Report, dev2

__all__ = [
    "PRNG_ID",
    "BipartiteColoredGraph",
    "ClassCert",
    "CertReport",
    "BlowupInstance",
    "MergeReport",
    "Saturated",
    "quasirandom_pair_partition",
    "blowup",
    "natural_decomposition",
    "lower_bound_instance",
    "merge_colors_demo",
    "find_transversal",
    "tripartite_completion",
    "random_decomposition",
    "ack",
    "tower",
    "wowzer",
]

PRNG_ID = "pcg64"
TRANSVERSAL_MAX_T = 6
TRANSVERSAL_MAX_CLASS = 20
DEFAULT_BIT_LIMIT = 1_000_000


class BipartiteColoredGraph:
    """Total assignment of one color (from an abstract index set 0..r-1) to
    every pair of A x B."""

    def __init__(self, assignment, n_colors: int | None = None):
        arr = np.array(assignment, dtype=np.int16, copy=True)
        if arr.ndim != 2 or arr.size == 0:
            raise DomainError("assignment must be a nonempty 2-d matrix")
        if arr.min() < 0:
            raise DomainError("colors must be nonnegative")
        top = int(arr.max()) + 1
        if n_colors is None:
            n_colors = top
        elif top > n_colors:
            raise DomainError(f"color {top - 1} out of range for {n_colors} colors")
        arr.setflags(write=False)
        self._assignment = arr
        self.n_colors = int(n_colors)

    @property
    def assignment(self) -> np.ndarray:
        return self._assignment

    @property
    def a_size(self) -> int:
        return self._assignment.shape[0]

    @property
    def b_size(self) -> int:
        return self._assignment.shape[1]

    def color_class(self, u: int) -> Bigraph:
        if not 0 <= u < self.n_colors:
            raise DomainError(f"color {u} out of range")
        return Bigraph(self._assignment == u)

    def class_sizes(self) -> tuple[int, ...]:
        return tuple(int((self._assignment == u).sum()) for u in range(self.n_colors))

    def __eq__(self, other) -> bool:
        if not isinstance(other, BipartiteColoredGraph):
            return NotImplemented
        return (self.n_colors == other.n_colors
                and self._assignment.shape == other._assignment.shape
                and bool((self._assignment == other._assignment).all()))

    def __hash__(self) -> int:
        return hash((self._assignment.shape, self.n_colors, self._assignment.tobytes()))

    def __repr__(self) -> str:
        return f"BipartiteColoredGraph({self.a_size}x{self.b_size}, colors={self.n_colors})"


@dataclass(frozen=True)
class ClassCert:
    """Per-color certification: quadruple-deviation sum and density window."""

    color: int
    size: int
    density: float
    normalized_sum: float
    dev_ok: bool
    density_ok: bool

    @property
    def passed(self) -> bool:
        return self.dev_ok and self.density_ok


@dataclass(frozen=True)
class CertReport:
    target_dev: float
    density_window: float
    attempts: int
    seed: int
    classes: tuple[ClassCert, ...]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.classes)


def _certify(gamma: BipartiteColoredGraph, target_dev: float,
             attempts: int, seed: int) -> CertReport:
    window = target_dev ** 0.25
    certs = []
    for u in range(gamma.n_colors):
        B = gamma.color_class(u)
        rep = dev2(B)
        d = float(rep.density)
        certs.append(ClassCert(
            color=u,
            size=int(B.adj.sum()),
            density=d,
            normalized_sum=rep.normalized_sum,
            dev_ok=rep.normalized_sum <= target_dev,
            density_ok=abs(d - 1.0 / gamma.n_colors) <= window,
        ))
    return CertReport(target_dev, window, attempts, seed, tuple(certs))


def quasirandom_pair_partition(
    a_size: int,
    b_size: int,
    ell: int,
    target_dev: float,
    seed: int,
    max_retries: int = 8,
) -> tuple[BipartiteColoredGraph, CertReport]:
    """Balanced random coloring of the pair product, certified class by class.

    The colors are dealt as a shuffled near-balanced multiset, so class sizes
    differ by at most one cell and densities sit essentially exactly at
    1/ell; the certification then only has to reject draws whose normalized
    quadruple-deviation sum exceeds target_dev (the density window
    1/ell +- target_dev^(1/4) is checked as well but is loose by
    comparison).  Retries draw from seeds seed, seed+1, ...; exhausting them
    raises a generation error carrying the best attempt's report.
    """
    if ell < 1:
        raise DomainError("ell must be at least 1")
    if min(a_size, b_size) < ell:
        raise DomainError(f"sides must be at least ell = {ell}")
    cells = a_size * b_size
    best: tuple[BipartiteColoredGraph, CertReport] | None = None
    for attempt in range(max_retries + 1):
        rng = np.random.default_rng(seed + attempt)
        deck = np.repeat(np.arange(ell, dtype=np.int16), cells // ell)
        if deck.size < cells:
            lucky = rng.choice(ell, size=cells - deck.size, replace=False)
            deck = np.concatenate([deck, lucky.astype(np.int16)])
        rng.shuffle(deck)
        gamma = BipartiteColoredGraph(deck.reshape(a_size, b_size), n_colors=ell)
        report = _certify(gamma, target_dev, attempt + 1, seed + attempt)
        if report.passed:
            return gamma, report
        if best is None or (sum(c.passed for c in report.classes)
                            > sum(c.passed for c in best[1].classes)):
            best = (gamma, report)
    raise GenerationError(
        f"no certified {ell}-coloring of {a_size}x{b_size} at target_dev={target_dev} "
        f"after {max_retries + 1} attempts",
        best_report=best[1] if best else None,
    )


def _fill_noncrossing(side: np.ndarray, fill, edges: list) -> None:
    """Append non-crossing triples per the fill policy.

    side[v] in {0 (A), 1 (B), 2 (C)}; a triple is crossing when it has one
    vertex on each side, C classes not distinguished.
    """
    if fill == "empty":
        return
    if isinstance(fill, tuple) and len(fill) == 3 and fill[0] == "random":
        _, p, fseed = fill
        if not 0 <= p <= 1:
            raise DomainError("fill probability must lie in [0, 1]")
        rng = np.random.default_rng(fseed)
        n = len(side)
        for trip in combinations(range(n), 3):
            s = {side[trip[0]], side[trip[1]], side[trip[2]]}
            if s == {0, 1, 2}:
                continue
            if rng.random() < p:
                edges.append(trip)
        return
    raise DomainError(f"unknown fill policy {fill!r}")


@dataclass(frozen=True)
class BlowupInstance:
    """3-graph on A | B | C_0..C_{v-1} whose crossing triples follow the base
    bigraph through the pair coloring: {x, y, z} with z in class v is an edge
    iff (color(x, y), v) is a base edge."""

    base: Bigraph
    gamma: BipartiteColoredGraph
    n_per_class: int
    graph: ThreeGraph
    natural: Decomposition
    fill: object
    certification: CertReport | None
    metadata: tuple[tuple[str, object], ...] = ()

    @property
    def a_size(self) -> int:
        return self.gamma.a_size

    @property
    def b_size(self) -> int:
        return self.gamma.b_size

    def class_vertices(self, v: int) -> tuple[int, ...]:
        off = self.a_size + self.b_size + v * self.n_per_class
        return tuple(range(off, off + self.n_per_class))

    def identity_embedding(self) -> BlowupEmbedding:
        return BlowupEmbedding(
            tuple(range(self.a_size)),
            tuple(range(self.a_size, self.a_size + self.b_size)),
            tuple(self.class_vertices(v) for v in range(self.base.v_size)),
        )


def natural_decomposition(base: Bigraph, gamma: BipartiteColoredGraph,
                          n_per_class: int) -> Decomposition:
    """The witness decomposition of a blowup: blocks A, B, C_0.., the pair
    coloring's classes on (A, B) (mirrored on (B, A)), and a single complete
    color on every other block pair."""
    a, b = gamma.a_size, gamma.b_size
    t = 2 + base.v_size
    blocks = [list(range(a)), list(range(a, a + b))]
    off = a + b
    for v in range(base.v_size):
        blocks.append(list(range(off + v * n_per_class, off + (v + 1) * n_per_class)))
    ell = max(gamma.n_colors, 1)
    pair_colors = {}
    for i in range(t):
        for j in range(t):
            if (i, j) == (0, 1):
                pair_colors[(i, j)] = gamma.assignment
            elif (i, j) == (1, 0):
                pair_colors[(i, j)] = gamma.assignment.T
            else:
                pair_colors[(i, j)] = np.zeros((len(blocks[i]), len(blocks[j])), dtype=np.int16)
    return Decomposition(off + base.v_size * n_per_class, blocks, ell, pair_colors)


def blowup(base: Bigraph, gamma: BipartiteColoredGraph, n_per_class: int,
           fill="empty", certification: CertReport | None = None,
           metadata: Iterable[tuple[str, object]] = ()) -> BlowupInstance:
    """Blow the base bigraph up along a pair coloring.

    Crossing triples are forced by the base; everything else follows the fill
    policy ("empty", or ("random", p, seed)).
    """
    if gamma.n_colors != base.u_size:
        raise DomainError(
            f"pair coloring has {gamma.n_colors} colors but the base has {base.u_size} rows")
    if gamma.a_size != gamma.b_size:
        raise DomainError("pair coloring sides must match")
    if n_per_class < 1:
        raise DomainError("n_per_class must be at least 1")
    a, b = gamma.a_size, gamma.b_size
    off = a + b
    n_total = off + base.v_size * n_per_class
    assign = gamma.assignment
    edges: list[tuple[int, int, int]] = []
    for v in range(base.v_size):
        xs, ys = np.nonzero(base.adj[assign, v])
        pairs = list(zip(xs.tolist(), ys.tolist()))
        for z in range(n_per_class):
            zv = off + v * n_per_class + z
            for x, y in pairs:
                edges.append((x, a + y, zv))
    side = np.concatenate([np.zeros(a, dtype=np.int8),
                           np.ones(b, dtype=np.int8),
                           np.full(base.v_size * n_per_class, 2, dtype=np.int8)])
    _fill_noncrossing(side, fill, edges)
    graph = ThreeGraph(n_total, edges)
    natural = natural_decomposition(base, gamma, n_per_class)
    return BlowupInstance(base, gamma, n_per_class, graph, natural, fill,
                          certification, tuple(metadata))


def lower_bound_instance(kind: str, size: int, n: int, seed: int,
                         target_dev: float = 0.005, max_retries: int = 8,
                         fill="empty") -> BlowupInstance:
    """Blowup of a canonical base with a certified quasirandom pair coloring.

    kind in {"M", "H", "Mbar"} uses the k = size canonical pattern with size
    colors at density 1/size; kind "Ubg" uses the subset pattern with 2^size
    colors at density 2^(-size).  Blocks A, B and every class C_v all have n
    vertices.
    """
    base = canonical(kind, size)
    gamma, report = quasirandom_pair_partition(n, n, base.u_size, target_dev,
                                               seed, max_retries)
    meta = (("kind", kind), ("size", size), ("n", n), ("seed", seed),
            ("target_dev", target_dev), ("prng", PRNG_ID))
    return blowup(base, gamma, n, fill=fill, certification=report, metadata=meta)


@dataclass(frozen=True)
class MergeReport:
    """Density of the merged-color triad (A, B, C_v; P_u | P_u', complete,
    complete) for a base vertex v distinguishing the two colors.  A density
    near 1/2 shows the merged class is not homogeneous."""

    u: int
    u_prime: int
    v: int
    k3: int
    density: Fraction
    merged_size: int
    matched_size: int

    def homogeneous(self, mu: float) -> bool:
        return self.density < mu or self.density > 1 - mu


def merge_colors_demo(inst: BlowupInstance, u: int, u_prime: int,
                      v: int | None = None) -> MergeReport:
    """Measure the triad obtained by merging two pair-coloring colors against
    a class C_v whose base column distinguishes them."""
    base = inst.base
    if u == u_prime:
        raise DomainError("colors must differ")
    for c in (u, u_prime):
        if not 0 <= c < base.u_size:
            raise DomainError(f"color {c} out of range")
    if v is None:
        cands = [w for w in range(base.v_size)
                 if base.has_edge(u, w) != base.has_edge(u_prime, w)]
        if not cands:
            raise DomainError(f"colors {u} and {u_prime} are not distinguished by any base column")
        v = cands[0]
    elif base.has_edge(u, v) == base.has_edge(u_prime, v):
        raise DomainError(f"base column {v} does not distinguish colors {u} and {u_prime}")

    assign = inst.gamma.assignment
    union = Bigraph((assign == u) | (assign == u_prime))
    triad = Triad(union,
                  Bigraph.complete(inst.a_size, inst.n_per_class),
                  Bigraph.complete(inst.b_size, inst.n_per_class))
    cvs = list(inst.class_vertices(v))
    local = inst.graph.tensor()[np.ix_(list(range(inst.a_size)),
                                       list(range(inst.a_size, inst.a_size + inst.b_size)),
                                       cvs)]
    density, vacuous = relative_density(Trigraph(local), triad)
    if vacuous:
        raise DomainError("merged triad has no triangles")
    matched = u if inst.base.has_edge(u, v) else u_prime
    return MergeReport(u, u_prime, v, triad.triangle_count(), density,
                       int(union.adj.sum()), int((assign == matched).sum()))


def find_transversal(
    classes: Sequence[Sequence[int]],
    bigraphs: Mapping[tuple[int, int], Bigraph],
    H: ThreeGraph,
    F: ThreeGraph,
) -> tuple[int, ...] | None:
    """Tuple (v_1..v_t), one vertex per class, realizing all pair bigraphs
    and inducing the pattern F exactly: (v_i, v_j, v_k) is an H-edge iff
    {i, j, k} is an F-edge.  Exhaustive backtracking at t <= 6, classes <= 20.
    """
    t = len(classes)
    if t > TRANSVERSAL_MAX_T:
        raise SizeError(f"transversal search supports t <= {TRANSVERSAL_MAX_T}, got {t}")
    if any(len(c) > TRANSVERSAL_MAX_CLASS for c in classes):
        raise SizeError(f"transversal search supports classes <= {TRANSVERSAL_MAX_CLASS}")
    if F.n != t:
        raise DomainError(f"pattern has {F.n} vertices, expected {t}")
    for i in range(t):
        for j in range(i + 1, t):
            if (i, j) not in bigraphs:
                raise DomainError(f"missing pair bigraph for classes ({i}, {j})")
            B = bigraphs[(i, j)]
            if B.shape != (len(classes[i]), len(classes[j])):
                raise DomainError(f"pair bigraph ({i}, {j}) has shape {B.shape}, "
                                  f"expected {(len(classes[i]), len(classes[j]))}")

    pos = [-1] * t

    def rec(i: int):
        if i == t:
            return tuple(classes[j][pos[j]] for j in range(t))
        for p, vert in enumerate(classes[i]):
            if any(not bigraphs[(j, i)].has_edge(pos[j], p) for j in range(i)):
                continue
            ok = True
            for j in range(i):
                for k in range(j + 1, i):
                    want = F.has_edge(j, k, i)
                    have = H.has_edge(classes[j][pos[j]], classes[k][pos[k]], vert)
                    if want != have:
                        ok = False
                        break
                if not ok:
                    break
            if not ok:
                continue
            pos[i] = p
            got = rec(i + 1)
            if got is not None:
                return got
            pos[i] = -1
        return None

    return rec(0)


def tripartite_completion(a_size: int, b_size: int, c_size: int,
                          edges: Iterable[tuple[int, int, int]],
                          fill="empty") -> ThreeGraph:
    """3-graph on A | B | C whose crossing edge set is exactly `edges`
    (global vertex ids, one per side); non-crossing triples per fill policy."""
    n = a_size + b_size + c_size
    side = np.concatenate([np.zeros(a_size, dtype=np.int8),
                           np.ones(b_size, dtype=np.int8),
                           np.full(c_size, 2, dtype=np.int8)])
    out: list[tuple[int, int, int]] = []
    for e in edges:
        trip = tuple(sorted(e))
        if len(set(trip)) != 3 or not all(0 <= v < n for v in trip):
            raise DomainError(f"invalid triple {e!r}")
        if {int(side[trip[0]]), int(side[trip[1]]), int(side[trip[2]])} != {0, 1, 2}:
            raise DomainError(f"triple {e!r} is not crossing")
        out.append(trip)
    _fill_noncrossing(side, fill, out)
    return ThreeGraph(n, out)


def random_decomposition(n: int, t: int, ell: int, seed: int) -> Decomposition:
    """Near-equitable random decomposition: a shuffled vertex split into t
    blocks of size within one, and uniform random symmetric pair colorings."""
    if not 1 <= t <= n:
        raise DomainError("need 1 <= t <= n")
    if ell < 1:
        raise DomainError("ell must be at least 1")
    rng = np.random.default_rng(seed)
    perm = rng.permutation(n)
    base, extra = divmod(n, t)
    blocks = []
    pos = 0
    for i in range(t):
        size = base + (1 if i < extra else 0)
        blocks.append(sorted(int(v) for v in perm[pos:pos + size]))
        pos += size
    pair_colors = {}
    for i in range(t):
        si = len(blocks[i])
        diag = rng.integers(0, ell, size=(si, si))
        pair_colors[(i, i)] = np.triu(diag) + np.triu(diag, 1).T
        for j in range(i + 1, t):
            m = rng.integers(0, ell, size=(si, len(blocks[j])))
            pair_colors[(i, j)] = m
            pair_colors[(j, i)] = m.T
    return Decomposition(n, blocks, ell, pair_colors)


@dataclass(frozen=True)
class Saturated:
    """Symbolic marker for values past the bit limit: the level and argument
    where the guard tripped, and how many recursion frames it propagated
    through."""

    k: int
    x: object
    depth: int
    bit_limit: int

    def __repr__(self) -> str:
        xs = str(self.x) if isinstance(self.x, int) and self.x.bit_length() <= 64 else "<large>"
        return f"Saturated(k={self.k}, x={xs}, depth={self.depth}, bit_limit={self.bit_limit})"


def ack(k: int, x: int, bit_limit: int = DEFAULT_BIT_LIMIT):
    """Level-k member of the hierarchy: level 1 doubles exponentially
    (2^x), every level starts at 1, and level k at x iterates level k-1 on
    the previous value.  Values whose binary size would exceed bit_limit come
    back as Saturated markers.

    Note the base case makes levels 3 and above constant 1 (level 2 of 1 is
    already 1), which the definitions force verbatim.
    """
    if k < 1:
        raise DomainError("k must be at least 1")
    if not isinstance(x, int) or isinstance(x, bool) or x < 1:
        raise DomainError("x must be an integer >= 1")
    if k == 1:
        if x > bit_limit:
            return Saturated(1, x, 0, bit_limit)
        return 1 << x
    val: object = 1
    for _ in range(2, x + 1):
        nxt = ack(k - 1, val, bit_limit)
        if isinstance(nxt, Saturated):
            return Saturated(k, x, nxt.depth + 1, bit_limit)
        if nxt == val:
            break  # fixed point: every further iteration repeats it
        val = nxt
    return val


def tower(x: int, bit_limit: int = DEFAULT_BIT_LIMIT):
    """Iterated exponential: 1, 2, 4, 16, 65536, ..."""
    return ack(2, x, bit_limit)


def wowzer(x: int, bit_limit: int = DEFAULT_BIT_LIMIT, convention: str = "def"):
    """Iterated tower.

    convention="def" follows the recurrence with base 1 verbatim: the base
    case W(1) = 1 pins every later value to 1 because the tower of 1 is 1.
    convention="ack3" uses hierarchy level 3, which degenerates to 1 the same
    way.  Both are provided because the two sources disagree on the base
    case; neither produces the colloquial wowzer growth.
    """
    if convention == "def":
        if not isinstance(x, int) or isinstance(x, bool) or x < 1:
            raise DomainError("x must be an integer >= 1")
        val: object = 1
        for _ in range(2, x + 1):
            nxt = tower(val, bit_limit)
            if isinstance(nxt, Saturated) or nxt == val:
                return nxt if isinstance(nxt, Saturated) else val
            val = nxt
        return val
    if convention == "ack3":
        return ack(3, x, bit_limit)
    raise DomainError(f"unknown wowzer convention {convention!r}")
