"""Dimension-style invariants: VC2 witnesses, similarity quotients, canonical
bigraph patterns, induced-copy search, and blowup verification.

The VC2 search follows the trace-set method: for a fixed choice of row and
column tuples (a_1..a_k, b_1..b_k), every remaining vertex c induces the trace
S_c = {(i, j) : {a_i, b_j, c} is an edge}; a witness exists iff all 2^(k^2)
subsets occur as traces.  Witness triples must have three distinct vertices,
so the a's, b's and c's are pairwise distinct and the two sides are disjoint.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations, permutations
from typing import Iterable, Sequence

import numpy as np

from .core import Bigraph, ThreeGraph
from .errors import DomainError, SizeError

__all__ = [
    "Vc2Witness",
    "Vc2Result",
    "SearchOutcome",
    "Embedding",
    "QuotientResult",
    "BlowupEmbedding",
    "GDimCheck",
    "vc2_at_least",
    "vc2",
    "sim_quotient",
    "is_irreducible",
    "canonical",
    "find_induced",
    "find_canonical",
    "g_dimension_check",
    "irr_members",
]

EXHAUSTIVE_VC2_MAX_K = 2
CANONICAL_UBG_MAX_K = 20
EXHAUSTIVE_PATTERN_MAX_SIDE = 8
GDIM_SEARCH_MAX_VERTICES = 15
IRR_ENUM_MAX_U = 4


@dataclass(frozen=True)
class Vc2Witness:
    """Shattering witness: rows a, columns b, and one vertex per subset of
    [k] x [k] (keyed by frozensets of 0-based index pairs)."""

    a: tuple[int, ...]
    b: tuple[int, ...]
    c: dict

    @property
    def k(self) -> int:
        return len(self.a)

    def validate(self, H: ThreeGraph) -> bool:
        k = self.k
        if len(self.b) != k or len(self.c) != 2 ** (k * k):
            return False
        used = set(self.a) | set(self.b)
        if len(used) != 2 * k:
            return False
        for S, cv in self.c.items():
            if cv in used:
                return False
            for i in range(k):
                for j in range(k):
                    if H.has_edge(self.a[i], self.b[j], cv) != ((i, j) in S):
                        return False
        return True


@dataclass(frozen=True)
class SearchOutcome:
    """Result of a witness search; `definitive` marks exhaustive verdicts."""

    witness: object = None
    definitive: bool = False
    trials: int = 0

    @property
    def found(self) -> bool:
        return self.witness is not None


def _pair_trace_masks(H: ThreeGraph) -> dict:
    masks: dict[tuple[int, int], int] = {}
    for a, b, c in H.edges:
        for x, y, z in ((a, b, c), (a, c, b), (b, c, a)):
            key = (x, y)
            masks[key] = masks.get(key, 0) | (1 << z)
    return masks


def _traces_for(masks: dict, a: Sequence[int], b: Sequence[int], n: int):
    """Yield (vertex, trace bitmask over [k]x[k]) for every eligible c."""
    k = len(a)
    pair_bits = []
    for i in range(k):
        for j in range(k):
            key = (min(a[i], b[j]), max(a[i], b[j]))
            pair_bits.append(masks.get(key, 0))
    banned = 0
    for v in a:
        banned |= 1 << v
    for v in b:
        banned |= 1 << v
    for cv in range(n):
        if (banned >> cv) & 1:
            continue
        trace = 0
        bit = 1 << cv
        for idx, pb in enumerate(pair_bits):
            if pb & bit:
                trace |= 1 << idx
        yield cv, trace


def _witness_from_traces(a, b, trace_map, k) -> Vc2Witness:
    cmap = {}
    for t_bits, cv in trace_map.items():
        S = frozenset((idx // k, idx % k) for idx in range(k * k) if (t_bits >> idx) & 1)
        cmap[S] = cv
    return Vc2Witness(tuple(a), tuple(b), cmap)


def vc2_at_least(
    H: ThreeGraph,
    k: int,
    mode: str = "exhaustive",
    trials: int = 2000,
    seed: int | None = None,
    pools: tuple[Sequence[int], Sequence[int]] | None = None,
) -> SearchOutcome:
    """Search for a VC2 witness of order k.

    Exhaustive mode (k <= 2) is definitive.  Random mode samples row/column
    tuples (optionally from the given candidate pools) and is definitive only
    on success.  Regardless of mode, n < 2k + 2^(k^2) rules a witness out by
    counting, which is reported as a definitive absence.
    """
    if k < 1:
        raise DomainError("k must be at least 1")
    need = 2 * k + 2 ** (k * k)
    if H.n < need:
        return SearchOutcome(None, definitive=True)
    masks = _pair_trace_masks(H)
    full = 2 ** (k * k)

    if mode == "exhaustive":
        if k > EXHAUSTIVE_VC2_MAX_K:
            raise SizeError(f"exhaustive VC2 search supports k <= {EXHAUSTIVE_VC2_MAX_K}, got {k}")
        verts = range(H.n)
        for a in combinations(verts, k):
            rest = [v for v in verts if v not in a]
            for b in combinations(rest, k):
                trace_map: dict[int, int] = {}
                for cv, tr in _traces_for(masks, a, b, H.n):
                    if tr not in trace_map:
                        trace_map[tr] = cv
                        if len(trace_map) == full:
                            return SearchOutcome(_witness_from_traces(a, b, trace_map, k),
                                                 definitive=True)
        return SearchOutcome(None, definitive=True)

    if mode == "random":
        if seed is None:
            raise DomainError("random mode requires an explicit seed")
        rng = np.random.default_rng(seed)
        a_pool = list(pools[0]) if pools else list(range(H.n))
        b_pool = list(pools[1]) if pools else list(range(H.n))
        for trial in range(trials):
            a = tuple(int(v) for v in rng.choice(a_pool, size=k, replace=False))
            b_cand = [v for v in b_pool if v not in a]
            if len(b_cand) < k:
                continue
            b = tuple(int(v) for v in rng.choice(b_cand, size=k, replace=False))
            trace_map: dict[int, int] = {}
            for cv, tr in _traces_for(masks, a, b, H.n):
                if tr not in trace_map:
                    trace_map[tr] = cv
            if len(trace_map) == full:
                return SearchOutcome(_witness_from_traces(a, b, trace_map, k),
                                     definitive=True, trials=trial + 1)
        return SearchOutcome(None, definitive=False, trials=trials)

    raise DomainError(f"unknown VC2 search mode {mode!r}")


@dataclass(frozen=True)
class Vc2Result:
    value: int
    exact: bool
    witness: Vc2Witness | None


def vc2(H: ThreeGraph, cap: int, mode: str = "exhaustive",
        trials: int = 2000, seed: int | None = None) -> Vc2Result:
    """Largest witnessed k up to cap.

    The result is tagged exact only when k+1 was ruled out definitively
    (exhaustively, or by the counting bound n < 2k + 2^(k^2)).
    """
    if cap < 0:
        raise DomainError("cap must be nonnegative")
    best: Vc2Witness | None = None
    value = 0
    for k in range(1, cap + 1):
        use_mode = mode if (mode == "random" and H.n >= 2 * k + 2 ** (k * k)
                            and k > EXHAUSTIVE_VC2_MAX_K) else mode
        if mode == "exhaustive" and k > EXHAUSTIVE_VC2_MAX_K and H.n >= 2 * k + 2 ** (k * k):
            raise SizeError(f"exhaustive VC2 search supports k <= {EXHAUSTIVE_VC2_MAX_K}, got {k}")
        out = vc2_at_least(H, k, mode=use_mode, trials=trials,
                           seed=None if seed is None else seed + k)
        if out.found:
            best = out.witness
            value = k
        else:
            return Vc2Result(value, out.definitive, best)
    # witnessed all the way to cap; check whether cap+1 is ruled out by counting
    k1 = cap + 1
    if H.n < 2 * k1 + 2 ** (k1 * k1):
        return Vc2Result(value, True, best)
    if k1 <= EXHAUSTIVE_VC2_MAX_K:
        out = vc2_at_least(H, k1, mode="exhaustive")
        if out.found:
            # cap under-reports; still report cap but mark inexact
            return Vc2Result(value, False, best)
        return Vc2Result(value, True, best)
    return Vc2Result(value, False, best)


@dataclass(frozen=True)
class QuotientResult:
    quotient: Bigraph
    row_classes: tuple[tuple[int, ...], ...]
    col_classes: tuple[tuple[int, ...], ...]
    row_map: tuple[int, ...]
    col_map: tuple[int, ...]


def _group_first_seen(patterns: Iterable[bytes]) -> tuple[list[list[int]], list[int]]:
    classes: list[list[int]] = []
    index: dict[bytes, int] = {}
    mapping: list[int] = []
    for i, p in enumerate(patterns):
        if p not in index:
            index[p] = len(classes)
            classes.append([])
        ci = index[p]
        classes[ci].append(i)
        mapping.append(ci)
    return classes, mapping


def sim_quotient(G: Bigraph) -> QuotientResult:
    """Collapse identical rows, then identical columns of the row-reduced
    matrix.  One pass each suffices: merging columns that agree on all row
    representatives cannot make two distinct representative rows equal.
    The quotient is irreducible and the operation is idempotent (classes are
    ordered by first occurrence, so an irreducible input maps to itself)."""
    adj = G.adj
    row_classes, row_map = _group_first_seen(bytes(r) for r in adj.astype(np.uint8))
    row_reps = [cls[0] for cls in row_classes]
    reduced = adj[row_reps, :]
    col_classes, col_map = _group_first_seen(bytes(c) for c in reduced.T.astype(np.uint8))
    col_reps = [cls[0] for cls in col_classes]
    quotient = Bigraph(reduced[:, col_reps])
    return QuotientResult(
        quotient,
        tuple(tuple(c) for c in row_classes),
        tuple(tuple(c) for c in col_classes),
        tuple(row_map),
        tuple(col_map),
    )


def is_irreducible(G: Bigraph) -> bool:
    """Rows pairwise distinct and columns pairwise distinct."""
    adj = G.adj.astype(np.uint8)
    rows = {bytes(r) for r in adj}
    if len(rows) != G.u_size:
        return False
    cols = {bytes(c) for c in adj.T}
    return len(cols) == G.v_size


def canonical(kind: str, k: int) -> Bigraph:
    """Canonical irreducible patterns.

    H(k): k x k with edges at (i, j) for i <= j (half-graph).
    M(k): k x k identity matching.
    Mbar(k): complement of M(k).
    Ubg(k): 2^k x k, row S (subsets of [k] in bitmask order) joined to the
    columns it contains.
    """
    if k < 1:
        raise DomainError("k must be at least 1")
    if kind == "H":
        idx = np.arange(k)
        return Bigraph(idx[:, None] <= idx[None, :])
    if kind == "M":
        return Bigraph(np.eye(k, dtype=bool))
    if kind == "Mbar":
        return Bigraph(~np.eye(k, dtype=bool))
    if kind == "Ubg":
        if k > CANONICAL_UBG_MAX_K:
            raise SizeError(f"Ubg supports k <= {CANONICAL_UBG_MAX_K}, got {k}")
        rows = np.arange(1 << k)
        return Bigraph(((rows[:, None] >> np.arange(k)) & 1).astype(bool))
    raise DomainError(f"unknown canonical pattern {kind!r}")


@dataclass(frozen=True)
class Embedding:
    """Injective side-respecting maps of a pattern bigraph into a host."""

    row_map: tuple[int, ...]
    col_map: tuple[int, ...]

    def validate(self, host: Bigraph, pattern: Bigraph, induced: bool = True) -> bool:
        if len(set(self.row_map)) != len(self.row_map) or len(set(self.col_map)) != len(self.col_map):
            return False
        for i, r in enumerate(self.row_map):
            for j, c in enumerate(self.col_map):
                have = host.has_edge(r, c)
                want = pattern.has_edge(i, j)
                if induced and have != want:
                    return False
                if not induced and want and not have:
                    return False
        return True


def _mask_from(indices: Iterable[int]) -> int:
    m = 0
    for i in indices:
        m |= 1 << int(i)
    return m


def _bits(mask: int):
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def _match_bigraph(host: Bigraph, pattern: Bigraph, colors=None, budget: int | None = None):
    """Backtracking search for an induced copy of `pattern` in `host`.

    With colors=None an induced copy matches edges to edges and non-edges to
    non-edges.  Otherwise colors = (want_matrix, cell_classes) generalizes to
    color-constrained matching (used for 0/1-colored copies with a forbidden
    color): want_matrix[i][j] gives, for each host cell value class, whether
    it is acceptable.  Returns (embedding | None, definitive, nodes).
    """
    pu, pv = pattern.shape
    hu, hv = host.shape
    if pu > hu or pv > hv:
        return None, True, 0

    # candidate masks per pattern vertex
    row_cand = [(1 << hu) - 1 for _ in range(pu)]
    col_cand = [(1 << hv) - 1 for _ in range(pv)]
    host_rows = host.row_bits()    # bits over host columns
    host_cols = host.col_bits()    # bits over host rows
    full_cols = (1 << hv) - 1
    full_rows = (1 << hu) - 1

    order = []
    ri, ci = 0, 0
    while ri < pu or ci < pv:
        if ri < pu:
            order.append(("r", ri)); ri += 1
        if ci < pv:
            order.append(("c", ci)); ci += 1

    row_assign = [-1] * pu
    col_assign = [-1] * pv
    nodes = 0

    def feasible(side, idx, h):
        if side == "r":
            for j in range(pv):
                if col_assign[j] >= 0:
                    want = pattern.has_edge(idx, j)
                    have = bool((host_rows[h] >> col_assign[j]) & 1)
                    if want != have:
                        return False
        else:
            for i in range(pu):
                if row_assign[i] >= 0:
                    want = pattern.has_edge(i, idx)
                    have = bool((host_cols[h] >> row_assign[i]) & 1)
                    if want != have:
                        return False
        return True

    used_rows = 0
    used_cols = 0

    def rec(pos):
        nonlocal nodes, used_rows, used_cols
        if pos == len(order):
            return Embedding(tuple(row_assign), tuple(col_assign))
        if budget is not None and nodes > budget:
            raise _BudgetExhausted
        side, idx = order[pos]
        if side == "r":
            cand = row_cand[idx] & ~used_rows
            for h in _bits(cand):
                nodes += 1
                if not feasible("r", idx, h):
                    continue
                row_assign[idx] = h
                used_rows |= 1 << h
                got = rec(pos + 1)
                if got is not None:
                    return got
                row_assign[idx] = -1
                used_rows &= ~(1 << h)
        else:
            cand = col_cand[idx] & ~used_cols
            for h in _bits(cand):
                nodes += 1
                if not feasible("c", idx, h):
                    continue
                col_assign[idx] = h
                used_cols |= 1 << h
                got = rec(pos + 1)
                if got is not None:
                    return got
                col_assign[idx] = -1
                used_cols &= ~(1 << h)
        return None

    try:
        emb = rec(0)
    except _BudgetExhausted:
        return None, False, nodes
    return emb, True, nodes


class _BudgetExhausted(Exception):
    pass


def find_induced(host: Bigraph, pattern: Bigraph, budget: int | None = None):
    """Induced copy of `pattern` in `host` (exact on edges and non-edges).

    Returns a SearchOutcome; exhaustive (budget=None) requires pattern sides
    at most 8 and gives a definitive verdict.
    """
    pu, pv = pattern.shape
    if budget is None and max(pu, pv) > EXHAUSTIVE_PATTERN_MAX_SIDE:
        raise SizeError(
            f"exhaustive induced search supports pattern sides <= {EXHAUSTIVE_PATTERN_MAX_SIDE}, "
            f"got {pattern.shape}")
    emb, definitive, nodes = _match_bigraph(host, pattern, budget=budget)
    return SearchOutcome(emb, definitive=definitive, trials=nodes)


def find_canonical(G: Bigraph, k: int, budget: int | None = None):
    """First of H(k), M(k), Mbar(k) with an induced copy in G, or None.

    The host must be irreducible (quotient first if it is not).
    """
    if not is_irreducible(G):
        raise DomainError("host bigraph is reducible; apply sim_quotient first")
    for kind in ("H", "M", "Mbar"):
        out = find_induced(G, canonical(kind, k), budget=budget)
        if out.found:
            return kind, out.witness
    return None


def irr_members(u_size: int) -> list[Bigraph]:
    """All irreducible bigraphs with |U| = u_size, up to row/column relabeling.

    Columns are subsets of U, so |V| <= 2^u and the family is finite; kept
    desk-scale by requiring u_size <= 4.
    """
    if u_size < 1:
        raise DomainError("u_size must be at least 1")
    if u_size > IRR_ENUM_MAX_U:
        raise SizeError(f"Irr enumeration supports u <= {IRR_ENUM_MAX_U}, got {u_size}")
    n_patterns = 1 << u_size
    perms = list(permutations(range(u_size)))
    seen = set()
    out = []
    for col_set in range(1, 1 << n_patterns):
        cols = [p for p in range(n_patterns) if (col_set >> p) & 1]
        mat = np.array([[(p >> r) & 1 for p in cols] for r in range(u_size)], dtype=bool)
        if len({bytes(r) for r in mat.astype(np.uint8)}) != u_size:
            continue
        best = None
        for perm in perms:
            projected = tuple(sorted(sum(((p >> perm[r]) & 1) << r for r in range(u_size))
                                     for p in cols))
            if best is None or projected < best:
                best = projected
        if best in seen:
            continue
        seen.add(best)
        out.append(Bigraph(mat))
    return out


@dataclass(frozen=True)
class BlowupEmbedding:
    """Vertex roles of a blowup inside a 3-graph: positions of the two pair
    classes and one class per base column vertex."""

    a_vertices: tuple[int, ...]
    b_vertices: tuple[int, ...]
    c_classes: tuple[tuple[int, ...], ...]


@dataclass(frozen=True)
class GDimCheck:
    ok: bool
    violation: tuple | None = None    # ((x, y, z), class v, expected bool)
    embedding: BlowupEmbedding | None = None


def _check_embedding(H: ThreeGraph, base: Bigraph, gamma, emb: BlowupEmbedding) -> GDimCheck:
    assign = np.asarray(gamma.assignment)
    A = list(emb.a_vertices)
    B = list(emb.b_vertices)
    if len(A) != gamma.a_size or len(B) != gamma.b_size:
        raise DomainError("embedding sizes do not match the pair coloring")
    if len(emb.c_classes) != base.v_size:
        raise DomainError(f"embedding must provide {base.v_size} classes")
    tensor = H.tensor()
    for v, cls in enumerate(emb.c_classes):
        if len(cls) == 0:
            raise DomainError(f"empty part: class {v} of the embedding")
        allowed = base.adj[assign, v]                     # a x b bools
        actual = tensor[np.ix_(A, B, list(cls))]
        diff = actual != allowed[:, :, None]
        if diff.any():
            xi, yi, zi = map(int, np.argwhere(diff)[0])
            trip = (A[xi], B[yi], list(cls)[zi])
            return GDimCheck(False, (trip, v, bool(allowed[xi, yi])), emb)
    return GDimCheck(True, None, emb)


def g_dimension_check(
    H: ThreeGraph,
    base: Bigraph,
    n_per_class: int,
    gamma,
    embedding: BlowupEmbedding | None = None,
) -> GDimCheck:
    """Verify that H is a blowup of `base` along the pair coloring `gamma`.

    The containment condition constrains exactly the crossing triples: for
    x in A, y in B, z in the class of base-column v, {x,y,z} is an edge iff
    (gamma color of (x,y), v) is an edge of the base.  With an embedding given
    the check is direct; without one, an exhaustive role search runs for
    |V(H)| <= 15.
    """
    if embedding is not None:
        for v, cls in enumerate(embedding.c_classes):
            if len(cls) != n_per_class:
                raise DomainError(
                    f"class {v} has size {len(cls)}, expected n_per_class = {n_per_class}")
        return _check_embedding(H, base, gamma, embedding)

    if H.n > GDIM_SEARCH_MAX_VERTICES:
        raise SizeError(
            f"embedding search supports up to {GDIM_SEARCH_MAX_VERTICES} vertices, got {H.n}")
    need = gamma.a_size + gamma.b_size + base.v_size * n_per_class
    if H.n != need:
        raise DomainError(f"vertex count {H.n} does not match roles ({need})")
    verts = list(range(H.n))
    for A in combinations(verts, gamma.a_size):
        restA = [v for v in verts if v not in A]
        for B in combinations(restA, gamma.b_size):
            rest = [v for v in restA if v not in B]
            # compatible base-columns for each leftover vertex
            assign = np.asarray(gamma.assignment)
            tensor = H.tensor()
            slices = tensor[np.ix_(list(A), list(B), rest)]
            comp = []
            for zi in range(len(rest)):
                ok = []
                for v in range(base.v_size):
                    if bool((slices[:, :, zi] == base.adj[assign, v]).all()):
                        ok.append(v)
                comp.append(ok)

            # exact-cover: assign each leftover to a compatible class, sizes n_per_class
            counts = [0] * base.v_size
            choice = [-1] * len(rest)

            def place(idx: int) -> bool:
                if idx == len(rest):
                    return True
                for v in comp[idx]:
                    if counts[v] < n_per_class:
                        counts[v] += 1
                        choice[idx] = v
                        if place(idx + 1):
                            return True
                        counts[v] -= 1
                return False

            if all(comp) and place(0):
                classes = [[] for _ in range(base.v_size)]
                for zi, v in enumerate(choice):
                    classes[v].append(rest[zi])
                emb = BlowupEmbedding(tuple(A), tuple(B), tuple(tuple(c) for c in classes))
                return _check_embedding(H, base, gamma, emb)
    return GDimCheck(False, None, None)
