"""Triad decomposition audits: coverage, homogeneity, equitability, slicing.

A (t, ell)-decomposition induces, for every ordered block triple (i, j, k) and
color triple (a, b, c), the triad

    (V_i, V_j, V_k; P_ij^a, P_ik^b, P_jk^c).

Every ordered vertex triple lies in the ordered triangle set of exactly one
triad with nonempty classes (its pair colors determine the containing triad),
so coverage fractions are sums of per-triad triangle counts over n^3.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from itertools import permutations
from typing import Iterator, Sequence

import numpy as np

from .core import Bigraph, Decomposition, ThreeGraph, Triad
from .errors import DomainError
from .quasirandom import Dev2Report, _octahedral_sum_float, dev2

__all__ = [
    "TriadRef",
    "TriadRow",
    "DecompositionAudit",
    "NontrivialCoverage",
    "SliceResult",
    "triads_of",
    "materialize",
    "present_triads",
    "audit",
    "homogeneity_audit",
    "nontrivial_coverage",
    "slice_decomposition",
]


@dataclass(frozen=True, order=True)
class TriadRef:
    """Ordered triad reference: blocks (i, j, k), colors a on (i,j), b on (i,k),
    c on (j,k)."""

    i: int
    j: int
    k: int
    a: int
    b: int
    c: int

    def key(self) -> str:
        return f"{self.i},{self.j},{self.k}:{self.a},{self.b},{self.c}"

    def canonical(self) -> "TriadRef":
        """Lexicographically smallest role permutation.

        Density, triangle count, and the deviation sums are invariant under
        permuting the three class roles (colors follow their block pairs), so
        canonical references identify the same triad across orientations.
        """
        blocks = (self.i, self.j, self.k)
        slot = {frozenset((0, 1)): self.a,
                frozenset((0, 2)): self.b,
                frozenset((1, 2)): self.c}
        best = None
        for p in permutations(range(3)):
            cand = (blocks[p[0]], blocks[p[1]], blocks[p[2]],
                    slot[frozenset((p[0], p[1]))],
                    slot[frozenset((p[0], p[2]))],
                    slot[frozenset((p[1], p[2]))])
            if best is None or cand < best:
                best = cand
        return TriadRef(*best)


def triads_of(P: Decomposition) -> Iterator[TriadRef]:
    """All t^3 * ell^3 candidate references, lazily, in lexicographic order."""
    t, ell = P.t, P.ell
    for i in range(t):
        for j in range(t):
            for k in range(t):
                for a in range(ell):
                    for b in range(ell):
                        for c in range(ell):
                            yield TriadRef(i, j, k, a, b, c)


def present_triads(P: Decomposition) -> Iterator[TriadRef]:
    """References whose three color classes are all nonempty."""
    t = P.t
    for i in range(t):
        for j in range(t):
            for k in range(t):
                for a in P.colors_in(i, j):
                    for b in P.colors_in(i, k):
                        for c in P.colors_in(j, k):
                            yield TriadRef(i, j, k, a, b, c)


def materialize(P: Decomposition, ref: TriadRef) -> Triad:
    """Build the concrete triad for a reference."""
    return Triad(
        P.class_bigraph(ref.i, ref.j, ref.a),
        P.class_bigraph(ref.i, ref.k, ref.b),
        P.class_bigraph(ref.j, ref.k, ref.c),
    )


@dataclass(frozen=True)
class TriadRow:
    """One audited triad (nonzero classes; k3 may still be zero for vacuous rows)."""

    ref: TriadRef
    k3: int
    density: Fraction
    vacuous: bool
    class_sizes: tuple[int, int, int]
    normalized_dev23: float
    degenerate: bool
    components_pass: bool
    dev23_passes: bool

    def homogeneous(self, mu: float) -> bool:
        return self.density < mu or self.density > 1 - mu


@dataclass(frozen=True)
class DecompositionAudit:
    """Audit of a decomposition against a 3-graph at (eps1, eps2)."""

    n: int
    t: int
    ell: int
    eps1: float
    eps2: float
    reference: str
    pair_coverage: Fraction
    triple_coverage: Fraction
    equitable: bool
    uniform_pair_coverage: Fraction
    rows: tuple[TriadRow, ...]
    block_sizes: tuple[int, ...]

    def homogeneity_coverage(self, mu: float) -> Fraction:
        total = sum(r.k3 for r in self.rows if r.homogeneous(mu))
        return Fraction(total, self.n**3)

    def nontrivial_rows(self, mu: float) -> tuple[TriadRow, ...]:
        floor_block = mu * self.n / self.t
        out = []
        for r in self.rows:
            bi, bj, bk = self.block_sizes[r.ref.i], self.block_sizes[r.ref.j], self.block_sizes[r.ref.k]
            if min(bi, bj, bk) < floor_block:
                continue
            s_ab, s_ac, s_bc = r.class_sizes
            if (s_ab < mu * bi * bj / self.ell or s_ac < mu * bi * bk / self.ell
                    or s_bc < mu * bj * bk / self.ell):
                continue
            out.append(r)
        return tuple(out)

    def nontrivial_coverage(self, mu: float) -> Fraction:
        total = sum(r.k3 for r in self.nontrivial_rows(mu))
        return Fraction(total, self.n**3)


def _class_dev2_cache(P: Decomposition):
    cache: dict[tuple[int, int, int], Dev2Report] = {}

    def get(i: int, j: int, a: int) -> Dev2Report:
        key = (i, j, a)
        if key not in cache:
            cache[key] = dev2(P.class_bigraph(i, j, a))
        return cache[key]

    return get


def _reference_density(P: Decomposition, i: int, j: int, mode: str) -> Fraction:
    if mode == "self":
        return None  # Dev2Report.passes falls back to the measured density
    if mode == "uniform":
        return Fraction(1, P.ell)
    if mode == "per-pair":
        return Fraction(1, max(1, len(P.colors_in(i, j))))
    raise DomainError(f"unknown density reference mode {mode!r}")


def class_passes_dev2(P: Decomposition, rep: Dev2Report, i: int, j: int, eps2: float, mode: str) -> bool:
    ref = _reference_density(P, i, j, mode)
    return rep.passes(eps2, ref)


def _pair_coverage(P: Decomposition, eps2: float, mode: str, dev2_of) -> Fraction:
    covered = 0
    for i in range(P.t):
        for j in range(P.t):
            for a in P.colors_in(i, j):
                rep = dev2_of(i, j, a)
                if class_passes_dev2(P, rep, i, j, eps2, mode):
                    covered += P.class_size(i, j, a)
    return Fraction(covered, P.n**2)


def _triad_row(H_tensor_slice, exy, exz, eyz, ref, comp_ok, eps1) -> TriadRow:
    tri = exy[:, :, None] & exz[:, None, :] & eyz[None, :, :]
    k3 = int(tri.sum())
    sizes = (int(exy.sum()), int(exz.sum()), int(eyz.sum()))
    if k3 == 0:
        return TriadRow(ref, 0, Fraction(0), True, sizes, 0.0, True, comp_ok, comp_ok)
    num = int((H_tensor_slice & tri).sum())
    density = Fraction(num, k3)
    if num == 0 or num == k3:
        # h vanishes identically: octahedral sum is exactly zero
        normalized = 0.0
        degenerate = False
    else:
        d = num / k3
        h = np.where(H_tensor_slice & tri, 1.0 - d, 0.0)
        h[tri & ~H_tensor_slice] = -d
        octa = _octahedral_sum_float(h)
        x, y, z = tri.shape
        d_xy = sizes[0] / (x * y)
        d_xz = sizes[1] / (x * z)
        d_yz = sizes[2] / (y * z)
        dens_prod = (d_xy * d_xz * d_yz) ** 4
        degenerate = dens_prod == 0
        normalized = 0.0 if degenerate else octa / (dens_prod * (x * y * z) ** 2)
    passes = comp_ok and normalized <= eps1
    return TriadRow(ref, k3, density, False, sizes, normalized, degenerate, comp_ok, passes)


def _audit_rows(H: ThreeGraph, P: Decomposition, eps1: float, eps2: float,
                mode: str, threads: int = 1) -> tuple[tuple[TriadRow, ...], "callable"]:
    if H.n != P.n:
        raise DomainError(f"3-graph on {H.n} vertices does not match decomposition on {P.n}")
    tensor = H.tensor()
    dev2_of = _class_dev2_cache(P)
    tasks = []
    for i in range(P.t):
        bi = list(P.blocks[i])
        for j in range(P.t):
            bj = list(P.blocks[j])
            for k in range(P.t):
                bk = list(P.blocks[k])
                t_slice = tensor[np.ix_(bi, bj, bk)]
                for a in P.colors_in(i, j):
                    exy = P.class_matrix(i, j, a)
                    ok_a = class_passes_dev2(P, dev2_of(i, j, a), i, j, eps2, mode)
                    for b in P.colors_in(i, k):
                        exz = P.class_matrix(i, k, b)
                        ok_b = ok_a and class_passes_dev2(P, dev2_of(i, k, b), i, k, eps2, mode)
                        for c in P.colors_in(j, k):
                            eyz = P.class_matrix(j, k, c)
                            comp_ok = ok_b and class_passes_dev2(P, dev2_of(j, k, c), j, k, eps2, mode)
                            ref = TriadRef(i, j, k, a, b, c)
                            tasks.append((t_slice, exy, exz, eyz, ref, comp_ok))
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(lambda t: _triad_row(*t, eps1), tasks))
    else:
        rows = [_triad_row(*t, eps1) for t in tasks]
    return tuple(rows), dev2_of


def audit(H: ThreeGraph, P: Decomposition, eps1: float, eps2: float,
          reference: str = "self", threads: int = 1) -> DecompositionAudit:
    """Full audit: pair coverage, triple coverage, equitability, per-triad table.

    reference selects the density the per-class dev2 check compares against:
    "self" (measured class density), "uniform" (1/ell), or "per-pair"
    (1/#nonempty colors of the block pair).  Equitability always uses the
    uniform reference.
    """
    rows, dev2_of = _audit_rows(H, P, eps1, eps2, reference, threads)
    pair_cov = _pair_coverage(P, eps2, reference, dev2_of)
    uniform_cov = (pair_cov if reference == "uniform"
                   else _pair_coverage(P, eps2, "uniform", dev2_of))
    triple_cov = Fraction(sum(r.k3 for r in rows if r.dev23_passes), P.n**3)
    sizes = P.block_sizes()
    equitable = (max(sizes) - min(sizes) <= 1) and uniform_cov >= 1 - eps1
    return DecompositionAudit(
        n=P.n, t=P.t, ell=P.ell, eps1=eps1, eps2=eps2, reference=reference,
        pair_coverage=pair_cov, triple_coverage=triple_cov, equitable=equitable,
        uniform_pair_coverage=uniform_cov, rows=rows, block_sizes=sizes,
    )


def homogeneity_audit(H: ThreeGraph, P: Decomposition, mu: float) -> tuple[Fraction, tuple[TriadRow, ...]]:
    """Coverage by mu-homogeneous triads (relative density < mu or > 1 - mu),
    plus the per-triad density table.  No deviation sums are computed."""
    if H.n != P.n:
        raise DomainError(f"3-graph on {H.n} vertices does not match decomposition on {P.n}")
    if not 0 < mu <= 0.5:
        raise DomainError("mu must lie in (0, 0.5]")
    tensor = H.tensor()
    rows = []
    for i in range(P.t):
        bi = list(P.blocks[i])
        for j in range(P.t):
            bj = list(P.blocks[j])
            for k in range(P.t):
                bk = list(P.blocks[k])
                t_slice = tensor[np.ix_(bi, bj, bk)]
                for a in P.colors_in(i, j):
                    exy = P.class_matrix(i, j, a)
                    for b in P.colors_in(i, k):
                        exz = P.class_matrix(i, k, b)
                        ez = exy[:, :, None] & exz[:, None, :]
                        for c in P.colors_in(j, k):
                            eyz = P.class_matrix(j, k, c)
                            tri = ez & eyz[None, :, :]
                            k3 = int(tri.sum())
                            sizes = (int(exy.sum()), int(exz.sum()), int(eyz.sum()))
                            ref = TriadRef(i, j, k, a, b, c)
                            if k3 == 0:
                                rows.append(TriadRow(ref, 0, Fraction(0), True, sizes,
                                                     0.0, True, True, True))
                                continue
                            num = int((t_slice & tri).sum())
                            rows.append(TriadRow(ref, k3, Fraction(num, k3), False, sizes,
                                                 0.0, False, True, True))
    rows = tuple(rows)
    covered = sum(r.k3 for r in rows if r.homogeneous(mu))
    return Fraction(covered, P.n**3), rows


@dataclass(frozen=True)
class NontrivialCoverage:
    mu: float
    refs: tuple[TriadRef, ...]
    fraction: Fraction
    lemma_bound_ok: bool  # fraction >= 1 - 2 mu; can fail only for degenerate partitions


def nontrivial_coverage(P: Decomposition, mu: float) -> NontrivialCoverage:
    """Triangle-coverage of the mu-nontrivial triads.

    A triad is mu-nontrivial when its three blocks have size at least
    mu*n/t and its three classes have size at least mu*|V_i||V_j|/ell.
    """
    if not 0 < mu <= 0.5:
        raise DomainError("mu must lie in (0, 0.5]")
    n, t, ell = P.n, P.t, P.ell
    floor_block = mu * n / t
    sizes = P.block_sizes()
    covered = 0
    refs = []
    for i in range(t):
        if sizes[i] < floor_block:
            continue
        for j in range(t):
            if sizes[j] < floor_block:
                continue
            for k in range(t):
                if sizes[k] < floor_block:
                    continue
                good_ab = [a for a in P.colors_in(i, j)
                           if P.class_size(i, j, a) >= mu * sizes[i] * sizes[j] / ell]
                good_ac = [b for b in P.colors_in(i, k)
                           if P.class_size(i, k, b) >= mu * sizes[i] * sizes[k] / ell]
                good_bc = [c for c in P.colors_in(j, k)
                           if P.class_size(j, k, c) >= mu * sizes[j] * sizes[k] / ell]
                for a in good_ab:
                    exy = P.class_matrix(i, j, a)
                    for b in good_ac:
                        exz = P.class_matrix(i, k, b)
                        ez = exy[:, :, None] & exz[:, None, :]
                        for c in good_bc:
                            eyz = P.class_matrix(j, k, c)
                            k3 = int((ez & eyz[None, :, :]).sum())
                            refs.append(TriadRef(i, j, k, a, b, c))
                            covered += k3
    frac = Fraction(covered, n**3)
    return NontrivialCoverage(mu, tuple(refs), frac, bool(frac >= 1 - 2 * mu))


@dataclass(frozen=True)
class SliceResult:
    decomposition: Decomposition
    pieces_per_block: tuple[int, ...]
    eps1_predicted: float
    eps2_predicted: float
    audit: DecompositionAudit | None


def slice_decomposition(
    P: Decomposition,
    new_block_of: Sequence[int],
    C: int,
    eps1: float,
    eps2: float,
    k_const: float = 1.0,
    H: ThreeGraph | None = None,
    reference: str = "self",
) -> SliceResult:
    """Refine the vertex partition; colors restrict along.

    new_block_of maps each vertex to its new block id; every new block must sit
    inside one old block, and no old block may split into more than C pieces.
    The advisory prediction for the refined parameters is

        eps1' = 4 * eps1^(1/(2K^2)) * C^K
        eps2' = 2C * eps1^(-1/(2K^2)) * eps2^(1/12)

    with K = k_const a caller-supplied advisory constant.  When H is given the
    result is audited at the predicted parameters.
    """
    new_block_of = np.asarray(new_block_of, dtype=np.int64)
    if new_block_of.shape != (P.n,):
        raise DomainError(f"refinement must assign all {P.n} vertices")
    t_new = int(new_block_of.max()) + 1
    if sorted(set(new_block_of.tolist())) != list(range(t_new)):
        raise DomainError("new block ids must be dense 0..t'-1")
    new_blocks = [[] for _ in range(t_new)]
    for v in range(P.n):
        new_blocks[int(new_block_of[v])].append(v)
    parent = []
    for blk in new_blocks:
        if not blk:
            raise DomainError("empty part: refinement produced an empty block")
        olds = {int(P.block_of[v]) for v in blk}
        if len(olds) > 1:
            raise DomainError(f"new block {blk} straddles old blocks {sorted(olds)}")
        parent.append(olds.pop())
    pieces = [0] * P.t
    for p in parent:
        pieces[p] += 1
    if C is not None and max(pieces) > C:
        raise DomainError(f"an old block splits into {max(pieces)} > C = {C} pieces")

    colors = {}
    for pi in range(t_new):
        oi = parent[pi]
        rows = [int(P.pos_in_block[v]) for v in new_blocks[pi]]
        for pj in range(t_new):
            oj = parent[pj]
            cols = [int(P.pos_in_block[v]) for v in new_blocks[pj]]
            colors[(pi, pj)] = P.pair_colors(oi, oj)[np.ix_(rows, cols)]
    refined = Decomposition(P.n, new_blocks, P.ell, colors)

    K = float(k_const)
    eps1_pred = 4.0 * eps1 ** (1.0 / (2.0 * K * K)) * float(C) ** K
    eps2_pred = 2.0 * C * eps1 ** (-1.0 / (2.0 * K * K)) * eps2 ** (1.0 / 12.0)
    aud = None
    if H is not None:
        aud = audit(H, refined, min(eps1_pred, 1.0), min(eps2_pred, 1.0), reference=reference)
    return SliceResult(refined, tuple(pieces), eps1_pred, eps2_pred, aud)
