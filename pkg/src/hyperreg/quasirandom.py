"""Deviation-based quasirandomness diagnostics for bigraphs and triads.

Central quantities:

* the pair deviation of a bigraph B = (U, W; E) with density d_B: the sum over
  ordered quadruples (u0, u1, w0, w1) of the product of g(u_i, w_j), where
  g(u, w) = 1 - d_B on edges and -d_B off edges.  The sum factorizes as
  ||G G^T||_F^2, so it is computed in O(min(|U|,|W|)^2 * max(|U|,|W|)) and is
  always nonnegative; we report it normalized by |U|^2 |W|^2.

* the triple deviation of a ternary relation over the triangle set of a triad:
  the octahedral sum over ordered 6-tuples of the 8 corner values of
  h = 1 - d on related triangles, -d on unrelated triangles, 0 off triangles.
  For each pair (z0, z1) the inner 4-index sum is again a Frobenius norm of a
  Gram matrix, giving an O(|Z|^2 |X|^2 |Y|) kernel.

Float mode relies on numpy's pairwise summation plus math.fsum across the
outer accumulation; exact mode runs the same factorized kernels over scaled
integers and returns Fractions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Callable, Sequence

import numpy as np

from .core import Bigraph, Triad, Trigraph, relative_density, restrict_trigraph
from .errors import DomainError, SizeError

__all__ = [
    "Dev2Report",
    "Dev23Report",
    "CountingReport",
    "SubtriadReport",
    "RegularityVerdict",
    "NeighborhoodReport",
    "dev2",
    "dev23",
    "counting_residual",
    "subtriad_deviation",
    "eps_regular",
    "neighborhood_stat",
    "union_colors",
    "subpair",
]

EXACT_DEV2_MAX_SIDE = 64
EXACT_DEV23_MAX_CLASS = 16
EXHAUSTIVE_REGULARITY_MAX_SIDE = 12


@dataclass(frozen=True)
class Dev2Report:
    """Measured pair deviation of one bigraph."""

    u_size: int
    v_size: int
    density: Fraction
    raw_sum: object            # float or Fraction
    normalized_sum: object     # raw_sum / (u^2 v^2)
    exact: bool
    reference_density: object = None

    def passes(self, eps: float, d=None) -> bool:
        """dev2(eps, d): density within eps of d and normalized sum <= eps.

        With d omitted, uses the stored reference density if any, else the
        measured density itself (the "simply has dev2(eps)" reading).
        """
        if d is None:
            d = self.reference_density if self.reference_density is not None else self.density
        return abs(self.density - d) <= eps and self.normalized_sum <= eps


@dataclass(frozen=True)
class Dev23Report:
    """Measured triple deviation of a ternary relation over a triad."""

    shape: tuple[int, int, int]
    relative_density: Fraction
    vacuous: bool
    triad_densities: tuple[Fraction, Fraction, Fraction]   # (d_xy, d_xz, d_yz)
    component_reports: tuple[Dev2Report, Dev2Report, Dev2Report]
    octahedral_sum: object
    normalized: object
    degenerate: bool
    exact: bool

    def passes(self, eps1: float, eps2: float) -> bool:
        """Components pass dev2(eps2) at their measured densities and the
        normalized octahedral sum is at most eps1."""
        if not all(r.passes(eps2) for r in self.component_reports):
            return False
        return self.normalized <= eps1


def _quad_sum_float(g: np.ndarray) -> float:
    """Sum over ordered quadruples of the 4-corner product, factorized."""
    u, v = g.shape
    if u <= v:
        m = g @ g.T
    else:
        m = g.T @ g
    return float(np.einsum("ij,ij->", m, m))


def _quad_sum_exact(adj: np.ndarray) -> tuple[Fraction, int]:
    """Exact quadruple sum via scaled integers.

    With N = u*v and e edges, g = (N*[edge] - e)/N entrywise; the scaled sum
    over quadruples of integer products equals N^4 times the true sum.
    """
    u, v = adj.shape
    n_cells = u * v
    e = int(adj.sum())
    gi = (adj.astype(object) * n_cells) - e
    rows = gi if u <= v else gi.T
    k = rows.shape[0]
    rowlist = [list(r) for r in rows]
    total = 0
    for i in range(k):
        ri = rowlist[i]
        for j in range(i, k):
            rj = rowlist[j]
            inner = sum(a * b for a, b in zip(ri, rj))
            total += inner * inner if i == j else 2 * inner * inner
    return Fraction(total, n_cells**4), e


def dev2(B: Bigraph, reference=None, exact: bool = False) -> Dev2Report:
    """Measure the pair deviation of a bigraph.

    reference: optional density the report should compare against in passes().
    exact: compute the sum as an exact Fraction (sides up to 64).
    """
    u, v = B.shape
    density = B.density()
    if exact:
        if max(u, v) > EXACT_DEV2_MAX_SIDE:
            raise SizeError(f"exact dev2 supports sides up to {EXACT_DEV2_MAX_SIDE}, got {B.shape}")
        raw, _ = _quad_sum_exact(B.adj)
        normalized = raw / (u * u * v * v)
    else:
        d = float(density)
        g = np.where(B.adj, 1.0 - d, -d)
        raw = _quad_sum_float(g)
        normalized = raw / float(u * u * v * v)
    ref = Fraction(reference) if reference is not None else None
    return Dev2Report(u, v, density, raw, normalized, exact, ref)


def _octahedral_sum_float(h: np.ndarray) -> float:
    """Six-index octahedral sum of a real 3-tensor, factorized over z-pairs.

    Axes are permuted so the largest class takes the inner (linear) slot;
    the sum is symmetric under axis permutation.
    """
    order = np.argsort(h.shape)  # smallest -> largest
    # put largest in axis 1 (inner), smallest in axis 2 (outer pair loop)
    perm = (int(order[1]), int(order[2]), int(order[0]))
    h = np.transpose(h, perm)
    nz = h.shape[2]
    terms = []
    for z0 in range(nz):
        hz0 = h[:, :, z0]
        for z1 in range(z0, nz):
            b = hz0 * h[:, :, z1]
            m = b @ b.T
            q = float(np.einsum("ij,ij->", m, m))
            terms.append(q if z0 == z1 else 2.0 * q)
    return math.fsum(terms)


def _octahedral_sum_exact(rel_and_tri: np.ndarray, tri: np.ndarray) -> tuple[Fraction, int, int]:
    """Exact octahedral sum. h*den = den*[on-relation triangle] - r*[triangle],
    with den = |K3| and r the on-relation count; returns sum, r, den."""
    den = int(tri.sum())
    r = int(rel_and_tri.sum())
    if den == 0 or r == 0 or r == den:
        return Fraction(0), r, den
    hs = rel_and_tri.astype(object) * den - tri.astype(object) * r
    x, y, nz = hs.shape
    total = 0
    for z0 in range(nz):
        for z1 in range(z0, nz):
            b = hs[:, :, z0] * hs[:, :, z1]
            rows = [list(row) for row in b]
            quad = 0
            for i in range(x):
                ri = rows[i]
                for j in range(i, x):
                    rj = rows[j]
                    inner = sum(a * c for a, c in zip(ri, rj))
                    quad += inner * inner if i == j else 2 * inner * inner
            total += quad if z0 == z1 else 2 * quad
    return Fraction(total, den**8), r, den


def dev23(H: Trigraph, G: Triad, exact: bool = False) -> Dev23Report:
    """Measure the triple deviation of H over the triangle set of G.

    H is restricted to K3(G) internally.  When the relative density is exactly
    0 or 1 the octahedral sum vanishes identically and is reported as exact 0.
    """
    if H.shape != G.shape:
        raise DomainError(f"trigraph shape {H.shape} does not match triad {G.shape}")
    d_rel, vacuous = relative_density(H, G)
    comp = tuple(dev2(b, exact=exact) for b in G.components())
    d_xy, d_xz, d_yz = (r.density for r in comp)

    if d_rel in (0, 1):
        octa = Fraction(0) if exact else 0.0
        oct_exact = True
    elif exact:
        sizes = G.shape
        if max(sizes) > EXACT_DEV23_MAX_CLASS:
            raise SizeError(
                f"exact dev23 supports classes up to {EXACT_DEV23_MAX_CLASS}, got {sizes}")
        tri = G.triangle_tensor()
        octa, _, _ = _octahedral_sum_exact(H.rel & tri, tri)
        oct_exact = True
    else:
        tri = G.triangle_tensor()
        d = float(d_rel)
        h = np.where(H.rel & tri, 1.0 - d, 0.0)
        h[tri & ~H.rel] = -d
        octa = _octahedral_sum_float(h)
        oct_exact = False

    x, y, z = G.shape
    dens_prod = d_xy**4 * d_xz**4 * d_yz**4
    degenerate = dens_prod == 0
    if degenerate:
        normalized = Fraction(0) if oct_exact else 0.0
    else:
        scale = dens_prod * x * x * y * y * z * z
        normalized = octa / scale if oct_exact else float(octa) / float(scale)
    return Dev23Report(
        shape=G.shape,
        relative_density=d_rel,
        vacuous=vacuous,
        triad_densities=(d_xy, d_xz, d_yz),
        component_reports=comp,
        octahedral_sum=octa,
        normalized=normalized,
        degenerate=degenerate,
        exact=exact or d_rel in (0, 1),
    )


@dataclass(frozen=True)
class CountingReport:
    """Triangle count of a triad against the product-density prediction."""

    triangle_count: int
    expected: Fraction
    residual: Fraction
    sizes: tuple[int, int, int]

    def bound(self, eps: float) -> float:
        x, y, z = self.sizes
        return 4.0 * eps**0.25 * x * y * z

    def passes(self, eps: float) -> bool:
        return self.residual <= self.bound(eps)


def counting_residual(G: Triad, d_xy=None, d_xz=None, d_yz=None) -> CountingReport:
    """|K3(G)| compared with d_xy * d_xz * d_yz * |X||Y||Z|.

    Densities default to the measured component densities (exact rationals).
    """
    m_xy, m_xz, m_yz = G.densities()
    d_xy = Fraction(d_xy) if d_xy is not None else m_xy
    d_xz = Fraction(d_xz) if d_xz is not None else m_xz
    d_yz = Fraction(d_yz) if d_yz is not None else m_yz
    x, y, z = G.shape
    expected = d_xy * d_xz * d_yz * x * y * z
    count = G.triangle_count()
    return CountingReport(count, expected, abs(count - expected), G.shape)


@dataclass(frozen=True)
class SubtriadReport:
    """Deviation of a sub-triad's on-relation triangle count from the ambient
    relative density prediction."""

    sub_count: int
    sub_triangles: int
    ambient_density: Fraction
    lhs: Fraction
    ambient_densities: tuple[Fraction, Fraction, Fraction]
    ambient_sizes: tuple[int, int, int]

    def bound(self, eps1: float) -> float:
        d_xy, d_xz, d_yz = (float(d) for d in self.ambient_densities)
        x, y, z = self.ambient_sizes
        return (2.0 * eps1) ** 0.125 * d_xy * d_xz * d_yz * x * y * z

    def passes(self, eps1: float) -> bool:
        return self.lhs <= self.bound(eps1)


def _validate_sub_bigraph(sub: Bigraph, induced: Bigraph, name: str) -> None:
    if sub.shape != induced.shape:
        raise DomainError(f"substituted {name} has shape {sub.shape}, expected {induced.shape}")
    if bool((sub.adj & ~induced.adj).any()):
        raise DomainError(f"substituted {name} is not a subset of the induced bigraph")


def subtriad_deviation(
    H: Trigraph,
    G: Triad,
    xs: Sequence[int],
    ys: Sequence[int],
    zs: Sequence[int],
    exy: Bigraph | None = None,
    exz: Bigraph | None = None,
    eyz: Bigraph | None = None,
) -> SubtriadReport:
    """| |rel ∩ K3(G')| - d_G(H) * |K3(G')| | for a sub-triad G' of G.

    G' lives on class subsets (xs, ys, zs); its component bigraphs default to
    the induced ones and may be replaced by sub-bigraphs of them.
    """
    if H.shape != G.shape:
        raise DomainError(f"trigraph shape {H.shape} does not match triad {G.shape}")
    induced = G.sub_instance(xs, ys, zs)
    parts = []
    for given, ind, name in ((exy, induced.exy, "exy"), (exz, induced.exz, "exz"), (eyz, induced.eyz, "eyz")):
        if given is None:
            parts.append(ind)
        else:
            _validate_sub_bigraph(given, ind, name)
            parts.append(given)
    sub = Triad(*parts)
    xs = [int(i) for i in xs]
    ys = [int(i) for i in ys]
    zs = [int(i) for i in zs]
    sub_rel = H.rel[np.ix_(xs, ys, zs)]
    tri = sub.triangle_tensor()
    k3 = int(tri.sum())
    on_rel = int((sub_rel & tri).sum())
    d_amb, _ = relative_density(H, G)
    lhs = abs(Fraction(on_rel) - d_amb * k3)
    return SubtriadReport(on_rel, k3, d_amb, lhs, G.densities(), G.shape)


@dataclass(frozen=True)
class RegularityVerdict:
    """Outcome of an eps-regularity check."""

    regular: bool
    mode: str
    eps: float
    witness: tuple | None = None       # (rows, cols, density) violating the bound
    trials: int = 0
    detail: str = ""


def _exhaustive_eps_regular(B: Bigraph, eps: float) -> RegularityVerdict:
    u, v = B.shape
    d = float(B.density())
    min_rows = eps * u
    min_cols = eps * v
    adj = B.adj.astype(np.float64)
    # subset-indicator matrices: row s of M1 marks the members of subset s
    m1 = ((np.arange(1 << u)[:, None] >> np.arange(u)) & 1).astype(np.float64)
    m2 = ((np.arange(1 << v)[:, None] >> np.arange(v)) & 1).astype(np.float64)
    sizes1 = m1.sum(axis=1)
    sizes2 = m2.sum(axis=1)
    ok1 = sizes1 >= max(min_rows, 1)
    ok2 = sizes2 >= max(min_cols, 1)
    cols_part = adj @ m2.T                     # u x 2^v edge counts into column subsets
    idx2 = np.flatnonzero(ok2)
    chunk = 4096
    rows_idx = np.flatnonzero(ok1)
    for start in range(0, len(rows_idx), chunk):
        block = rows_idx[start:start + chunk]
        counts = m1[block] @ cols_part[:, idx2]            # |block| x |idx2|
        dens = counts / np.outer(sizes1[block], sizes2[idx2])
        bad = np.argwhere(np.abs(dens - d) > eps)
        if len(bad):
            bi, bj = bad[0]
            s1 = int(block[bi])
            s2 = int(idx2[bj])
            rows = tuple(int(i) for i in range(u) if (s1 >> i) & 1)
            cols = tuple(int(j) for j in range(v) if (s2 >> j) & 1)
            wit_d = float(dens[bi, bj])
            return RegularityVerdict(False, "exhaustive", eps, (rows, cols, wit_d))
    return RegularityVerdict(True, "exhaustive", eps)


def eps_regular(
    B: Bigraph,
    eps: float,
    mode: str = "exhaustive",
    trials: int = 200,
    seed: int | None = None,
) -> RegularityVerdict:
    """Check eps-regularity of a bigraph.

    * exhaustive: all subset pairs with |A'| >= eps|A|, |B'| >= eps|B|
      (sides capped at 12).
    * sampled: `trials` random qualifying subset pairs; a returned witness is
      conclusive, absence of one is not.
    * certificate: dev2-based sufficient condition only; never claims
      regularity as such, reports the measured deviation.
    """
    if not 0 < eps < 1:
        raise DomainError("eps must lie in (0, 1)")
    u, v = B.shape
    if mode == "exhaustive":
        if max(u, v) > EXHAUSTIVE_REGULARITY_MAX_SIDE:
            raise SizeError(
                f"exhaustive regularity supports sides up to {EXHAUSTIVE_REGULARITY_MAX_SIDE}, got {B.shape}")
        return _exhaustive_eps_regular(B, eps)
    if mode == "sampled":
        if seed is None:
            raise DomainError("sampled mode requires an explicit seed")
        rng = np.random.default_rng(seed)
        d = float(B.density())
        adj = B.adj
        k_u = max(1, math.ceil(eps * u))
        k_v = max(1, math.ceil(eps * v))
        for trial in range(trials):
            su = rng.integers(k_u, u + 1)
            sv = rng.integers(k_v, v + 1)
            rows = rng.choice(u, size=int(su), replace=False)
            cols = rng.choice(v, size=int(sv), replace=False)
            dd = adj[np.ix_(rows, cols)].mean()
            if abs(dd - d) > eps:
                wit = (tuple(sorted(int(r) for r in rows)), tuple(sorted(int(c) for c in cols)), float(dd))
                return RegularityVerdict(False, "sampled", eps, wit, trials=trial + 1)
        return RegularityVerdict(True, "sampled", eps, trials=trials,
                                 detail="no violating pair found; not a proof of regularity")
    if mode == "certificate":
        rep = dev2(B)
        ok = rep.normalized_sum <= eps
        return RegularityVerdict(
            ok, "certificate", eps, None, 0,
            detail=f"pair deviation proxy: normalized dev2 sum = {rep.normalized_sum:.3e}; "
                   "this certifies a deviation bound, not eps-regularity itself")
    raise DomainError(f"unknown regularity mode {mode!r}")


@dataclass(frozen=True)
class NeighborhoodReport:
    """Fraction of E_UV whose endpoints have typical co-neighborhood in W."""

    edge_count: int
    good_count: int
    fraction: Fraction
    window: tuple[float, float]

    def passes(self, eps: float) -> bool:
        return self.fraction >= 1 - eps ** (1 / 100)


def neighborhood_stat(G: Triad, eps: float) -> NeighborhoodReport:
    """Measure, over edges uv of E_XY, how often |N(u) ∩ N(v)| in Z lies within
    (1 ± eps^(1/100)) d_XZ d_YZ |Z|."""
    if not 0 < eps < 1:
        raise DomainError("eps must lie in (0, 1)")
    d_uw = float(G.exz.density())
    d_vw = float(G.eyz.density())
    z = G.z_size
    tol = eps ** (1 / 100)
    center = d_uw * d_vw * z
    lo, hi = (1 - tol) * center, (1 + tol) * center
    common = G.exz.adj.astype(np.int64) @ G.eyz.adj.T.astype(np.int64)  # x by y
    on_edges = G.exy.adj
    total = int(on_edges.sum())
    good = int(((common >= lo) & (common <= hi) & on_edges).sum())
    frac = Fraction(good, total) if total else Fraction(1)
    return NeighborhoodReport(total, good, frac, (lo, hi))


@dataclass(frozen=True)
class UnionPrediction:
    measured: tuple[Dev2Report, Dev2Report]
    predicted_eps: float
    predicted_density: Fraction


def union_colors(B1: Bigraph, B2: Bigraph, eps1: float | None = None, eps2: float | None = None):
    """Union of two edge-disjoint bigraphs on the same classes.

    Returns (union bigraph, prediction): inputs at dev2(eps_i, d_i) give the
    union at dev2(eps1^(1/12) + eps2^(1/12), d1 + d2).  eps_i default to the
    measured normalized sums.
    """
    if B1.shape != B2.shape:
        raise DomainError(f"union requires equal shapes, got {B1.shape} and {B2.shape}")
    if bool((B1.adj & B2.adj).any()):
        raise DomainError("union requires edge-disjoint bigraphs")
    r1, r2 = dev2(B1), dev2(B2)
    e1 = float(r1.normalized_sum) if eps1 is None else float(eps1)
    e2 = float(r2.normalized_sum) if eps2 is None else float(eps2)
    pred = e1 ** (1 / 12) + e2 ** (1 / 12)
    out = Bigraph(B1.adj | B2.adj)
    return out, UnionPrediction((r1, r2), pred, r1.density + r2.density)


@dataclass(frozen=True)
class SubpairPrediction:
    measured: Dev2Report
    gamma: float
    predicted_eps: float
    reference_density: Fraction


def subpair(B: Bigraph, rows: Sequence[int], cols: Sequence[int], gamma: float, eps: float | None = None):
    """Restriction of B to (rows, cols) occupying at least a gamma fraction of
    each side.  Returns (sub-bigraph, prediction with eps' = 2 gamma^-1 eps^(1/12))."""
    if not 0 < gamma <= 1:
        raise DomainError("gamma must lie in (0, 1]")
    rows = list(rows)
    cols = list(cols)
    if len(rows) < gamma * B.u_size or len(cols) < gamma * B.v_size:
        raise DomainError(
            f"subsets of sizes ({len(rows)},{len(cols)}) are below the gamma={gamma} floor "
            f"for shape {B.shape}")
    rep = dev2(B)
    e = float(rep.normalized_sum) if eps is None else float(eps)
    pred = 2.0 / gamma * e ** (1 / 12)
    return B.restrict(rows, cols), SubpairPrediction(rep, gamma, pred, rep.density)
