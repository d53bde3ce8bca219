"""Command-line surface: generation, audits, searches, clustering, grouping,
demos, and the iterated-exponential calculator.

Exit codes: 0 success, 1 domain error (bad parameters or inputs), 2 structured
analytic failure (color cap exceeded, generator retry budget exhausted, demo
expectation not met), 3 I/O or format error (malformed JSON, schema mismatch,
unreadable file).

Every randomized operation requires an explicit --seed.  Generation commands
write their artifacts plus a manifest recording the exact argument vector and
the SHA-256 of each artifact; re-running the recorded arguments reproduces the
artifact bytes exactly.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import os
import sys
import time
from fractions import Fraction
from importlib import metadata
from pathlib import Path

import numpy as np

from . import io as hio
from .construct import (DEFAULT_BIT_LIMIT, PRNG_ID, ack, lower_bound_instance,
                        merge_colors_demo, random_decomposition)
from .core import Bigraph, ThreeGraph
from .decomp import audit
from .dims import canonical, find_induced, sim_quotient, vc2
from .errors import (CapExceededError, DomainError, FormatError,
                     GenerationError)
from .plots import density_histogram
from .quasirandom import dev2, dev23
from .refine import group_colors, split_colors
from .structure import corner_graph, haussler_cluster

try:
    __version__ = metadata.version("hyperreg")
except metadata.PackageNotFoundError:  # pragma: no cover - not installed
    __version__ = "0.0.0"

_PATTERN_KINDS = {"h": "H", "m": "M", "mbar": "Mbar", "ubg": "Ubg"}


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    """Usage problems are domain errors (exit 1), not analytic failures."""

    def error(self, message):
        raise _UsageError(f"{self.prog}: {message}")


# --------------------------------------------------------------------------
# small shared helpers


def _scalar(x):
    """JSON-safe number; exact rationals keep their exact form alongside a
    float so downstream tools never re-derive either."""
    if isinstance(x, Fraction):
        return {"exact": f"{x.numerator}/{x.denominator}", "value": float(x)}
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.floating,)):
        return float(x)
    return x


def _json_text(doc) -> str:
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def _emit(doc, out: str | None) -> None:
    text = _json_text(doc)
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _sha256(path: Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            h.update(chunk)
    return h.hexdigest()


def _load_three_graph(path: str) -> ThreeGraph:
    """JSON instance, or the plain-text edge-list import for non-.json files."""
    if path.endswith(".json"):
        return hio.load(path, "three_graph")
    return hio.read_edge_list(path)


def _parse_pattern(text: str) -> tuple[str, int]:
    kind, sep, num = text.partition(":")
    if not sep or kind.lower() not in _PATTERN_KINDS or not num.isdigit() or int(num) < 1:
        raise DomainError(f"pattern must look like M:2 / H:3 / Mbar:2 / Ubg:2, got {text!r}")
    return _PATTERN_KINDS[kind.lower()], int(num)


def _parse_fill(text: str, seed: int):
    if text == "empty":
        return "empty"
    head, sep, num = text.partition(":")
    if head == "random" and sep:
        try:
            p = float(num)
        except ValueError:
            raise DomainError(f"bad fill probability in {text!r}") from None
        # the generator's retry seeds are seed..seed+retries; keep clear of them
        return ("random", p, seed + 1009)
    raise DomainError(f"fill must be 'empty' or 'random:p', got {text!r}")


def _threads(args) -> int:
    if getattr(args, "threads", None):
        return max(1, args.threads)
    env = os.environ.get("HYPERREG_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise DomainError(f"HYPERREG_THREADS must be an integer, got {env!r}") from None
    return os.cpu_count() or 1


def _pair(text: str) -> tuple[int, int]:
    try:
        i, j = (int(s) for s in text.split(","))
    except ValueError:
        raise DomainError(f"pair must look like 0,1 — got {text!r}") from None
    return i, j


# --------------------------------------------------------------------------
# report documents


def _dev2_doc(r) -> dict:
    return {
        "u": r.u_size,
        "v": r.v_size,
        "density": _scalar(r.density),
        "raw_sum": _scalar(r.raw_sum) if r.exact else float(r.raw_sum),
        "normalized_sum": _scalar(r.normalized_sum) if r.exact else float(r.normalized_sum),
        "reference_density": _scalar(r.reference_density),
        "exact": r.exact,
    }


def _dev23_doc(r) -> dict:
    return {
        "shape": list(r.shape),
        "relative_density": _scalar(r.relative_density),
        "vacuous": r.vacuous,
        "triad_densities": [_scalar(d) for d in r.triad_densities],
        "components": [_dev2_doc(c) for c in r.component_reports],
        "octahedral_sum": _scalar(r.octahedral_sum) if r.exact else float(r.octahedral_sum),
        "normalized": _scalar(r.normalized) if r.exact else float(r.normalized),
        "degenerate": r.degenerate,
        "exact": r.exact,
    }


def _cert_doc(r) -> dict:
    return {
        "target_dev": r.target_dev,
        "density_window": r.density_window,
        "attempts": r.attempts,
        "seed": r.seed,
        "passed": r.passed,
        "classes": [
            {
                "color": c.color,
                "size": c.size,
                "density": c.density,
                "normalized_sum": c.normalized_sum,
                "dev_ok": c.dev_ok,
                "density_ok": c.density_ok,
                "passed": c.passed,
            }
            for c in r.classes
        ],
    }


def _audit_doc(aud, mu: float) -> dict:
    return {
        "n": aud.n,
        "t": aud.t,
        "ell": aud.ell,
        "eps1": aud.eps1,
        "eps2": aud.eps2,
        "reference": aud.reference,
        "block_sizes": list(aud.block_sizes),
        "equitable": aud.equitable,
        "pair_coverage": _scalar(aud.pair_coverage),
        "uniform_pair_coverage": _scalar(aud.uniform_pair_coverage),
        "triple_coverage": _scalar(aud.triple_coverage),
        "triads": len(aud.rows),
        "failing_triads": sum(1 for r in aud.rows if not r.dev23_passes),
        "mu": mu,
        "homogeneity_coverage": _scalar(aud.homogeneity_coverage(mu)),
    }


_CSV_HEADER = ["i", "j", "k", "color_xy", "color_xz", "color_yz",
               "size_x", "size_y", "size_z", "k3", "density", "density_exact",
               "vacuous", "normalized_dev23", "degenerate",
               "components_pass", "dev23_passes"]


def _write_triads_csv(path: Path, rows) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(_CSV_HEADER)
        for r in sorted(rows, key=lambda r: (r.ref.i, r.ref.j, r.ref.k,
                                             r.ref.a, r.ref.b, r.ref.c)):
            w.writerow([
                r.ref.i, r.ref.j, r.ref.k, r.ref.a, r.ref.b, r.ref.c,
                r.class_sizes[0], r.class_sizes[1], r.class_sizes[2],
                r.k3, float(r.density),
                f"{r.density.numerator}/{r.density.denominator}",
                int(r.vacuous), float(r.normalized_dev23), int(r.degenerate),
                int(r.components_pass), int(r.dev23_passes),
            ])


def _cluster_doc(res) -> dict:
    return {
        "u0": list(res.u0),
        "reps": list(res.reps),
        "clusters": [list(c) for c in res.clusters],
        "m": res.m,
        "delta": res.delta,
        "eps": res.eps,
    }


def _corner_doc(cg) -> dict:
    counts = {"sparse": 0, "dense": 0, "error": 0}
    flat = cg.color.ravel()
    counts["sparse"] = int((flat == 0).sum())
    counts["dense"] = int((flat == 1).sum())
    counts["error"] = int((flat == 2).sum())
    return {
        "pair": [cg.j0, cg.k0],
        "lo": cg.lo,
        "hi": cg.hi,
        "eps2": cg.eps2,
        "reference": cg.reference,
        "edge_vertices": list(cg.edge_vertices),
        "corners": [{"block": c.block, "left": c.left_color, "right": c.right_color}
                    for c in cg.corner_vertices],
        "rows": hio.ecb_to_doc(cg.ecb())["rows"],
        "counts": counts,
    }


def _grouping_doc(grouped, mu: float) -> dict:
    cls = grouped.classification
    pairs = []
    for rep in grouped.pair_reports:
        doc = {
            "pair": list(rep.pair),
            "in_psi": rep.in_psi,
            "passing": list(rep.passing),
            "clusters": [list(c) for c in rep.clusters],
            "residual": list(rep.residual),
            "n_colors": rep.n_colors,
            "merged_checks": [
                {
                    "new_color": c.new_color,
                    "old_colors": list(c.old_colors),
                    "measured": float(c.measured),
                    "bound": float(c.bound),
                    "within_bound": c.within_bound,
                }
                for c in rep.merged_checks
            ],
        }
        if rep.cluster_result is not None:
            doc["cluster"] = _cluster_doc(rep.cluster_result)
        pairs.append(doc)
    provenance = {
        f"{i},{j}": {str(new): list(olds) for new, olds in mapping.items()}
        for (i, j), mapping in sorted(grouped.provenance.items())
    }
    return {
        "cap": grouped.cap,
        "ell_prime": grouped.ell_prime,
        "cap_achieved": grouped.cap_achieved,
        "psi": sorted(list(p) for p in grouped.psi),
        "classification": {
            "dense": len(cls.f1),
            "sparse": len(cls.f0),
            "error": len(cls.f_err),
            "mid_density": cls.mid_density_count,
            "eps1": cls.eps1,
            "eps2": cls.eps2,
            "mu": cls.mu,
            "reference": cls.reference,
        },
        "pairs": pairs,
        "provenance": provenance,
        "audit": _audit_doc(grouped.audit, mu),
    }


# --------------------------------------------------------------------------
# generation commands (instance artifacts + manifest)


def _write_manifest(out_dir: Path, command: str, argv: list[str], params: dict,
                    seed: int | None, names: list[str], started: float) -> None:
    doc = {
        "version": hio.FORMAT_VERSION,
        "kind": "manifest",
        "command": command,
        "argv": list(argv),
        "parameters": params,
        "seed": seed,
        "prng": PRNG_ID,
        "tool_version": __version__,
        "timing_s": round(time.perf_counter() - started, 6),
        "outputs": {name: _sha256(out_dir / name) for name in names},
    }
    hio.validate(doc, "manifest")
    (out_dir / "manifest.json").write_text(hio.dumps(doc), encoding="ascii")


def _write_blowup_artifacts(inst, out_dir: Path) -> list[str]:
    from .structure import EdgeColoredBigraph

    hio.save(inst.base, out_dir / "base.json")
    hio.save(EdgeColoredBigraph(inst.gamma.assignment, inst.gamma.n_colors),
             out_dir / "gamma.json")
    hio.save(inst.graph, out_dir / "graph.json")
    hio.save(inst.natural, out_dir / "decomp.json")
    names = ["base.json", "gamma.json", "graph.json", "decomp.json"]
    if inst.certification is not None:
        (out_dir / "certification.json").write_text(
            _json_text(_cert_doc(inst.certification)), encoding="utf-8")
        names.append("certification.json")
    return names


def cmd_gen_blowup(args) -> int:
    started = time.perf_counter()
    kind, size = _parse_pattern(args.base)
    if args.ell != "auto":
        want = (1 << size) if kind == "Ubg" else size
        if int(args.ell) != want:
            raise DomainError(f"base {args.base} fixes ell = {want}; pass --ell auto or {want}")
    fill = _parse_fill(args.fill, args.seed)
    inst = lower_bound_instance(kind, size, args.n, args.seed,
                                target_dev=args.target_dev,
                                max_retries=args.retries, fill=fill)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    names = _write_blowup_artifacts(inst, out_dir)
    params = {"base": f"{kind}:{size}", "n": args.n, "ell": "auto",
              "target_dev": args.target_dev, "retries": args.retries,
              "fill": args.fill}
    _write_manifest(out_dir, "gen blowup", args.argv, params, args.seed, names, started)
    print(f"wrote {len(names)} artifacts + manifest to {out_dir}")
    return 0


def cmd_gen_lb(args) -> int:
    started = time.perf_counter()
    kind = _PATTERN_KINDS[args.kind.lower()]
    if args.size is None:
        raise DomainError("gen lb needs the pattern order via --l (or its alias --k)")
    inst = lower_bound_instance(kind, args.size, args.n, args.seed,
                                target_dev=args.target_dev,
                                max_retries=args.retries,
                                fill=_parse_fill(args.fill, args.seed))
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    names = _write_blowup_artifacts(inst, out_dir)
    params = {"kind": kind, "size": args.size, "n": args.n,
              "target_dev": args.target_dev, "retries": args.retries,
              "fill": args.fill}
    _write_manifest(out_dir, "gen lb", args.argv, params, args.seed, names, started)
    print(f"wrote {len(names)} artifacts + manifest to {out_dir}")
    return 0


def cmd_gen_random3(args) -> int:
    started = time.perf_counter()
    H = ThreeGraph.random(args.n, args.p, np.random.default_rng(args.seed))
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    hio.save(H, out_dir / "graph.json")
    _write_manifest(out_dir, "gen random3", args.argv,
                    {"n": args.n, "p": args.p}, args.seed, ["graph.json"], started)
    print(f"wrote graph.json ({len(H.edges)} edges) + manifest to {out_dir}")
    return 0


def cmd_gen_bigraph(args) -> int:
    started = time.perf_counter()
    B = Bigraph.random(args.u, args.v, args.p, np.random.default_rng(args.seed))
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    hio.save(B, out_dir / "bigraph.json")
    _write_manifest(out_dir, "gen bigraph", args.argv,
                    {"u": args.u, "v": args.v, "p": args.p}, args.seed,
                    ["bigraph.json"], started)
    print(f"wrote bigraph.json + manifest to {out_dir}")
    return 0


def cmd_gen_decomp(args) -> int:
    started = time.perf_counter()
    P = random_decomposition(args.n, args.t, args.ell, args.seed)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    hio.save(P, out_dir / "decomp.json")
    _write_manifest(out_dir, "gen decomp", args.argv,
                    {"n": args.n, "t": args.t, "ell": args.ell}, args.seed,
                    ["decomp.json"], started)
    print(f"wrote decomp.json + manifest to {out_dir}")
    return 0


# --------------------------------------------------------------------------
# audits


def cmd_audit_dev2(args) -> int:
    B = hio.load(args.input, "bigraph")
    report = dev2(B, reference=args.d, exact=args.exact)
    doc = _dev2_doc(report)
    if args.eps2 is not None:
        doc["eps2"] = args.eps2
        doc["passes"] = report.passes(args.eps2)
    _emit(doc, args.out)
    return 0


def cmd_audit_dev23(args) -> int:
    H, G = hio.load(args.input, "dev23_instance")
    report = dev23(H, G, exact=args.exact)
    doc = _dev23_doc(report)
    if args.eps1 is not None and args.eps2 is not None:
        doc["eps1"] = args.eps1
        doc["eps2"] = args.eps2
        doc["passes"] = report.passes(args.eps1, args.eps2)
    _emit(doc, args.out)
    return 0


def cmd_audit_decomp(args) -> int:
    H = _load_three_graph(args.graph)
    P = hio.load(args.decomp, "decomposition")
    aud = audit(H, P, args.eps1, args.eps2, reference=args.reference,
                threads=_threads(args))
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    doc = _audit_doc(aud, args.mu)
    (out_dir / "report.json").write_text(_json_text(doc), encoding="utf-8")
    _write_triads_csv(out_dir / "triads.csv", aud.rows)
    if not args.no_figures:
        density_histogram([float(r.density) for r in aud.rows],
                          out_dir / "density_hist.svg")
    cov = float(aud.homogeneity_coverage(args.mu))
    print(f"audited {len(aud.rows)} triads: "
          f"{doc['failing_triads']} failing, homogeneity coverage {cov:.4f} "
          f"at mu={args.mu} -> {out_dir}")
    return 0


# --------------------------------------------------------------------------
# searches and reductions


def cmd_reduce(args) -> int:
    B = hio.load(args.bigraph, "bigraph")
    res = sim_quotient(B)
    doc = {
        "u": B.u_size,
        "v": B.v_size,
        "u_reduced": res.quotient.u_size,
        "v_reduced": res.quotient.v_size,
        "row_map": list(res.row_map),
        "col_map": list(res.col_map),
        "row_classes": [list(c) for c in res.row_classes],
        "col_classes": [list(c) for c in res.col_classes],
    }
    if args.out:
        hio.save(res.quotient, args.out)
        doc["quotient_file"] = args.out
    _emit(doc, None)
    return 0


def cmd_vc2(args) -> int:
    H = _load_three_graph(args.graph)
    res = vc2(H, args.cap, mode=args.mode, trials=args.trials, seed=args.seed)
    doc = {"value": res.value, "exact": res.exact, "cap": args.cap, "mode": args.mode}
    if res.witness is not None:
        cells = sorted(
            ((sorted(sorted(p) for p in key), v) for key, v in res.witness.c.items()),
            key=lambda kv: kv[0])
        doc["witness"] = {
            "a": list(res.witness.a),
            "b": list(res.witness.b),
            "c": [{"pairs": pairs, "vertex": v} for pairs, v in cells],
        }
    _emit(doc, args.out)
    return 0


def cmd_find(args) -> int:
    host = hio.load(args.host, "bigraph")
    kind, k = _parse_pattern(args.pattern)
    pattern = canonical(kind, k)
    outcome = find_induced(host, pattern, budget=args.budget)
    doc = {
        "pattern": f"{kind}:{k}",
        "pattern_shape": [pattern.u_size, pattern.v_size],
        "found": outcome.found,
        "definitive": outcome.definitive,
        "trials": outcome.trials,
    }
    if outcome.found:
        doc["embedding"] = {"rows": list(outcome.witness.row_map),
                            "cols": list(outcome.witness.col_map)}
    _emit(doc, args.out)
    return 0


def cmd_corner(args) -> int:
    H = _load_three_graph(args.graph)
    P = hio.load(args.decomp, "decomposition")
    pairs = [_pair(p) for p in args.pair] if args.pair else None
    family = corner_graph(H, P, args.eps2, lo=args.lo, hi=args.hi,
                          reference=args.reference, eps1=args.eps1, pairs=pairs)
    doc = {
        "eps2": args.eps2,
        "lo": args.lo,
        "hi": args.hi,
        "reference": args.reference,
        "e2_total": family.e2_count(),
        "pairs": [_corner_doc(family[p]) for p in sorted(family)],
    }
    _emit(doc, args.out)
    return 0


def cmd_cluster(args) -> int:
    E = hio.load(args.ecb, "ecb")
    res = haussler_cluster(E, args.delta, args.eps)
    _emit(_cluster_doc(res), args.out)
    return 0


def cmd_refine(args) -> int:
    H = _load_three_graph(args.graph)
    P = hio.load(args.decomp, "decomposition")
    try:
        grouped = group_colors(H, P, args.cap, args.eps1, args.eps2, args.hom,
                               delta=args.delta, mu=args.mu,
                               threshold=args.threshold,
                               cluster_eps=args.cluster_eps,
                               reference=args.reference,
                               threads=_threads(args))
    except CapExceededError as exc:
        if args.report:
            Path(args.report).write_text(_json_text({
                "failed": "cap_exceeded",
                "cap": exc.cap,
                "pair": list(exc.pair) if exc.pair else None,
                "reps": exc.reps,
            }), encoding="utf-8")
        print(f"error: {exc}", file=sys.stderr)
        return 2
    hio.save(grouped.decomposition, args.out)
    if args.report:
        Path(args.report).write_text(_json_text(_grouping_doc(grouped, args.mu)),
                                     encoding="utf-8")
        if not args.no_figures:
            stem = Path(args.report)
            density_histogram([float(r.density) for r in grouped.audit.rows],
                              stem.with_name(stem.stem + "_density_hist.svg"))
    print(f"grouped {P.ell} -> {grouped.ell_prime} colors "
          f"(cap {args.cap}, achieved: {grouped.cap_achieved}) -> {args.out}")
    return 0


# --------------------------------------------------------------------------
# demos


def _demo_emit(doc: dict, out: str | None, kind: str) -> None:
    if out:
        out_dir = Path(out)
        out_dir.mkdir(parents=True, exist_ok=True)
        (out_dir / f"demo_{kind}.json").write_text(_json_text(doc), encoding="utf-8")


def cmd_demo_constant(args) -> int:
    inst = lower_bound_instance("M", 2, args.n, args.seed,
                                target_dev=args.target_dev)
    refined, split_map = split_colors(inst.natural, 2, args.seed + 1)
    grouped = group_colors(inst.graph, refined, cap=2, eps1=args.eps1,
                           eps2=args.eps2, hom=args.hom)
    inverts = True
    for (i, j), groups in grouped.provenance.items():
        want = {frozenset(v) for v in split_map[(i, j)].values()}
        got = {frozenset(v) for v in groups.values()}
        if got != want:
            inverts = False
    coverage = float(grouped.audit.homogeneity_coverage(args.mu))
    doc = {
        "demo": "constant",
        "n": args.n,
        "seed": args.seed,
        "ell_natural": inst.natural.ell,
        "ell_split": refined.ell,
        "ell_prime": grouped.ell_prime,
        "cap_achieved": grouped.cap_achieved,
        "provenance_inverts_split": inverts,
        "homogeneity_coverage": coverage,
        "audit_pass": all(r.dev23_passes for r in grouped.audit.rows),
    }
    ok = grouped.cap_achieved and inverts and coverage >= 0.9
    doc["expectation_met"] = ok
    print(f"constant-size demo: split 2 -> {refined.ell} colors, regrouped to "
          f"{grouped.ell_prime}; split inverted: {inverts}; "
          f"homogeneity coverage {coverage:.4f}")
    _demo_emit(doc, args.out, "constant")
    _emit(doc, None)
    return 0 if ok else 2


def cmd_demo_polynomial(args) -> int:
    rows = []
    ok = True
    for size in (2, 3, 4):
        inst = lower_bound_instance("M", size, args.n, args.seed + size,
                                    target_dev=args.target_dev)
        grouped = group_colors(inst.graph, inst.natural, cap=size,
                               eps1=args.eps1, eps2=args.eps2, hom=args.hom)
        coverage = float(grouped.audit.homogeneity_coverage(args.mu))
        row = {
            "matching_size": size,
            "ell": inst.natural.ell,
            "cap_pass": {
                "cap": size,
                "ell_prime": grouped.ell_prime,
                "cap_achieved": grouped.cap_achieved,
                "homogeneity_coverage": coverage,
            },
        }
        try:
            group_colors(inst.graph, inst.natural, cap=size - 1,
                         eps1=args.eps1, eps2=args.eps2, hom=args.hom)
            row["cap_fail"] = None
            ok = False
        except CapExceededError as exc:
            row["cap_fail"] = {"cap": size - 1, "pair": list(exc.pair),
                               "reps": exc.reps}
        ok = ok and grouped.cap_achieved and coverage >= 0.9
        rows.append(row)
        fail = row["cap_fail"]
        fail_msg = (f"cap {size - 1} rejected (pair {tuple(fail['pair'])}, "
                    f"needs {fail['reps']})" if fail else
                    f"cap {size - 1} unexpectedly succeeded")
        print(f"matching size {size}: cap {size} -> ell' = {grouped.ell_prime}, "
              f"coverage {coverage:.4f}; {fail_msg}")
    doc = {"demo": "polynomial", "n": args.n, "seed": args.seed, "rows": rows,
           "expectation_met": ok}
    _demo_emit(doc, args.out, "polynomial")
    _emit(doc, None)
    return 0 if ok else 2


def cmd_demo_exponential(args) -> int:
    k = args.k
    inst = lower_bound_instance("Ubg", k, args.n, args.seed,
                                target_dev=args.target_dev)
    aud = audit(inst.graph, inst.natural, args.eps1, args.eps2,
                reference="per-pair")
    coverage = float(aud.homogeneity_coverage(args.mu))
    n_colors = 1 << k
    merges = []
    all_break = True
    for u in range(n_colors):
        for u2 in range(u + 1, n_colors):
            rep = merge_colors_demo(inst, u, u2)
            homogeneous = rep.homogeneous(args.mu)
            all_break = all_break and not homogeneous
            merges.append({
                "colors": [u, u2],
                "distinguishing_class": rep.v,
                "k3": rep.k3,
                "density": _scalar(rep.density),
                "homogeneous": homogeneous,
            })
            print(f"merge colors ({u}, {u2}): density {float(rep.density):.4f} "
                  f"on class {rep.v} -> homogeneous: {homogeneous}")
    ok = all_break and coverage >= 0.9
    doc = {
        "demo": "exponential",
        "k": k,
        "n": args.n,
        "seed": args.seed,
        "natural_ell": inst.natural.ell,
        "natural_homogeneity_coverage": coverage,
        "merges": merges,
        "all_merges_break_homogeneity": all_break,
        "expectation_met": ok,
    }
    print(f"natural ell = {inst.natural.ell} decomposition coverage: {coverage:.4f}; "
          f"all {len(merges)} merges break homogeneity: {all_break}")
    _demo_emit(doc, args.out, "exponential")
    _emit(doc, None)
    return 0 if ok else 2


def cmd_ack(args) -> int:
    print(ack(args.k, args.x, bit_limit=args.bit_limit))
    return 0


# --------------------------------------------------------------------------
# parser


def _add_common_gen(p, need_seed=True):
    p.add_argument("--seed", type=int, required=need_seed,
                   help="PRNG seed (required; no ambient randomness)")
    p.add_argument("--out", required=True, help="output directory")


def build_parser() -> argparse.ArgumentParser:
    top = _Parser(prog="hyperreg",
                  description="strong hypergraph regularity toolkit")
    top.add_argument("--version", action="version", version=f"hyperreg {__version__}")
    sub = top.add_subparsers(dest="command", metavar="command")

    # gen ------------------------------------------------------------------
    gen = sub.add_parser("gen", help="generate instances (writes artifacts + manifest)")
    gsub = gen.add_subparsers(dest="generator", metavar="generator")

    g = gsub.add_parser("blowup", help="blowup of a canonical base pattern")
    g.add_argument("--base", required=True, help="pattern, e.g. M:2, H:3, Mbar:2, Ubg:2")
    g.add_argument("--n", type=int, required=True, help="vertices per part/class")
    g.add_argument("--ell", default="auto",
                   help="color budget; fixed by the base pattern, so 'auto' or that value")
    g.add_argument("--target-dev", type=float, default=0.005)
    g.add_argument("--retries", type=int, default=8)
    g.add_argument("--fill", default="empty", help="'empty' or 'random:p' for non-crossing triples")
    _add_common_gen(g)
    g.set_defaults(func=cmd_gen_blowup)

    g = gsub.add_parser("lb", help="canonical lower-bound instance")
    g.add_argument("--kind", required=True, choices=sorted(_PATTERN_KINDS),
                   help="canonical base family")
    g.add_argument("--l", "--k", dest="size", type=int, help="pattern order")
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--target-dev", type=float, default=0.005)
    g.add_argument("--retries", type=int, default=8)
    g.add_argument("--fill", default="empty")
    _add_common_gen(g)
    g.set_defaults(func=cmd_gen_lb)

    g = gsub.add_parser("random3", help="binomial random 3-graph")
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--p", type=float, required=True)
    _add_common_gen(g)
    g.set_defaults(func=cmd_gen_random3)

    g = gsub.add_parser("bigraph", help="binomial random bigraph")
    g.add_argument("--u", type=int, required=True)
    g.add_argument("--v", type=int, required=True)
    g.add_argument("--p", type=float, required=True)
    _add_common_gen(g)
    g.set_defaults(func=cmd_gen_bigraph)

    g = gsub.add_parser("decomp", help="random decomposition (near-equal blocks, uniform colors)")
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--t", type=int, required=True)
    g.add_argument("--ell", type=int, required=True)
    _add_common_gen(g)
    g.set_defaults(func=cmd_gen_decomp)

    # audit ----------------------------------------------------------------
    aud = sub.add_parser("audit", help="deviation and decomposition audits")
    asub = aud.add_subparsers(dest="audit_kind", metavar="kind")

    a = asub.add_parser("dev2", help="pair deviation of a bigraph")
    a.add_argument("--input", required=True, help="bigraph JSON")
    a.add_argument("--exact", action="store_true", help="exact rational sums")
    a.add_argument("--eps2", type=float, help="report pass/fail at this threshold")
    a.add_argument("--d", type=float, help="reference density (defaults to measured)")
    a.add_argument("--out", help="write report JSON here instead of stdout")
    a.set_defaults(func=cmd_audit_dev2)

    a = asub.add_parser("dev23", help="triple deviation of a relation over a triad")
    a.add_argument("--input", required=True, help="dev23_instance JSON")
    a.add_argument("--exact", action="store_true")
    a.add_argument("--eps1", type=float)
    a.add_argument("--eps2", type=float)
    a.add_argument("--out")
    a.set_defaults(func=cmd_audit_dev23)

    a = asub.add_parser("decomp", help="full triad audit of a decomposition")
    a.add_argument("--graph", required=True, help="three_graph JSON or edge-list text")
    a.add_argument("--decomp", required=True)
    a.add_argument("--eps1", type=float, required=True)
    a.add_argument("--eps2", type=float, required=True)
    a.add_argument("--mu", type=float, default=0.1)
    a.add_argument("--reference", choices=["self", "uniform", "per-pair"], default="self")
    a.add_argument("--threads", type=int)
    a.add_argument("--out", required=True, help="output directory (JSON report + CSV table)")
    a.add_argument("--no-figures", action="store_true",
                   help="skip the SVG density histogram")
    a.set_defaults(func=cmd_audit_decomp)

    # the rest ---------------------------------------------------------------
    p = sub.add_parser("reduce", help="similarity quotient of a bigraph")
    p.add_argument("--bigraph", required=True)
    p.add_argument("--out", help="write the quotient as bigraph JSON")
    p.set_defaults(func=cmd_reduce)

    p = sub.add_parser("vc2", help="two-dimensional shattering bound")
    p.add_argument("--graph", required=True, help="three_graph JSON or edge-list text")
    p.add_argument("--cap", type=int, required=True)
    p.add_argument("--mode", choices=["exhaustive", "random"], default="exhaustive",
                   help="exhaustive is exact for k <= 2; random only ever certifies lower bounds")
    p.add_argument("--trials", type=int, default=2000)
    p.add_argument("--seed", type=int, help="required in random mode")
    p.add_argument("--out")
    p.set_defaults(func=cmd_vc2)

    p = sub.add_parser("find", help="induced copy of a canonical pattern in a bigraph")
    p.add_argument("--host", required=True)
    p.add_argument("--pattern", required=True, help="e.g. H:3, M:2, Mbar:2, Ubg:2")
    p.add_argument("--budget", type=int,
                   help="search-node budget; required for patterns with a side beyond 8 "
                        "(verdicts then stop being definitive)")
    p.add_argument("--out")
    p.set_defaults(func=cmd_find)

    p = sub.add_parser("corner", help="corner graphs of a decomposition")
    p.add_argument("--graph", required=True)
    p.add_argument("--decomp", required=True)
    p.add_argument("--eps2", type=float, required=True)
    p.add_argument("--lo", type=float, default=0.5)
    p.add_argument("--hi", type=float, default=0.5)
    p.add_argument("--eps1", type=float,
                   help="also route triads failing the counting check to the error color")
    p.add_argument("--reference", choices=["self", "uniform", "per-pair"],
                   default="per-pair")
    p.add_argument("--pair", action="append", help="restrict to this block pair, e.g. 0,1")
    p.add_argument("--out")
    p.set_defaults(func=cmd_corner)

    p = sub.add_parser("cluster", help="first-fit clustering of a 3-colored bigraph")
    p.add_argument("--ecb", required=True, help="edge-colored bigraph JSON")
    p.add_argument("--delta", type=float, required=True)
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_cluster)

    p = sub.add_parser("refine", help="group a decomposition's colors down to a cap")
    p.add_argument("--graph", required=True)
    p.add_argument("--decomp", required=True)
    p.add_argument("--cap", type=int, required=True)
    p.add_argument("--eps1", type=float, required=True)
    p.add_argument("--eps2", type=float, required=True)
    p.add_argument("--hom", type=float, required=True,
                   help="homogeneity margin for dense/sparse classification")
    p.add_argument("--delta", type=float, help="clustering radius (default hom/10)")
    p.add_argument("--mu", type=float, default=0.1)
    p.add_argument("--threshold", type=float,
                   help="bad-pair cutoff factor (default eps1^(3/4))")
    p.add_argument("--cluster-eps", type=float,
                   help="error-neighborhood bound for clustering (default eps1)")
    p.add_argument("--reference", choices=["self", "uniform", "per-pair"],
                   default="per-pair")
    p.add_argument("--threads", type=int)
    p.add_argument("--out", required=True, help="write the grouped decomposition here")
    p.add_argument("--report", help="write the grouping report JSON here")
    p.add_argument("--no-figures", action="store_true")
    p.set_defaults(func=cmd_refine)

    # demo -------------------------------------------------------------------
    demo = sub.add_parser("demo", help="end-to-end desk-scale demonstrations")
    dsub = demo.add_subparsers(dest="demo_kind", metavar="kind")

    d = dsub.add_parser("constant", help="split/regroup round trip at matching size 2")
    d.add_argument("--n", type=int, default=48)
    d.add_argument("--seed", type=int, default=7)
    d.add_argument("--target-dev", type=float, default=0.005)
    d.add_argument("--eps1", type=float, default=0.01)
    d.add_argument("--eps2", type=float, default=0.01)
    d.add_argument("--hom", type=float, default=0.1)
    d.add_argument("--mu", type=float, default=0.1)
    d.add_argument("--out", help="directory for the report JSON")
    d.set_defaults(func=cmd_demo_constant)

    d = dsub.add_parser("polynomial", help="matching blowups force the color cap")
    d.add_argument("--n", type=int, default=64)
    d.add_argument("--seed", type=int, default=7)
    d.add_argument("--target-dev", type=float, default=0.005)
    d.add_argument("--eps1", type=float, default=0.01)
    d.add_argument("--eps2", type=float, default=0.01)
    d.add_argument("--hom", type=float, default=0.1)
    d.add_argument("--mu", type=float, default=0.1)
    d.add_argument("--out")
    d.set_defaults(func=cmd_demo_polynomial)

    d = dsub.add_parser("exponential", help="merging subset-pattern colors breaks homogeneity")
    d.add_argument("--k", type=int, default=2, choices=[2, 3])
    d.add_argument("--n", type=int, default=64)
    d.add_argument("--seed", type=int, default=7)
    d.add_argument("--target-dev", type=float, default=0.005)
    d.add_argument("--eps1", type=float, default=0.01)
    d.add_argument("--eps2", type=float, default=0.01)
    d.add_argument("--mu", type=float, default=0.1)
    d.add_argument("--out")
    d.set_defaults(func=cmd_demo_exponential)

    # ack --------------------------------------------------------------------
    p = sub.add_parser("ack", help="iterated-exponential hierarchy values")
    p.add_argument("--k", type=int, required=True, help="level (1 = power, 2 = tower)")
    p.add_argument("--x", type=int, required=True)
    p.add_argument("--bit-limit", type=int, default=DEFAULT_BIT_LIMIT,
                   help="saturate results whose binary size would exceed this")
    p.set_defaults(func=cmd_ack)

    return top


def main(argv=None) -> int:
    if argv is None:
        argv = sys.argv[1:]
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    if not hasattr(args, "func"):
        parser.print_help(sys.stderr)
        return 1
    args.argv = list(argv)
    try:
        return int(args.func(args) or 0)
    except FormatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except (CapExceededError, GenerationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except DomainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    raise SystemExit(main())
