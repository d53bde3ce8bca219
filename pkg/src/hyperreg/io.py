"""Instance file formats (version "hyperreg-v1").

Boolean matrices travel as base64 bit-rows (little bit order: bit j of a row
encodes column j); color matrices as base64 byte rows (one byte per cell, so
at most 256 colors).  Every document carries "version" and "kind" fields and
is validated against the JSON schema shipped under schemas/.

Documents are serialized with sorted keys and fixed separators so identical
objects produce identical bytes — the reproducibility contract of generated
artifacts depends on it.
"""

from __future__ import annotations

import base64
import json
from importlib import resources

import jsonschema
import numpy as np

from .core import Bigraph, Decomposition, ThreeGraph, Triad, Trigraph
from .errors import DomainError, FormatError
from .structure import EdgeColoredBigraph

__all__ = [
    "FORMAT_VERSION",
    "KINDS",
    "bigraph_to_doc",
    "bigraph_from_doc",
    "three_graph_to_doc",
    "three_graph_from_doc",
    "decomposition_to_doc",
    "decomposition_from_doc",
    "ecb_to_doc",
    "ecb_from_doc",
    "dev23_instance_to_doc",
    "dev23_instance_from_doc",
    "to_doc",
    "from_doc",
    "dumps",
    "save",
    "load",
    "validate",
    "read_edge_list",
]

FORMAT_VERSION = "hyperreg-v1"
KINDS = ("bigraph", "three_graph", "decomposition", "ecb", "dev23_instance", "manifest")


def _encode_bit_rows(mat: np.ndarray) -> list[str]:
    packed = np.packbits(mat.astype(bool), axis=1, bitorder="little")
    return [base64.b64encode(row.tobytes()).decode("ascii") for row in packed]


def _decode_bit_rows(rows: list[str], n_rows: int, n_cols: int) -> np.ndarray:
    if len(rows) != n_rows:
        raise FormatError(f"expected {n_rows} bit-rows, got {len(rows)}")
    need = (n_cols + 7) // 8
    out = np.zeros((n_rows, n_cols), dtype=bool)
    for i, enc in enumerate(rows):
        try:
            raw = base64.b64decode(enc, validate=True)
        except Exception as exc:
            raise FormatError(f"row {i}: invalid base64: {exc}") from exc
        if len(raw) != need:
            raise FormatError(f"row {i}: expected {need} bytes for {n_cols} columns, got {len(raw)}")
        bits = np.unpackbits(np.frombuffer(raw, dtype=np.uint8), bitorder="little")
        if bits[n_cols:].any():
            raise FormatError(f"row {i}: padding bits beyond column {n_cols} must be zero")
        out[i] = bits[:n_cols]
    return out


def _encode_byte_rows(mat: np.ndarray) -> list[str]:
    if mat.min() < 0 or mat.max() > 255:
        raise DomainError("color values must fit in one byte")
    return [base64.b64encode(row.astype(np.uint8).tobytes()).decode("ascii") for row in mat]


def _decode_byte_rows(rows: list[str], n_rows: int, n_cols: int) -> np.ndarray:
    if len(rows) != n_rows:
        raise FormatError(f"expected {n_rows} byte-rows, got {len(rows)}")
    out = np.zeros((n_rows, n_cols), dtype=np.int16)
    for i, enc in enumerate(rows):
        try:
            raw = base64.b64decode(enc, validate=True)
        except Exception as exc:
            raise FormatError(f"row {i}: invalid base64: {exc}") from exc
        if len(raw) != n_cols:
            raise FormatError(f"row {i}: expected {n_cols} bytes, got {len(raw)}")
        out[i] = np.frombuffer(raw, dtype=np.uint8)
    return out


def bigraph_to_doc(B: Bigraph) -> dict:
    return {"version": FORMAT_VERSION, "kind": "bigraph",
            "u": B.u_size, "v": B.v_size, "rows": _encode_bit_rows(B.adj)}


def _construct(factory, *args):
    try:
        return factory(*args)
    except DomainError as exc:
        raise FormatError(f"inconsistent document: {exc}") from exc


def bigraph_from_doc(doc: dict) -> Bigraph:
    validate(doc, "bigraph")
    return _construct(Bigraph, _decode_bit_rows(doc["rows"], doc["u"], doc["v"]))


def three_graph_to_doc(H: ThreeGraph) -> dict:
    return {"version": FORMAT_VERSION, "kind": "three_graph",
            "n": H.n, "edges": [list(e) for e in sorted(H.edges)]}


def three_graph_from_doc(doc: dict) -> ThreeGraph:
    validate(doc, "three_graph")
    return _construct(ThreeGraph, doc["n"], [tuple(e) for e in doc["edges"]])


def decomposition_to_doc(P: Decomposition) -> dict:
    pair_colors = {}
    for i in range(P.t):
        for j in range(P.t):
            pair_colors[f"{i},{j}"] = _encode_byte_rows(P.pair_colors(i, j))
    return {"version": FORMAT_VERSION, "kind": "decomposition",
            "t": P.t, "blocks": [list(b) for b in P.blocks],
            "ell": P.ell, "pair_colors": pair_colors}


def decomposition_from_doc(doc: dict) -> Decomposition:
    validate(doc, "decomposition")
    blocks = [list(b) for b in doc["blocks"]]
    colors = {}
    for key, rows in doc["pair_colors"].items():
        try:
            i, j = (int(s) for s in key.split(","))
        except ValueError as exc:
            raise FormatError(f"bad pair key {key!r}") from exc
        if not (0 <= i < doc["t"] and 0 <= j < doc["t"]):
            raise FormatError(f"pair key {key!r} out of range for t={doc['t']}")
        colors[(i, j)] = _decode_byte_rows(rows, len(blocks[i]), len(blocks[j]))
    n = sum(len(b) for b in blocks)
    return _construct(Decomposition, n, blocks, doc["ell"], colors)


def ecb_to_doc(E: EdgeColoredBigraph) -> dict:
    return {"version": FORMAT_VERSION, "kind": "ecb",
            "u": E.u_size, "v": E.v_size, "colors": E.n_colors,
            "rows": _encode_byte_rows(E.color)}


def ecb_from_doc(doc: dict) -> EdgeColoredBigraph:
    validate(doc, "ecb")
    return _construct(EdgeColoredBigraph,
                      _decode_byte_rows(doc["rows"], doc["u"], doc["v"]), doc["colors"])


def dev23_instance_to_doc(H: Trigraph, G: Triad) -> dict:
    x, y, z = H.shape
    if G.shape != (x, y, z):
        raise DomainError(f"triad shape {G.shape} does not match relation shape {H.shape}")
    edges = [[int(a), int(b), int(c)] for a, b, c in np.argwhere(H.rel)]
    return {"version": FORMAT_VERSION, "kind": "dev23_instance",
            "x": x, "y": y, "z": z,
            "exy": _encode_bit_rows(G.exy.adj),
            "exz": _encode_bit_rows(G.exz.adj),
            "eyz": _encode_bit_rows(G.eyz.adj),
            "edges": edges}


def dev23_instance_from_doc(doc: dict) -> tuple[Trigraph, Triad]:
    validate(doc, "dev23_instance")
    x, y, z = doc["x"], doc["y"], doc["z"]
    rel = np.zeros((x, y, z), dtype=bool)
    for e in doc["edges"]:
        a, b, c = e
        if not (0 <= a < x and 0 <= b < y and 0 <= c < z):
            raise FormatError(f"edge {e} out of range for shape ({x}, {y}, {z})")
        rel[a, b, c] = True
    triad = _construct(Triad,
                       Bigraph(_decode_bit_rows(doc["exy"], x, y)),
                       Bigraph(_decode_bit_rows(doc["exz"], x, z)),
                       Bigraph(_decode_bit_rows(doc["eyz"], y, z)))
    return _construct(Trigraph, rel), triad


_TO_DOC = {
    Bigraph: bigraph_to_doc,
    ThreeGraph: three_graph_to_doc,
    Decomposition: decomposition_to_doc,
    EdgeColoredBigraph: ecb_to_doc,
}

_FROM_DOC = {
    "bigraph": bigraph_from_doc,
    "three_graph": three_graph_from_doc,
    "decomposition": decomposition_from_doc,
    "ecb": ecb_from_doc,
}


def to_doc(obj) -> dict:
    for cls, fn in _TO_DOC.items():
        if isinstance(obj, cls):
            return fn(obj)
    raise DomainError(f"no document form for {type(obj).__name__}")


def from_doc(doc: dict, expect_kind: str | None = None):
    kind = _check_header(doc)
    if expect_kind is not None and kind != expect_kind:
        raise FormatError(f"expected kind {expect_kind!r}, got {kind!r}")
    if kind == "dev23_instance":
        return dev23_instance_from_doc(doc)
    if kind == "manifest":
        validate(doc, "manifest")
        return doc
    return _FROM_DOC[kind](doc)


def dumps(doc: dict) -> str:
    return json.dumps(doc, sort_keys=True, separators=(",", ":")) + "\n"


def save(obj, path) -> dict:
    doc = obj if isinstance(obj, dict) else to_doc(obj)
    with open(path, "w", encoding="ascii") as fh:
        fh.write(dumps(doc))
    return doc


def load(path, expect_kind: str | None = None):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: malformed JSON at line {exc.lineno} column {exc.colno}: "
                          f"{exc.msg}") from exc
    except OSError as exc:
        raise FormatError(f"{path}: {exc.strerror or exc}") from exc
    return from_doc(doc, expect_kind)


def _check_header(doc) -> str:
    if not isinstance(doc, dict):
        raise FormatError("document must be a JSON object")
    version = doc.get("version")
    if version != FORMAT_VERSION:
        raise FormatError(f"version mismatch: expected {FORMAT_VERSION!r}, got {version!r}")
    kind = doc.get("kind")
    if kind not in KINDS:
        raise FormatError(f"unknown document kind {kind!r}")
    return kind


_SCHEMA_CACHE: dict[str, dict] = {}


def _schema(kind: str) -> dict:
    if kind not in _SCHEMA_CACHE:
        ref = resources.files("hyperreg.schemas").joinpath(f"{kind}.schema.json")
        _SCHEMA_CACHE[kind] = json.loads(ref.read_text(encoding="utf-8"))
    return _SCHEMA_CACHE[kind]


def validate(doc: dict, kind: str | None = None) -> str:
    """Validate a document against its kind's schema; returns the kind."""
    found = _check_header(doc)
    if kind is not None and found != kind:
        raise FormatError(f"expected kind {kind!r}, got {found!r}")
    try:
        jsonschema.validate(doc, _schema(found))
    except jsonschema.ValidationError as exc:
        path = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise FormatError(f"schema violation at {path}: {exc.message}") from exc
    return found


def read_edge_list(path, n: int | None = None) -> ThreeGraph:
    """Plain-text importer: one 'a b c' triple per line; blank lines and
    #-comments ignored.  Vertex count defaults to max index + 1."""
    edges = []
    top = -1
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            body = line.split("#", 1)[0].strip()
            if not body:
                continue
            parts = body.split()
            if len(parts) != 3:
                raise FormatError(f"{path}:{lineno}: expected three vertex ids, got {body!r}")
            try:
                trip = tuple(int(p) for p in parts)
            except ValueError as exc:
                raise FormatError(f"{path}:{lineno}: non-integer vertex id in {body!r}") from exc
            edges.append(trip)
            top = max(top, *trip)
    if n is None:
        n = top + 1
    return ThreeGraph(n, edges)
