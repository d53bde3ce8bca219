"""Serialization: deterministic JSON documents, schema validation, and the
plain-text edge-list importer."""

import base64
import json

import numpy as np
import pytest

from hyperreg import (Bigraph, Decomposition, DomainError, EdgeColoredBigraph,
                      FormatError, ThreeGraph, Triad, Trigraph,
                      random_decomposition)
from hyperreg import io as hio


def roundtrip(obj):
    return hio.from_doc(json.loads(hio.dumps(hio.to_doc(obj))))


def test_bigraph_roundtrip_with_padded_rows():
    rng = np.random.default_rng(3)
    B = Bigraph.random(5, 11, 0.4, rng)      # 11 columns forces padding bits
    assert roundtrip(B) == B
    doc = hio.to_doc(B)
    assert (doc["version"], doc["kind"]) == ("hyperreg-v1", "bigraph")
    assert len(doc["rows"]) == 5


def test_three_graph_roundtrip_sorts_edges():
    H = ThreeGraph(6, [(4, 2, 5), (0, 1, 2), (1, 3, 5)])
    doc = hio.to_doc(H)
    assert doc["edges"] == sorted(doc["edges"])
    got = roundtrip(H)
    assert got.n == H.n and got.edges == H.edges


def test_decomposition_roundtrip():
    P = random_decomposition(10, 3, 4, seed=11)
    assert roundtrip(P) == P


def test_ecb_roundtrip():
    E = EdgeColoredBigraph(np.array([[0, 2, 1], [1, 1, 0]]), n_colors=3)
    got = roundtrip(E)
    assert got.n_colors == 3
    assert np.array_equal(got.color, E.color)


def test_dev23_instance_roundtrip():
    rng = np.random.default_rng(5)
    G = Triad(Bigraph.random(3, 4, 0.6, rng), Bigraph.random(3, 5, 0.6, rng),
              Bigraph.random(4, 5, 0.6, rng))
    rel = rng.random((3, 4, 5)) < 0.5
    H = Trigraph(rel)
    doc = hio.dev23_instance_to_doc(H, G)
    H2, G2 = hio.from_doc(json.loads(hio.dumps(doc)))
    assert np.array_equal(H2.rel, H.rel)
    assert G2.exy == G.exy and G2.exz == G.exz and G2.eyz == G.eyz
    with pytest.raises(DomainError):
        hio.dev23_instance_to_doc(Trigraph(np.zeros((2, 2, 2), dtype=bool)), G)


def test_dumps_is_canonical():
    doc = hio.to_doc(ThreeGraph(4, [(0, 1, 2)]))
    text = hio.dumps(doc)
    assert text.endswith("\n") and not text.endswith("\n\n")
    assert ": " not in text and ", " not in text          # compact separators
    keys = list(json.loads(text))
    assert keys == sorted(keys)
    shuffled = dict(reversed(list(doc.items())))
    assert hio.dumps(shuffled) == text


def test_save_load_roundtrip(tmp_path):
    P = random_decomposition(8, 2, 2, seed=0)
    path = tmp_path / "p.json"
    hio.save(P, path)
    assert hio.load(path, expect_kind="decomposition") == P
    assert hio.load(path) == P
    with pytest.raises(FormatError, match="expected kind"):
        hio.load(path, expect_kind="bigraph")
    # byte-identical on re-save
    first = path.read_bytes()
    hio.save(P, path)
    assert path.read_bytes() == first


def test_manifest_documents_pass_through(tmp_path):
    doc = {"version": "hyperreg-v1", "kind": "manifest", "command": "gen",
           "argv": ["gen"], "parameters": {"n": 4}, "seed": 7,
           "prng": "pcg64", "tool_version": "0.1.0",
           "outputs": {"out.json": "0" * 64}}
    path = tmp_path / "m.json"
    hio.save(doc, path)
    assert hio.load(path, expect_kind="manifest") == doc
    bad = dict(doc, outputs={"out.json": "not-a-digest"})
    with pytest.raises(FormatError, match="schema violation"):
        hio.from_doc(bad)


def test_header_and_schema_errors():
    with pytest.raises(FormatError, match="must be a JSON object"):
        hio.from_doc([1, 2])
    with pytest.raises(FormatError, match="version mismatch"):
        hio.from_doc({"version": "hyperreg-v0", "kind": "bigraph"})
    with pytest.raises(FormatError, match="unknown document kind"):
        hio.from_doc({"version": "hyperreg-v1", "kind": "graph"})
    doc = hio.to_doc(Bigraph.complete(2, 2))
    del doc["rows"]
    with pytest.raises(FormatError, match="schema violation"):
        hio.from_doc(doc)


def test_load_reports_json_position_and_missing_file(tmp_path):
    path = tmp_path / "broken.json"
    path.write_text('{"version": "hyperreg-v1",\n  "kind": }\n')
    with pytest.raises(FormatError, match=r"line 2 column 11"):
        hio.load(path)
    with pytest.raises(FormatError, match="no.json"):
        hio.load(tmp_path / "no.json")


def test_bit_row_decode_errors():
    base = hio.to_doc(Bigraph.complete(1, 3))
    with pytest.raises(FormatError, match="schema violation"):
        hio.from_doc(dict(base, rows=["@@@@"]))   # schema screens the alphabet
    bad64 = dict(base, rows=["A"])                # schema-clean, wrong length
    with pytest.raises(FormatError, match="invalid base64"):
        hio.from_doc(bad64)
    short = dict(base, rows=[])
    with pytest.raises(FormatError, match="expected 1 bit-rows"):
        hio.from_doc(short)
    two_bytes = dict(base, rows=[base64.b64encode(b"\x07\x00").decode()])
    with pytest.raises(FormatError, match="expected 1 bytes"):
        hio.from_doc(two_bytes)
    dirty_padding = dict(base, rows=[base64.b64encode(b"\x0f").decode()])
    with pytest.raises(FormatError, match="padding bits"):
        hio.from_doc(dirty_padding)


def test_decomposition_decode_errors():
    P = random_decomposition(6, 2, 2, seed=1)
    doc = hio.to_doc(P)
    bad_key = dict(doc, pair_colors=dict(doc["pair_colors"], **{"1,x": doc["pair_colors"]["0,0"]}))
    with pytest.raises(FormatError, match="schema violation at pair_colors"):
        hio.from_doc(bad_key)
    out_of_range = dict(doc, pair_colors=dict(doc["pair_colors"], **{"0,5": doc["pair_colors"]["0,0"]}))
    with pytest.raises(FormatError, match="out of range"):
        hio.from_doc(out_of_range)
    # color byte >= ell: constructor rejection surfaces as a format error
    rows_high = [base64.b64encode(bytes([9] * 3)).decode()] * 3
    inconsistent = dict(doc, pair_colors={
        k: (rows_high if k == "0,0" else v) for k, v in doc["pair_colors"].items()})
    with pytest.raises(FormatError, match="inconsistent document"):
        hio.from_doc(inconsistent)


def test_constructor_errors_become_format_errors():
    doc = hio.to_doc(ThreeGraph(4, [(0, 1, 2)]))
    degenerate = dict(doc, edges=[[0, 0, 1]])
    with pytest.raises(FormatError, match="inconsistent document"):
        hio.from_doc(degenerate)
    G = Triad(Bigraph.complete(2, 2), Bigraph.complete(2, 2), Bigraph.complete(2, 2))
    inst = hio.dev23_instance_to_doc(Trigraph(np.ones((2, 2, 2), dtype=bool)), G)
    rogue = dict(inst, edges=[[0, 0, 5]])
    with pytest.raises(FormatError, match="out of range"):
        hio.from_doc(rogue)


def test_to_doc_rejects_unknown_and_wide_colors():
    with pytest.raises(DomainError, match="no document form"):
        hio.to_doc(object())
    wide = Decomposition(2, [[0], [1]], 300, {
        (0, 0): np.array([[299]]), (0, 1): np.array([[0]]),
        (1, 0): np.array([[0]]), (1, 1): np.array([[299]])})
    with pytest.raises(DomainError, match="one byte"):
        hio.to_doc(wide)


def test_read_edge_list(tmp_path):
    path = tmp_path / "edges.txt"
    path.write_text("# header comment\n\n0 1 2\n3 1 0   # trailing comment\n")
    H = hio.read_edge_list(path)
    assert H.n == 4
    assert H.has_edge(0, 1, 2) and H.has_edge(3, 1, 0)
    assert hio.read_edge_list(path, n=9).n == 9
    bad = tmp_path / "bad.txt"
    bad.write_text("0 1\n")
    with pytest.raises(FormatError, match=r"bad\.txt:1: expected three"):
        hio.read_edge_list(bad)
    bad.write_text("\n0 one 2\n")
    with pytest.raises(FormatError, match=r"bad\.txt:2: non-integer"):
        hio.read_edge_list(bad)
