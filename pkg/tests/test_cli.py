"""Command-line surface: exit codes, artifact layout, manifests, and the
in-process behavior of every subcommand at desk scale."""

import hashlib
import json

import numpy as np
import pytest

from hyperreg import Bigraph, ThreeGraph, Triad, Trigraph, canonical
from hyperreg import io as hio
from hyperreg.cli import main
from hyperreg.structure import EdgeColoredBigraph

from .oracles import naive_dev2_raw


@pytest.fixture(scope="module")
def blowup_dir(tmp_path_factory):
    out = tmp_path_factory.mktemp("blowup")
    rc = main(["gen", "blowup", "--base", "M:2", "--n", "16",
               "--target-dev", "0.05", "--seed", "1", "--out", str(out)])
    assert rc == 0
    return out


def test_no_command_prints_help(capsys):
    assert main([]) == 1
    assert main(["gen"]) == 1
    assert "hyperreg" in capsys.readouterr().err


def test_usage_errors_exit_1(capsys):
    assert main(["gen", "bigraph", "--u", "4"]) == 1          # missing args
    assert main(["audit", "dev2", "--bogus"]) == 1            # unknown flag
    assert "error:" in capsys.readouterr().err


def test_version_flag(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["--version"])
    assert exc.value.code == 0
    assert "hyperreg" in capsys.readouterr().out


def test_gen_bigraph_writes_artifacts_and_manifest(tmp_path, capsys):
    out = tmp_path / "gen"
    argv = ["gen", "bigraph", "--u", "6", "--v", "7", "--p", "0.5",
            "--seed", "3", "--out", str(out)]
    assert main(argv) == 0
    assert "manifest" in capsys.readouterr().out
    B = hio.load(out / "bigraph.json", "bigraph")
    assert (B.u_size, B.v_size) == (6, 7)
    man = hio.load(out / "manifest.json", "manifest")
    assert man["command"] == "gen bigraph"
    assert man["argv"] == argv
    assert man["parameters"] == {"u": 6, "v": 7, "p": 0.5}
    assert man["seed"] == 3
    digest = hashlib.sha256((out / "bigraph.json").read_bytes()).hexdigest()
    assert man["outputs"] == {"bigraph.json": digest}


def test_gen_rerun_reproduces_artifact_bytes(tmp_path):
    outs = []
    for name in ("a", "b"):
        out = tmp_path / name
        assert main(["gen", "lb", "--kind", "m", "--l", "2", "--n", "8",
                     "--target-dev", "0.2", "--fill", "random:0.5",
                     "--seed", "11", "--out", str(out)]) == 0
        outs.append(out)
    for artifact in ("base.json", "gamma.json", "graph.json", "decomp.json"):
        assert (outs[0] / artifact).read_bytes() == (outs[1] / artifact).read_bytes()
    m0 = hio.load(outs[0] / "manifest.json", "manifest")
    m1 = hio.load(outs[1] / "manifest.json", "manifest")
    assert m0["outputs"] == m1["outputs"]


def test_gen_lb_requires_order(tmp_path, capsys):
    assert main(["gen", "lb", "--kind", "m", "--n", "8", "--seed", "1",
                 "--out", str(tmp_path / "x")]) == 1
    assert "pattern order" in capsys.readouterr().err


def test_gen_blowup_checks_ell(tmp_path, capsys):
    assert main(["gen", "blowup", "--base", "M:2", "--ell", "3", "--n", "8",
                 "--target-dev", "0.2", "--seed", "1",
                 "--out", str(tmp_path / "x")]) == 1
    assert "fixes ell = 2" in capsys.readouterr().err


def test_gen_exhausted_retries_exit_2(tmp_path, capsys):
    assert main(["gen", "lb", "--kind", "m", "--l", "2", "--n", "8",
                 "--target-dev", "1e-9", "--retries", "2",
                 "--seed", "1", "--out", str(tmp_path / "x")]) == 2
    assert "error:" in capsys.readouterr().err


def test_audit_dev2_stdout_and_exact(tmp_path, capsys):
    rng = np.random.default_rng(2)
    B = Bigraph.random(5, 6, 0.5, rng)
    path = tmp_path / "b.json"
    hio.save(B, path)
    assert main(["audit", "dev2", "--input", str(path), "--exact",
                 "--eps2", "0.05"]) == 0
    doc = json.loads(capsys.readouterr().out)
    want = naive_dev2_raw(B.adj)
    assert doc["exact"] is True
    assert doc["raw_sum"]["exact"] == f"{want.numerator}/{want.denominator}"
    assert doc["passes"] == (doc["normalized_sum"]["value"] <= 0.05)
    out_file = tmp_path / "report.json"
    assert main(["audit", "dev2", "--input", str(path),
                 "--out", str(out_file)]) == 0
    assert capsys.readouterr().out == ""
    assert json.loads(out_file.read_text())["exact"] is False


def test_audit_dev23_roundtrip(tmp_path, capsys):
    rng = np.random.default_rng(4)
    G = Triad(Bigraph.random(4, 4, 0.7, rng), Bigraph.random(4, 4, 0.7, rng),
              Bigraph.random(4, 4, 0.7, rng))
    H = Trigraph(rng.random((4, 4, 4)) < 0.5)
    path = tmp_path / "inst.json"
    hio.save(hio.dev23_instance_to_doc(H, G), path)
    assert main(["audit", "dev23", "--input", str(path), "--exact",
                 "--eps1", "0.5", "--eps2", "0.9"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["shape"] == [4, 4, 4]
    assert doc["exact"] is True
    assert len(doc["components"]) == 3
    assert isinstance(doc["passes"], bool)


def test_audit_decomp_renders_report_csv_and_figure(tmp_path, capsys):
    gdir, ddir, outdir = tmp_path / "g", tmp_path / "d", tmp_path / "audit"
    assert main(["gen", "random3", "--n", "18", "--p", "0.4", "--seed", "6",
                 "--out", str(gdir)]) == 0
    assert main(["gen", "decomp", "--n", "18", "--t", "2", "--ell", "2",
                 "--seed", "5", "--out", str(ddir)]) == 0
    assert main(["audit", "decomp", "--graph", str(gdir / "graph.json"),
                 "--decomp", str(ddir / "decomp.json"),
                 "--eps1", "0.5", "--eps2", "0.9", "--out", str(outdir)]) == 0
    assert "audited" in capsys.readouterr().out
    report = json.loads((outdir / "report.json").read_text())
    assert (report["n"], report["t"], report["ell"]) == (18, 2, 2)
    csv_lines = (outdir / "triads.csv").read_text().splitlines()
    assert len(csv_lines) == report["triads"] + 1
    header = csv_lines[0]
    assert header == ("i,j,k,color_xy,color_xz,color_yz,size_x,size_y,size_z,"
                      "k3,density,density_exact,vacuous,normalized_dev23,"
                      "degenerate,components_pass,dev23_passes")
    svg = (outdir / "density_hist.svg").read_bytes()
    assert svg.startswith(b"<?xml")
    bare = tmp_path / "bare"
    assert main(["audit", "decomp", "--graph", str(gdir / "graph.json"),
                 "--decomp", str(ddir / "decomp.json"), "--eps1", "0.5",
                 "--eps2", "0.9", "--no-figures", "--out", str(bare)]) == 0
    assert not (bare / "density_hist.svg").exists()
    assert (bare / "triads.csv").exists()


def test_figures_are_deterministic(tmp_path):
    gdir, ddir = tmp_path / "g", tmp_path / "d"
    main(["gen", "random3", "--n", "12", "--p", "0.5", "--seed", "2", "--out", str(gdir)])
    main(["gen", "decomp", "--n", "12", "--t", "2", "--ell", "2", "--seed", "2",
          "--out", str(ddir)])
    svgs = []
    for name in ("one", "two"):
        out = tmp_path / name
        assert main(["audit", "decomp", "--graph", str(gdir / "graph.json"),
                     "--decomp", str(ddir / "decomp.json"), "--eps1", "0.5",
                     "--eps2", "0.9", "--out", str(out)]) == 0
        svgs.append((out / "density_hist.svg").read_bytes())
    assert svgs[0] == svgs[1]


def test_reduce_command(tmp_path, capsys):
    B = Bigraph(np.array([[True, False], [True, False], [False, True]]))
    path = tmp_path / "b.json"
    hio.save(B, path)
    quot = tmp_path / "q.json"
    assert main(["reduce", "--bigraph", str(path), "--out", str(quot)]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert (doc["u"], doc["u_reduced"]) == (3, 2)
    assert doc["row_classes"] == [[0, 1], [2]]
    Q = hio.load(quot, "bigraph")
    assert Q.u_size == 2


def test_vc2_accepts_edge_list_text(tmp_path, capsys):
    path = tmp_path / "edges.txt"
    lines = ["# planted shattering of a 2x2 grid"]
    vertex = 4
    for mask in range(16):
        for idx, (a, b) in enumerate(((0, 2), (0, 3), (1, 2), (1, 3))):
            if mask >> idx & 1:
                lines.append(f"{a} {b} {vertex}")
        vertex += 1
    path.write_text("\n".join(lines) + "\n")
    assert main(["vc2", "--graph", str(path), "--cap", "2"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["value"] == 2 and doc["exact"] is True
    assert len(doc["witness"]["a"]) == 2 and len(doc["witness"]["c"]) == 16
    assert main(["vc2", "--graph", str(path), "--cap", "1", "--mode", "random"]) == 1
    assert "seed" in capsys.readouterr().err


def test_find_command(tmp_path, capsys):
    host = tmp_path / "host.json"
    hio.save(canonical("Ubg", 3), host)
    assert main(["find", "--host", str(host), "--pattern", "M:3"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["found"] and doc["definitive"]
    assert len(doc["embedding"]["rows"]) == 3
    assert main(["find", "--host", str(host), "--pattern", "Q:2"]) == 1
    assert "pattern must look like" in capsys.readouterr().err


def test_corner_command(blowup_dir, capsys):
    assert main(["corner", "--graph", str(blowup_dir / "graph.json"),
                 "--decomp", str(blowup_dir / "decomp.json"),
                 "--eps2", "0.05", "--pair", "0,1"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert len(doc["pairs"]) == 1
    entry = doc["pairs"][0]
    assert entry["pair"] == [0, 1]
    assert entry["counts"]["error"] == 0
    assert entry["edge_vertices"]
    # identity color matrix: one dense cell per row, rest sparse
    assert entry["counts"]["dense"] == len(entry["edge_vertices"])


def test_cluster_command(tmp_path, capsys):
    E = EdgeColoredBigraph(np.array([[0, 1, 0, 1], [0, 1, 0, 1], [1, 0, 1, 0]]),
                           n_colors=3)
    path = tmp_path / "ecb.json"
    hio.save(E, path)
    assert main(["cluster", "--ecb", str(path), "--delta", "0.1",
                 "--eps", "0.1"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["m"] == 2
    assert doc["clusters"] == [[0, 1], [2]]
    assert doc["u0"] == []


def test_refine_command_success(blowup_dir, tmp_path, capsys):
    grouped = tmp_path / "grouped.json"
    report = tmp_path / "report.json"
    assert main(["refine", "--graph", str(blowup_dir / "graph.json"),
                 "--decomp", str(blowup_dir / "decomp.json"), "--cap", "2",
                 "--eps1", "0.01", "--eps2", "0.05", "--hom", "0.1",
                 "--out", str(grouped), "--report", str(report)]) == 0
    assert "grouped 2 -> 2 colors" in capsys.readouterr().out
    P = hio.load(grouped, "decomposition")
    assert P.ell == 2
    doc = json.loads(report.read_text())
    assert doc["cap_achieved"] is True
    assert doc["classification"]["error"] == 0
    assert doc["audit"]["failing_triads"] == 0
    assert (tmp_path / "report_density_hist.svg").exists()


def test_refine_cap_exceeded_writes_failure_report(blowup_dir, tmp_path, capsys):
    grouped = tmp_path / "grouped.json"
    report = tmp_path / "fail.json"
    assert main(["refine", "--graph", str(blowup_dir / "graph.json"),
                 "--decomp", str(blowup_dir / "decomp.json"), "--cap", "1",
                 "--eps1", "0.01", "--eps2", "0.05", "--hom", "0.1",
                 "--out", str(grouped), "--report", str(report),
                 "--no-figures"]) == 2
    assert "error:" in capsys.readouterr().err
    assert not grouped.exists()
    doc = json.loads(report.read_text())
    assert doc == {"failed": "cap_exceeded", "cap": 1, "pair": [0, 1], "reps": 2}


def test_demo_constant_small_scale(tmp_path, capsys):
    out = tmp_path / "demo"
    assert main(["demo", "constant", "--n", "16", "--target-dev", "0.05",
                 "--eps2", "0.05", "--seed", "7", "--out", str(out)]) == 0
    doc = json.loads((out / "demo_constant.json").read_text())
    assert doc["expectation_met"] is True
    assert doc["provenance_inverts_split"] is True
    assert (doc["ell_natural"], doc["ell_split"], doc["ell_prime"]) == (2, 4, 2)
    stdout = capsys.readouterr().out
    assert "split inverted: True" in stdout


def test_format_errors_exit_3(tmp_path, capsys):
    assert main(["audit", "dev2", "--input", str(tmp_path / "absent.json")]) == 3
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert main(["audit", "dev2", "--input", str(bad)]) == 3
    wrong_kind = tmp_path / "wrong.json"
    hio.save(ThreeGraph(4, [(0, 1, 2)]), wrong_kind)
    assert main(["audit", "dev2", "--input", str(wrong_kind)]) == 3
    err = capsys.readouterr().err
    assert err.count("error:") == 3


def test_threads_env(tmp_path, capsys, monkeypatch):
    gdir, ddir = tmp_path / "g", tmp_path / "d"
    main(["gen", "random3", "--n", "12", "--p", "0.5", "--seed", "2", "--out", str(gdir)])
    main(["gen", "decomp", "--n", "12", "--t", "2", "--ell", "2", "--seed", "2",
          "--out", str(ddir)])
    monkeypatch.setenv("HYPERREG_THREADS", "2")
    assert main(["audit", "decomp", "--graph", str(gdir / "graph.json"),
                 "--decomp", str(ddir / "decomp.json"), "--eps1", "0.5",
                 "--eps2", "0.9", "--no-figures",
                 "--out", str(tmp_path / "a")]) == 0
    monkeypatch.setenv("HYPERREG_THREADS", "zippy")
    assert main(["audit", "decomp", "--graph", str(gdir / "graph.json"),
                 "--decomp", str(ddir / "decomp.json"), "--eps1", "0.5",
                 "--eps2", "0.9", "--no-figures",
                 "--out", str(tmp_path / "b")]) == 1
    assert "HYPERREG_THREADS" in capsys.readouterr().err


def test_ack_command(capsys):
    assert main(["ack", "--k", "2", "--x", "4"]) == 0
    assert capsys.readouterr().out.strip() == "16"
    assert main(["ack", "--k", "2", "--x", "7", "--bit-limit", "100000"]) == 0
    assert "x=7" in capsys.readouterr().out
    assert main(["ack", "--k", "0", "--x", "1"]) == 1
