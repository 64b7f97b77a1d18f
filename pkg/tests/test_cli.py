import csv
import io
import json

import numpy as np
import pytest

from fracdecomp.cli import EXIT_CONVERGENCE, EXIT_INPUT, EXIT_OK, EXIT_PRECONDITION, EXIT_UNCERTIFIED, main
from fracdecomp.fan_solver import format_weights, parse_weights
from fracdecomp.latin import PartialLatinSquare, format_grid
from fracdecomp.partite_graph import complete_multipartite, format_graph, from_edges, remove_cliques
from graphs import random_balanced_graph


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr().out
    return code, (json.loads(out) if out.startswith("{") else out)


@pytest.fixture
def write(tmp_path):
    def _write(name, text):
        path = tmp_path / name
        path.write_text(text)
        return path
    return _write


def test_spectrum_k3_n4(capsys):
    code, doc = run(capsys, "spectrum", "--k", 3, "--n", 4)
    assert code == EXIT_OK and doc["schema"] == 1 and doc["command"] == "spectrum"
    table = [(e["theta"], e["multiplicity"]) for e in doc["result"]["eigenvalues"]]
    assert table == [(12, 1), (8, 9), (4, 27), (0, 11)]
    assert doc["result"]["spectrum_verified"] and doc["result"]["idempotents_verified"]


def test_spectrum_k4_n2(capsys):
    code, doc = run(capsys, "spectrum", "--k", 4, "--n", 2, "--t", 2, "--no-verify")
    assert code == EXIT_OK
    assert [e["theta"] for e in doc["result"]["eigenvalues"]] == [24, 12, 4, 0]


def test_spectrum_k3_n2_all_verified(capsys):
    code, doc = run(capsys, "spectrum", "--k", 3, "--n", 2)
    flags = [v for key, v in doc["result"].items() if key.endswith("_verified")]
    assert code == EXIT_OK and len(flags) == 3 and all(flags)


def test_spectrum_guard(capsys):
    assert main(["spectrum", "--n", "40"]) == EXIT_INPUT
    assert "exceeds the dense guard" in capsys.readouterr().err


def test_spectrum_text_format(capsys):
    code, out = run(capsys, "spectrum", "--n", 3, "--format", "text", "--no-verify")
    assert code == EXIT_OK and "result.eigenvalues[0].theta: 9" in out


def test_solve_complete(capsys, write, tmp_path):
    g = write("k555.graph", format_graph(complete_multipartite(3, 5)))
    code, doc = run(capsys, "solve", g)
    assert code == EXIT_OK
    report = doc["result"]["report"]
    assert report["certified"] and report["min_triangle_weight"] == pytest.approx(0.2)
    kind, k, n, z = parse_weights((tmp_path / "k555.graph.triangleweights").read_text())
    assert kind == "triangleweights" and len(z) == 125
    assert doc["config"]["eta_multiplier"] == 1.0 and doc["config"]["method"] == "auto"


def test_solve_one_triangle_removed(capsys, write):
    G = remove_cliques(complete_multipartite(3, 6), [[(0, 0), (1, 0), (2, 0)]])
    g = write("g.graph", format_graph(G))
    code, doc = run(capsys, "solve", g, "--fan-out", g.with_suffix(".x"), "--tri-out", g.with_suffix(".z"))
    assert code == EXIT_OK and doc["result"]["report"]["certified"]
    assert g.with_suffix(".z").exists()


def test_solve_unbalanced(capsys, write):
    G = from_edges(3, 2, [(0, 0, 1, 0), (0, 0, 2, 0), (1, 0, 2, 0), (0, 1, 1, 1)])
    assert main(["solve", str(write("bad.graph", format_graph(G)))]) == EXIT_PRECONDITION


def test_solve_input_errors(capsys, write, tmp_path):
    assert main(["solve", str(write("junk.graph", "partite 3\n"))]) == EXIT_INPUT
    assert main(["solve", str(tmp_path / "missing.graph")]) == EXIT_INPUT
    assert main(["solve"]) == EXIT_INPUT
    assert main(["solve", "x", "--solve-tol", "-1"]) == EXIT_INPUT


def test_solve_convergence_failure(capsys, write):
    G = random_balanced_graph(6, np.random.default_rng(3))
    g = write("g.graph", format_graph(G))
    code, doc = run(capsys, "solve", g, "--method", "cg", "--max-iterations", 1)
    assert code == EXIT_CONVERGENCE
    assert not doc["result"]["report"]["converged"]


def test_verify_uniform_and_zero(capsys, write):
    g = write("k222.graph", format_graph(complete_multipartite(3, 2)))
    half = write("half.w", format_weights("triangleweights", 3, 2, np.full(8, 0.5)))
    zero = write("zero.w", format_weights("triangleweights", 3, 2, np.zeros(8)))
    code, doc = run(capsys, "verify", g, half)
    assert code == EXIT_OK and doc["result"]["report"]["certified"]
    code, doc = run(capsys, "verify", g, zero)
    assert code == EXIT_UNCERTIFIED
    assert doc["result"]["report"]["decomposition_residual_inf"] == pytest.approx(1.0)


def test_verify_tampered(capsys, write):
    g = write("k444.graph", format_graph(complete_multipartite(3, 4)))
    z = np.full(64, 0.25)
    z[17] += 0.1
    code, doc = run(capsys, "verify", g, write("t.w", format_weights("triangleweights", 3, 4, z)))
    assert code == EXIT_UNCERTIFIED
    assert doc["result"]["report"]["decomposition_residual_inf"] == pytest.approx(0.1)


def test_verify_fan_weights_from_solve(capsys, write, tmp_path):
    g = write("k333.graph", format_graph(complete_multipartite(3, 3)))
    assert main(["solve", str(g)]) == EXIT_OK
    capsys.readouterr()
    code, doc = run(capsys, "verify", g, tmp_path / "k333.graph.fanweights")
    assert code == EXIT_OK and doc["result"]["weights_kind"] == "fanweights"


def test_verify_dimension_mismatch(capsys, write):
    g = write("k222.graph", format_graph(complete_multipartite(3, 2)))
    w = write("w", format_weights("triangleweights", 3, 3, np.full(27, 1 / 3)))
    assert main(["verify", str(g), str(w)]) == EXIT_INPUT
    w = write("w2", format_weights("triangleweights", 3, 2, np.full(7, 0.5)))
    assert main(["verify", str(g), str(w)]) == EXIT_INPUT


def test_threshold_k3(capsys):
    code, doc = run(capsys, "threshold", "--k", 3)
    tri = doc["result"]["triangles"]
    assert code == EXIT_OK
    assert tri["c_basic"]["float"] == 0.0375 and tri["c_basic"]["exact"] == "3/80"
    assert tri["c_refined"] == pytest.approx(0.0403, abs=1e-4)
    assert tri["tau_basic"]["float"] == 0.9625


def test_threshold_k4(capsys):
    code, doc = run(capsys, "threshold", "--k", 4)
    assert code == EXIT_OK and doc["result"]["clique"]["tau"]["exact"] == "445/448"


def test_threshold_bad_input(capsys):
    assert main(["threshold", "--k", "3", "--t", "5"]) == EXIT_INPUT


def test_latin_empty_order10(capsys, write, tmp_path):
    p = write("empty10.pls", format_grid(PartialLatinSquare(10, frozenset())))
    code, doc = run(capsys, "latin", p, "--tri-out", tmp_path / "z")
    res = doc["result"]
    assert code == EXIT_OK and res["report"]["certified"]
    assert res["triangles"] == 1000
    assert res["min_weight"] == pytest.approx(0.1) and res["max_weight"] == pytest.approx(0.1)
    assert res["density"]["c"]["exact"] == "0"


def test_latin_parse_error(capsys, write):
    assert main(["latin", str(write("bad.pls", "1 1\n. .\n"))]) == EXIT_INPUT


def test_bench_csv(capsys, tmp_path):
    out = tmp_path / "bench.csv"
    assert main(["bench", "--n", "3", "5", "--repeats", "1", "-o", str(out)]) == EXIT_OK
    rows = list(csv.DictReader(io.StringIO(out.read_text())))
    assert list(rows[0]) == ["n", "edges", "triangles", "matvec_ms", "solve_ms", "iterations", "residual"]
    assert [int(r["triangles"]) for r in rows] == [27, 125]
    assert all(float(r["residual"]) <= 1e-8 for r in rows)


def test_generate_round_trip(capsys, tmp_path):
    g = tmp_path / "g"
    assert main(["generate", "complete", "--n", "3", "-o", str(g)]) == EXIT_OK
    assert main(["solve", str(g)]) == EXIT_OK
    capsys.readouterr()
    assert main(["generate", "pls", "--n", "6", "--c", "0.34", "--seed", "2"]) == EXIT_OK
    assert capsys.readouterr().out.count("\n") == 6


def test_json_output_to_file(capsys, tmp_path):
    out = tmp_path / "r.json"
    assert main(["threshold", "--k", "5", "-o", str(out)]) == EXIT_OK
    doc = json.loads(out.read_text())
    assert doc["schema"] == 1 and doc["exit_code"] == 0 and doc["config"]["k"] == 5
