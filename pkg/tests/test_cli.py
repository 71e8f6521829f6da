"""End-to-end CLI runs against temporary files, covering the exit-code
contract and certificate round-trips."""

import json

import numpy as np
import pytest

from covnet.cli import main
from covnet.decompose import decomposition_from_json, verify_decomposition, verify_witness, witness_from_json
from covnet.linalg import matrix_from_json, matrix_to_json
from covnet.network import parse_network

PATH_NET = {
    "parties": ["A1", "A2", "A3"],
    "sources": [
        {"name": "s0", "parties": ["A1", "A2"]},
        {"name": "s1", "parties": ["A2", "A3"]},
    ],
}
TRIANGLE_NET = {
    "parties": ["A1", "A2", "A3"],
    "sources": [
        {"name": "s0", "parties": ["A1", "A2"]},
        {"name": "s1", "parties": ["A2", "A3"]},
        {"name": "s2", "parties": ["A1", "A3"]},
    ],
}
PATH_M = [[1, 1, 0], [1, 2, 1], [0, 1, 1]]

SHARED_BIT = [0.5, 0.0, 0.0, 0.5]
COPY = [1.0, 0.0, 0.0, 1.0]
PAIR = [
    1, 0, 0, 0,
    0, 1, 0, 0,
    0, 0, 1, 0,
    0, 0, 0, 1,
]
PATH_MODEL = {
    "sources": {
        "s0": {"alphabets": [2, 2], "pmf": SHARED_BIT},
        "s1": {"alphabets": [2, 2], "pmf": SHARED_BIT},
    },
    "responses": {
        "A1": {"alphabet": 2, "table": COPY},
        "A2": {"alphabet": 4, "table": PAIR},
        "A3": {"alphabet": 2, "table": COPY},
    },
    "functions": {
        "A1": {"re": [1, -1]},
        "A2": {"re": [2, 0, 0, -2]},
        "A3": {"re": [1, -1]},
    },
}


def _write(tmp_path, name, obj):
    p = tmp_path / name
    p.write_text(json.dumps(obj))
    return str(p)


@pytest.fixture
def files(tmp_path):
    return {
        "path": _write(tmp_path, "path.json", PATH_NET),
        "triangle": _write(tmp_path, "triangle.json", TRIANGLE_NET),
        "mpath": _write(tmp_path, "mpath.json", matrix_to_json(np.array(PATH_M, dtype=float))),
        "ones": _write(tmp_path, "ones.json", matrix_to_json(np.ones((3, 3)))),
        "model": _write(tmp_path, "model.json", PATH_MODEL),
        "tmp": tmp_path,
    }


class TestCheck:
    def test_feasible_exit_zero_with_decomposition(self, files, tmp_path, capsys):
        cert = str(tmp_path / "cert.json")
        code = main(["check", files["path"], files["mpath"], "--certificate", cert, "--json"])
        assert code == 0
        doc = json.loads(capsys.readouterr().out)
        assert doc["status"] == "feasible"
        with open(cert) as fh:
            payload = json.load(fh)
        assert payload["method"] == "decomposition"
        net = parse_network(PATH_NET)
        dec = decomposition_from_json(payload)
        assert verify_decomposition(net, np.array(PATH_M, dtype=float), dec, 1e-6)

    def test_infeasible_exit_one_with_witness(self, files, tmp_path):
        cert = str(tmp_path / "cert.json")
        code = main(["check", files["triangle"], files["ones"], "--certificate", cert])
        assert code == 1
        with open(cert) as fh:
            payload = json.load(fh)
        assert payload["method"] == "witness"
        net = parse_network(TRIANGLE_NET)
        wit = witness_from_json(payload)
        assert verify_witness(net, np.ones((3, 3)), wit, 1e-6)

    def test_fast_only(self, files, tmp_path):
        cert = str(tmp_path / "c.json")
        assert main(["check", files["path"], files["mpath"], "--fast-only",
                     "--certificate", cert]) == 0
        assert main(["check", files["triangle"], files["ones"], "--fast-only",
                     "--certificate", cert]) == 1
        with open(cert) as fh:
            assert json.load(fh)["method"] == "comparison_matrix"

    def test_malformed_json_exit_three(self, files, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text("{nope")
        assert main(["check", files["path"], str(bad)]) == 3

    def test_csv_matrix_accepted(self, files, tmp_path):
        csv = tmp_path / "m.csv"
        csv.write_text("1,1,0\n1,2,1\n0,1,1\n")
        assert main(["check", files["path"], str(csv),
                     "--certificate", str(tmp_path / "c.json")]) == 0


class TestSimulate:
    def test_path_model_covariance(self, files, capsys):
        code = main(["simulate", files["path"], files["model"], "--json"])
        assert code == 0
        doc = json.loads(capsys.readouterr().out)
        cov = matrix_from_json(doc["covariance"])
        assert np.allclose(cov, np.array(PATH_M, dtype=float), atol=1e-12)
        assert doc["summary"]["independence_violations"] == []

    def test_constant_responses_zero_covariance(self, files, tmp_path, capsys):
        model = json.loads(json.dumps(PATH_MODEL))
        model["responses"]["A1"]["table"] = [1, 0, 1, 0]
        model["responses"]["A3"]["table"] = [1, 0, 1, 0]
        model["responses"]["A2"]["table"] = [1, 0, 0, 0] * 4
        mf = _write(tmp_path, "const.json", model)
        assert main(["simulate", files["path"], mf, "--json"]) == 0
        doc = json.loads(capsys.readouterr().out)
        assert np.allclose(matrix_from_json(doc["covariance"]), 0.0, atol=1e-12)

    def test_mismatched_model_exit_three(self, files, tmp_path):
        model = json.loads(json.dumps(PATH_MODEL))
        model["responses"]["A1"]["table"] = [1, 0, 0, 0, 1, 0]  # wrong signal shape
        mf = _write(tmp_path, "bad.json", model)
        assert main(["simulate", files["path"], mf]) == 3


class TestInflate:
    def test_triangle_sign_hexagon(self, files, capsys):
        code = main(["inflate", files["triangle"], "--sign", "+,-,+", "--json"])
        assert code == 0
        doc = json.loads(capsys.readouterr().out)
        net = parse_network(doc["network"])
        assert net.n_parties == 6 and net.n_sources == 6
        assert net.all_bipartite()

    def test_covariance_extraction(self, files, capsys):
        code = main(
            ["inflate", files["path"], "--sign", "+,-",
             "--covariance", files["mpath"], "--json"]
        )
        assert code == 0
        doc = json.loads(capsys.readouterr().out)
        big = matrix_from_json(doc["inflated_covariance"])
        assert big.shape == (6, 6)
        assert np.linalg.eigvalsh(big)[0] >= -1e-9
        ext = matrix_from_json(doc["extracted"])
        assert np.allclose(ext, [[1, 1, 0], [1, 2, -1], [0, -1, 1]], atol=1e-12)

    def test_order_one_round_trip(self, files, tmp_path, capsys):
        spec = {"d": 1, "perms": {f"{p}|{s}": [0] for p, s in
                                  [("A1", "s0"), ("A2", "s0"), ("A2", "s1"), ("A3", "s1")]}}
        sf = _write(tmp_path, "spec.json", spec)
        assert main(["inflate", files["path"], "--spec", sf, "--json"]) == 0
        doc = json.loads(capsys.readouterr().out)
        net = parse_network(doc["network"])
        assert net.sources == parse_network(PATH_NET).sources

    def test_spec_with_vectors_compression(self, files, tmp_path, capsys):
        spec = {"d": 2, "perms": {"A1|s0": [0, 1], "A2|s0": [1, 0],
                                  "A2|s1": [0, 1], "A3|s1": [0, 1]}}
        sf = _write(tmp_path, "spec.json", spec)
        vf = _write(tmp_path, "vecs.json", [{"re": [1, 0]}, {"re": [1, 0]}, {"re": [1, 0]}])
        code = main(["inflate", files["path"], "--spec", sf, "--covariance",
                     files["mpath"], "--vectors", vf, "--json"])
        assert code == 0
        doc = json.loads(capsys.readouterr().out)
        ext = matrix_from_json(doc["extracted"])
        # Swapped copy on (A1, s0) kills that entry for first-basis vectors.
        assert ext[0, 1] == 0 and ext[1, 2] == pytest.approx(1.0)

    def test_requires_one_mode(self, files):
        assert main(["inflate", files["path"]]) == 3


class TestEmbezzle:
    def test_uniform_report(self, capsys):
        code = main(["embezzle", "--uniform", "--d", "2", "--R", "1048576", "--json"])
        assert code == 0
        doc = json.loads(capsys.readouterr().out)
        assert doc["overlap_re"] >= doc["bound"] >= 0.886

    def test_basis_vector_unity(self, tmp_path, capsys):
        pf = tmp_path / "phi.json"
        pf.write_text(json.dumps([1.0, 0.0, 0.0]))
        assert main(["embezzle", "--phi-file", str(pf), "--R", "4096", "--json"]) == 0
        doc = json.loads(capsys.readouterr().out)
        assert doc["overlap_re"] == pytest.approx(1.0, abs=1e-12)

    def test_memory_cap_exit_three(self):
        assert main(["embezzle", "--uniform", "--d", "8", "--R", str(2**26)]) == 3


class TestGauss:
    def test_samples_and_estimate(self, files, tmp_path, capsys):
        terms = {
            "target": matrix_to_json(np.array(PATH_M, dtype=float)),
            "terms": {
                "s0": matrix_to_json(np.array([[1, 1, 0], [1, 1, 0], [0, 0, 0]], float)),
                "s1": matrix_to_json(np.array([[0, 0, 0], [0, 1, 1], [0, 1, 1]], float)),
            },
            "residual": 0.0,
        }
        df = _write(tmp_path, "dec.json", terms)
        out = tmp_path / "samples.csv"
        code = main(["gauss", files["path"], df, "--count", "20000", "--seed", "5",
                     "--out", str(out), "--json"])
        assert code == 0
        doc = json.loads(capsys.readouterr().out)
        est = matrix_from_json(doc["covariance_estimate"])
        assert np.max(np.abs(est - np.array(PATH_M))) < 0.1
        data = np.loadtxt(out, delimiter=",")
        assert data.shape == (20000, 3)

    def test_bad_decomposition_exit_three(self, files, tmp_path):
        df = _write(tmp_path, "dec.json", {"nope": 1})
        assert main(["gauss", files["path"], df]) == 3


def test_version(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["--version"])
    assert exc.value.code == 0
    assert "covnet" in capsys.readouterr().out
