import io
import json
import subprocess
import sys

import pytest

from rspin.cli import EXIT_CERT_FAILED, EXIT_INVALID, EXIT_OK, EXIT_SOLVER, run


def call(*argv):
    buf = io.StringIO()
    code = run(list(argv), out=buf)
    return code, json.loads(buf.getvalue()), buf.getvalue()


def test_classify():
    code, doc, _ = call("classify", "--g", "4", "--r", "2", "--m", "6")
    assert code == EXIT_OK
    assert doc["schema_version"] == "1" and doc["mode"] == "classify"
    assert doc["result"]["count"] == 3 and doc["result"]["case_label"] == "C1-i"


def test_dim():
    code, doc, _ = call("dim", "--g", "2", "--r", "2", "--m", "")
    assert code == EXIT_OK and doc["result"]["dimension"] == 3


def test_invalid_identity():
    code, doc, _ = call("solve", "--g", "2", "--r", "3", "--m", "1")
    assert code == EXIT_INVALID and doc["result"]["error"] == "InvalidInput"


def test_invalid_usage():
    assert call("classify", "--g", "4")[0] == EXIT_INVALID
    assert call("classify", "--g", "1", "--r", "2", "--m", "0")[0] == EXIT_INVALID
    assert call("dim", "--g", "3", "--r", "2", "--m", "a,b")[0] == EXIT_INVALID


def test_solve_d0_and_d1():
    code, doc, _ = call("solve", "--g", "3", "--r", "2", "--m", "2,1,1")
    assert code == EXIT_OK and doc["result"]["verdict"] == "pass"
    code, doc, _ = call("solve", "--g", "2", "--r", "2", "--m", "")
    assert code == EXIT_OK
    assert len(doc["result"]["solution"]["p_roots"]) == 1


def test_solver_exhausted():
    code, doc, _ = call("solve", "--g", "3", "--r", "2", "--m", "", "--budget", "0")
    assert code == EXIT_SOLVER and doc["result"]["error"] == "SolverExhausted"


def test_build_nodal_and_certify(tmp_path):
    code, doc, text = call("build-nodal", "--g", "4", "--r", "2", "--m", "2", "--seed", "3")
    assert code == EXIT_OK and doc["result"]["certificate"]["verdict"] == "pass"
    path = tmp_path / "doc.json"
    path.write_text(text)
    code2, doc2, _ = call("certify", "--in", str(path))
    assert code2 == EXIT_OK
    assert doc2["result"]["certificate"] == doc["result"]["certificate"]
    bare = tmp_path / "curve.json"
    bare.write_text(json.dumps(doc["result"]["curve"]))
    assert call("certify", "--in", str(bare))[0] == EXIT_OK


def test_certify_tampered(tmp_path):
    _, doc, _ = call("build-nodal", "--g", "4", "--r", "2", "--m", "2")
    curve = doc["result"]["curve"]
    curve["nodes"] = curve["nodes"][:-1]
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(curve))
    code, out, _ = call("certify", "--in", str(path))
    assert code == EXIT_CERT_FAILED
    assert out["result"]["certificate"]["verdict"] == "fail"


def test_certify_malformed(tmp_path):
    path = tmp_path / "junk.json"
    path.write_text("{not json")
    assert call("certify", "--in", str(path))[0] == EXIT_INVALID
    path.write_text(json.dumps({"components": []}))
    assert call("certify", "--in", str(path))[0] == EXIT_INVALID
    assert call("certify", "--in", str(tmp_path / "missing.json"))[0] == EXIT_INVALID


def test_jacobian_report():
    code, doc, _ = call("jacobian-report", "--g", "3", "--m", "2,2")
    assert code == EXIT_OK
    assert doc["result"]["empirical_rank_y"] == 2
    assert doc["result"]["lineareq_rank"] == 3


def test_byte_identical():
    args = ["build-nodal", "--g", "5", "--r", "3", "--m", "2,3", "--seed", "11"]
    assert call(*args)[2] == call(*args)[2]


def test_timings_opt_in():
    _, doc, _ = call("dim", "--g", "2", "--r", "2", "--m", "")
    assert doc["timings"] == {}
    _, doc, _ = call("solve", "--g", "2", "--r", "2", "--m", "2", "--timings")
    assert "solve" in doc["timings"]


def test_tolerance_flags_and_env(monkeypatch):
    _, doc, _ = call("dim", "--g", "2", "--r", "2", "--m", "", "--tol", "1e-7")
    assert doc["tolerances"]["residual_tol"] == 1e-7
    monkeypatch.setenv("RSPIN_RANK_CUTOFF", "1e-6")
    _, doc, _ = call("dim", "--g", "2", "--r", "2", "--m", "")
    assert doc["tolerances"]["rank_cutoff"] == 1e-6
    monkeypatch.setenv("RSPIN_RANK_CUTOFF", "2")
    assert call("dim", "--g", "2", "--r", "2", "--m", "")[0] == EXIT_INVALID


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "rspin", "dim", "--g", "3", "--r", "2", "--m", "2"],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["result"]["dimension"] == 6
