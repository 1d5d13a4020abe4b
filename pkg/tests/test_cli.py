import json
import logging

import pytest

from tfim_sholo.cli import EXIT_FAIL, EXIT_OK, EXIT_USAGE, THREADS_ENV, RunConfig, UsageError, default_threads, main

RECT = "dobrushin,1.0,4,2.0,1.0,1.0"


def _run(tmp_path, *args):
    return main(["--out", str(tmp_path), *args])


def test_sample_outputs_and_manifest(tmp_path):
    assert _run(tmp_path, "--seed", "3", "sample", "--rect", RECT, "--samples", "20", "--burn-in", "5") == EXIT_OK
    for name in ("samples.jsonl", "domain.json", "summary.json", "trace.json", "trace.svg", "manifest.json"):
        assert (tmp_path / name).exists(), name
    man = json.loads((tmp_path / "manifest.json").read_text())
    assert man["seed"] == 3 and man["config"]["command"] == "sample"
    assert {"python", "numpy"} <= set(man["versions"])
    assert len((tmp_path / "samples.jsonl").read_text().splitlines()) == 20


def test_sample_byte_identical(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    for d in (a, b):
        assert main(["--out", str(d), "--seed", "7", "sample", "--rect", RECT, "--samples", "15"]) == EXIT_OK
    for name in ("samples.jsonl", "summary.json", "trace.json", "trace.svg", "domain.json"):
        assert (a / name).read_bytes() == (b / name).read_bytes(), name


def test_q_default_logged(tmp_path, caplog):
    caplog.set_level(logging.INFO)
    assert _run(tmp_path, "sample", "--rect", RECT, "--samples", "5") == EXIT_OK
    assert any("q = 2" in r.getMessage() for r in caplog.records)


def test_threads_from_env(monkeypatch):
    monkeypatch.setenv(THREADS_ENV, "3")
    assert default_threads() == 3
    monkeypatch.delenv(THREADS_ENV)
    assert default_threads() == 1


def test_malformed_domain_names_vertex(tmp_path, capsys):
    dom = tmp_path / "bad.json"
    dom.write_text(json.dumps({"delta": 1.0, "kind": "primal", "path": [[0, 0], [2, 0], [2, 1.0], [0.3, 1.0]]}))
    assert _run(tmp_path, "sample", "--domain", str(dom)) == EXIT_USAGE
    assert "vertex 3" in capsys.readouterr().err


def test_usage_errors(tmp_path):
    assert _run(tmp_path, "sample") == EXIT_USAGE  # no domain
    assert _run(tmp_path, "sample", "--rect", "dobrushin,1.0") == EXIT_USAGE
    assert _run(tmp_path, "oracle") == EXIT_USAGE  # N missing
    assert _run(tmp_path, "render") == EXIT_USAGE


def test_run_config_validation():
    with pytest.raises(UsageError, match="seed"):
        RunConfig("oracle", -1, 1, "out", {"N": 2}).validate()
    with pytest.raises(UsageError):
        RunConfig("oracle", 0, 1, "out", {"N": 40}).validate()


def test_config_file_round_trip(tmp_path):
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps({"command": "oracle", "seed": 1, "params": {"N": 2}}))
    assert _run(tmp_path, "--config", str(cfg), "oracle") == EXIT_OK
    res = json.loads((tmp_path / "oracle.json").read_text())
    assert res["Z"] == pytest.approx(5.641008410471765, rel=1e-12)
    assert _run(tmp_path, "--config", str(cfg), "sample", "--rect", RECT) == EXIT_USAGE


def test_estimate_fk_with_check_sholo(tmp_path):
    code = _run(tmp_path, "estimate", "--rect", RECT, "--samples", "400", "--burn-in", "20", "--check-sholo")
    assert code == EXIT_OK
    for name in ("field.csv", "field.svg", "summary.json", "residuals.csv", "residuals.svg"):
        assert (tmp_path / name).exists(), name
    summary = json.loads((tmp_path / "summary.json").read_text())
    assert "sholo" in summary
    rows = (tmp_path / "field.csv").read_text().splitlines()
    assert len(rows) == summary["n_sites"] + 1


def test_estimate_spin_rejects_b_off_lower_boundary(tmp_path, capsys):
    code = _run(tmp_path, "estimate", "--rect", "dual,1.0,4,2.0", "--mode", "spin", "--a=-1,1.0",
                "--b", "3,0.0", "--samples", "20")
    assert code == EXIT_USAGE
    err = capsys.readouterr().err
    assert "spin mode" in err and "lower" in err


def test_estimate_spin_ok(tmp_path):
    code = _run(tmp_path, "estimate", "--rect", "dual,1.0,4,2.0", "--mode", "spin", "--a=-1,1.0",
                "--b", "4,0.0", "--samples", "200", "--check-sholo")
    assert code == EXIT_OK
    summary = json.loads((tmp_path / "summary.json").read_text())
    assert summary["F_at_b"] == [1.0, 0.0]


def test_verify_oracle_only(tmp_path, capsys):
    assert _run(tmp_path, "verify", "--suite", "oracle", "--N", "2") == EXIT_OK
    out = capsys.readouterr().out.split("\n")
    assert [line for line in out if line] == ["PASS oracle"]
    rep = json.loads((tmp_path / "report.json").read_text())
    assert list(rep["suites"]) == ["oracle"]
    assert [r["spec"]["N"] for r in rep["suites"]["oracle"]["reports"]] == [2, 2]


def test_verify_fault_names_identity(tmp_path, capsys):
    assert _run(tmp_path, "verify", "--suite", "pathwise", "--inject-fault", "1") == EXIT_FAIL
    out = capsys.readouterr().out
    assert out.startswith("FAIL pathwise") and "turn identity" in out


def test_verify_pathwise_clean(tmp_path):
    assert _run(tmp_path, "verify", "--suite", "pathwise", "--suite", "figures") == EXIT_OK


def test_render_from_outputs(tmp_path):
    src = tmp_path / "s"
    assert main(["--out", str(src), "sample", "--rect", RECT, "--samples", "5"]) == EXIT_OK
    dst = tmp_path / "r"
    code = main(["--out", str(dst), "render", "--domain", str(src / "domain.json"),
                 "--configuration", str(src / "samples.jsonl")])
    assert code == EXIT_OK and (dst / "trace.svg").read_text().lstrip().startswith("<?xml")
