import json

import pytest

from momloc.cli import SCHEMA_VERSION, main


def _cfg(tmp_path, scenarios, **extra):
    p = tmp_path / "cfg.json"
    p.write_text(json.dumps({"schema_version": SCHEMA_VERSION, "seed": 3, "scenarios": scenarios, **extra}))
    return str(p)


@pytest.mark.parametrize("cmd", ["check-free-field", "check-structure", "check-weighted",
                                 "check-multiplier", "jld-sumrule", "oracle-pauli-jordan",
                                 "oracle-time-zero"])
def test_subcommands_pass(cmd, tmp_path):
    assert main([cmd, "--out", str(tmp_path)]) == 0
    rep = json.loads((tmp_path / "report.json").read_text())
    assert rep["schema_version"] == SCHEMA_VERSION
    assert rep["all_matched"] and all(sc["matched"] for sc in rep["scenarios"])


def test_run_is_deterministic(tmp_path):
    cfg = _cfg(tmp_path, [{"kind": "structure", "n": 3, "masses": [1, 2], "j": "all", "expect": "Zero"},
                          {"kind": "free-field", "masses": [1], "expect": "Zero"}])
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(["run", "--config", cfg, "--out", str(a)]) == 0
    assert main(["run", "--config", cfg, "--out", str(b)]) == 0
    assert (a / "report.json").read_bytes() == (b / "report.json").read_bytes()
    assert (a / "timings.json").exists()


def test_expectation_mismatch_exits_1(tmp_path):
    cfg = _cfg(tmp_path, [{"kind": "free-field", "masses": [1], "expect": "non-Zero"}])
    assert main(["run", "--config", cfg, "--out", str(tmp_path)]) == 1


def test_pipeline_error_names_module(tmp_path, capsys):
    cfg = _cfg(tmp_path, [{"kind": "structure", "n": 2, "masses": [1], "expect": "Zero"}])
    assert main(["run", "--config", cfg, "--out", str(tmp_path)]) == 1
    assert "error in module momdist" in capsys.readouterr().err


@pytest.mark.parametrize("body", ['{"scenarios": [{"kind": "bogus", "expect": "Zero"}]}',
                                  '{"schema_version": 99}', "not json",
                                  '{"scenarios": [{"kind": "free-field"}]}'])
def test_config_errors_exit_2(body, tmp_path, capsys):
    p = tmp_path / "bad.json"
    p.write_text(body)
    assert main(["run", "--config", str(p), "--out", str(tmp_path)]) == 2
    assert "usage" in capsys.readouterr().err


def test_empty_scenarios_writes_header(tmp_path):
    cfg = _cfg(tmp_path, [])
    assert main(["run", "--config", cfg, "--out", str(tmp_path)]) == 0
    rep = json.loads((tmp_path / "report.json").read_text())
    assert rep["schema_version"] == SCHEMA_VERSION and rep["scenarios"] == []
