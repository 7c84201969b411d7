import json

import pytest

from qfilterlab.errors import ConfigParseError, ExperimentUnknown
from qfilterlab.experiments import acceptance
from qfilterlab.experiments.cli import main
from qfilterlab.experiments.config import parse_config
from qfilterlab.experiments.io import sha256_file, sha256_text
from qfilterlab.experiments.registry import REGISTRY, registry_list

SMALL_DECAY = {"n_traj": 40, "dt": 0.01, "t_final": 1.0, "tol": 0.25}


def _write_config(tmp_path, params, experiment="qubit-decay-filter", seed=11):
    cfg = {"experiment": experiment, "seed": seed, "output_dir": str(tmp_path / "out"), "params": params}
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(cfg, indent=2))
    return path


def _stderr_json(capsys):
    return json.loads(capsys.readouterr().err.strip().splitlines()[-1])


# -- configuration -------------------------------------------------------------

def test_parse_defaults():
    cfg = parse_config('{"experiment": "ito-goldens"}')
    assert cfg.seed == REGISTRY["ito-goldens"].reference_seed
    assert cfg.output_dir == "runs/ito-goldens"


@pytest.mark.parametrize("text,exc", [
    ('{"experiment": "nope"}', ExperimentUnknown),
    ('{"experiment": "ito-goldens", "colour": 1}', ConfigParseError),
    ('{"seed": 1}', ConfigParseError),
    ('{"experiment": "qubit-decay-filter", "params": {"n_traj": -1}}', ConfigParseError),
    ('{"experiment": "qubit-decay-filter", "params": {"dt": "fast"}}', ConfigParseError),
    ('{"experiment": "qubit-decay-filter", "params": {"L": "pauli_q"}}', ConfigParseError),
    ('{"experiment": "ito-goldens", "seed": true}', ConfigParseError),
    ('[1, 2]', ConfigParseError),
])
def test_parse_errors(text, exc):
    with pytest.raises(exc):
        parse_config(text)


def test_json_error_position():
    with pytest.raises(ConfigParseError) as e:
        parse_config('{\n  "experiment": "ito-goldens",\n  "seed": ,\n}')
    assert (e.value.line, e.value.column) == (3, 11)


def test_output_dir_env_override(tmp_path, monkeypatch):
    monkeypatch.setenv("QFILTERLAB_OUTPUT_DIR", str(tmp_path / "elsewhere"))
    assert parse_config('{"experiment": "ito-goldens"}').resolved_output_dir() == str(tmp_path / "elsewhere")


# -- cli ---------------------------------------------------------------------

def test_list(capsys):
    assert main(["list"]) == 0
    out = capsys.readouterr().out.splitlines()
    assert len(out) == len(registry_list()) == 14
    assert out[0].startswith("ce-axioms")


def test_run_writes_artifacts(tmp_path, capsys):
    path = _write_config(tmp_path, SMALL_DECAY)
    assert main(["run", str(path)]) == 0
    out = tmp_path / "out"
    names = {p.name for p in out.iterdir()}
    assert {"ensemble.csv", "trajectory_0.csv", "master_eq.csv", "result.json", "manifest.json"} <= names
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["config_sha256"] == sha256_text(path.read_text())
    assert manifest["seed"] == 11
    for name, digest in manifest["files"].items():
        assert sha256_file(out / name) == digest
    result = json.loads((out / "result.json").read_text())
    assert result["passed"] is True
    assert "[PASS] qubit-decay-filter" in capsys.readouterr().out


def test_run_is_deterministic(tmp_path):
    (tmp_path / "a").mkdir()
    (tmp_path / "b").mkdir()
    a = _write_config(tmp_path / "a", SMALL_DECAY)
    b = _write_config(tmp_path / "b", SMALL_DECAY)
    assert main(["run", str(a)]) == 0 and main(["run", str(b)]) == 0
    for name in ("ensemble.csv", "trajectory_0.csv", "master_eq.csv"):
        assert (tmp_path / "a/out" / name).read_bytes() == (tmp_path / "b/out" / name).read_bytes()


def test_injected_failure_flips_verdict(tmp_path, capsys):
    path = _write_config(tmp_path, dict(SMALL_DECAY, inject_failure=True))
    assert main(["run", str(path)]) == 4
    assert "[FAIL]" in capsys.readouterr().out


def test_run_config_errors(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text('{"experiment": "qubit-decay-filter",\n "seed": 1,,}')
    assert main(["run", str(bad)]) == 2
    err = _stderr_json(capsys)
    assert err["error"] == "ConfigParseError" and err["line"] == 2
    assert main(["run", str(tmp_path / "missing.json")]) == 2
    unknown = _write_config(tmp_path, {}, experiment="no-such-experiment")
    assert main(["run", str(unknown)]) == 2
    assert _stderr_json(capsys)["error"] == "ExperimentUnknown"


def test_run_numeric_failure(tmp_path, capsys):
    path = _write_config(tmp_path, dict(SMALL_DECAY, dt=0.5, t_final=1.0, gamma=50.0))
    assert main(["run", str(path)]) == 3
    assert _stderr_json(capsys)["exit_code"] == 3


def test_ito_commands(capsys):
    assert main(["ito", "simplify", "dQ.dP - dP.dQ"]) == 0
    assert capsys.readouterr().out.strip() == "(2i) dt"
    assert main(["ito", "simplify", "dB.dB* +"]) == 2
    err = _stderr_json(capsys)
    assert err["error"] == "ItoSyntaxError" and err["pos"] == 8
    assert main(["ito", "table"]) == 0
    assert "dB*" in capsys.readouterr().out


def test_acceptance_only(tmp_path, capsys):
    verdict = tmp_path / "verdict.json"
    assert main(["acceptance", "--only", "4", "--verdict", str(verdict)]) == 0
    assert "[PASS] criterion  4" in capsys.readouterr().out
    doc = json.loads(verdict.read_text())
    assert doc["passed"] and [c["criterion"] for c in doc["criteria"]] == [4]
    assert main(["acceptance", "--only", "99"]) == 2


def test_acceptance_overrides_and_injection():
    ok = acceptance.run_criterion(1, {"qubit-decay-filter": SMALL_DECAY})
    bad = acceptance.run_criterion(1, {"qubit-decay-filter": dict(SMALL_DECAY, inject_failure=True)})
    assert ok["passed"] and not bad["passed"]
    assert acceptance.format_line(bad).startswith("[FAIL] criterion  1")


def test_select():
    assert acceptance.select(None) == list(range(1, 13))
    assert acceptance.select("kalman-crosscheck") == [9]
    with pytest.raises(KeyError):
        acceptance.select("bogus")
