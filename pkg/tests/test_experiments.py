import json

import pytest

from ffharm.cli import main
from ffharm.errors import ConfigError, EmptyMatrix
from ffharm.experiments import ExperimentConfig, generate_field_matrix, run
from ffharm.seeding import trial_seed


def qs(filters):
    return [p**k for p, k in generate_field_matrix(filters)]


def test_field_matrix_examples():
    assert qs({"mod4": 3, "max_q": 30, "prime_only": True}) == [3, 7, 11, 19, 23]
    assert {5, 9, 13, 25, 29} <= set(qs({"mod4": 1, "max_q": 30}))
    with pytest.raises(EmptyMatrix):
        generate_field_matrix({"parity": "even", "max_q": 30})
    with pytest.raises(EmptyMatrix):
        generate_field_matrix({"mod4": 0, "max_q": 30})


def test_malformed_filters_name_the_field():
    with pytest.raises(ConfigError, match="mod4"):
        generate_field_matrix({"mod4": "three", "max_q": 30})
    with pytest.raises(ConfigError, match="congruence"):
        generate_field_matrix({"congruence": {"modulus": 4}, "max_q": 30})
    with pytest.raises(ConfigError, match="q"):
        generate_field_matrix({"q": [3, 6]})


def test_seed_splitting_is_stable():
    assert trial_seed(0, "energy", 7, 3, 2) == trial_seed(0, "energy", 7, 3, 2)
    assert trial_seed(0, "energy", 7, 3, 2) != trial_seed(0, "energy", 7, 3, 3)
    assert trial_seed(0, "energy", 7, 3, 2) != trial_seed(0, "cone", 7, 3, 2)


def test_smallest_identity_run(tmp_path):
    cfg = ExperimentConfig(suites=["identity"], field_matrix={"q": [3]}, dims=[2], trials=3, out_dir=str(tmp_path))
    rep = run(cfg)
    assert rep.exit_code == 0
    summary = json.loads((tmp_path / "summary.json").read_text())
    assert summary["passed"] and "1" in summary["criteria"]
    header = (tmp_path / "identity.csv").read_text().splitlines()[0]
    assert header.startswith("schema_version,suite,q,p,k,d,seed,trial,case")


def test_reports_are_reproducible(tmp_path):
    def go(sub, workers):
        cfg = ExperimentConfig(field_matrix={"q": [3, 7]}, dims=[3, 4], trials=3, out_dir=str(tmp_path / sub),
                               workers=workers)
        return run(cfg)
    a, b = go("a", 1), go("b", 2)
    assert a.passed and b.passed
    for f in (tmp_path / "a").glob("*.csv"):
        assert f.read_bytes() == (tmp_path / "b" / f.name).read_bytes()


def test_failed_check_gives_exit_2(tmp_path):
    cfg = ExperimentConfig(suites=["cone"], field_matrix={"q": [3]}, trials=2, out_dir=str(tmp_path),
                           tolerances={"cone": 0.01})
    assert run(cfg).exit_code == 2


def test_config_validation(tmp_path):
    with pytest.raises(ConfigError):
        ExperimentConfig.from_dict({"suites": ["plots"]})
    with pytest.raises(ConfigError):
        ExperimentConfig.from_dict({"colour": "red"})
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(ConfigError):
        ExperimentConfig.load(bad)


def test_cli_commands(tmp_path, capsys):
    assert main(["fields", "--max-q", "30", "--mod4", "3", "--prime-only"]) == 0
    assert "q=23" in capsys.readouterr().out
    assert main(["fields", "--even"]) == 1
    assert main(["variety", "--q", "3", "--d", "3"]) == 0
    assert json.loads(capsys.readouterr().out)["spheres"]["1"]["size"] == 6
    assert main(["energy", "--q", "3", "7", "--d", "3", "--trials", "2", "--out-dir", str(tmp_path)]) == 0
    assert (tmp_path / "energy.csv").exists()
    assert main(["exponents", "--dim", "3", "--q-class", "3", "--radius", "square"]) == 0
    assert "12/7" in capsys.readouterr().out
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"suites": ["exponents", "identity"], "field_matrix": {"q": [3]}, "dims": [2],
                               "trials": 2}))
    assert main(["verify-all", "--config", str(cfg), "--out-dir", str(tmp_path / "all")]) == 0
    assert json.loads((tmp_path / "all" / "summary.json").read_text())["passed"]
