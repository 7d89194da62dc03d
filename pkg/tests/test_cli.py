"""Tests for the medexc command line."""

import json

import pandas as pd
import pytest

import medexc.config
from medexc import __version__
from medexc.cli import known_propensity_from, main
from medexc.exceptions import ConfigurationError
from medexc.models.simulation import METRIC_COLUMNS


@pytest.fixture(autouse=True)
def _keep_test_logging(monkeypatch):
    """Leave the root logger to pytest while commands run."""
    monkeypatch.setattr(medexc.config, "_logging_configured", True)


@pytest.fixture
def gm1_csv(tmp_path):
    """A simulated GM-1 dataset written through the simulate command."""
    path = tmp_path / "gm1.csv"
    assert main(["simulate", "--gm", "gm1", "--n", "300", "--seed", "2", "--T", "3", "--out", str(path)]) == 0
    return path


def test_version(capsys):
    """Test that --version prints the package version."""
    assert main(["--version"]) == 0
    assert __version__ in capsys.readouterr().out


def test_simulate_writes_long_csv(gm1_csv):
    """Test one row per (participant, decision point)."""
    frame = pd.read_csv(gm1_csv)
    assert len(frame) == 900


def test_simulate_gm2(tmp_path, capsys):
    """Test GM-2 output with its eligibility rate."""
    out = tmp_path / "gm2.csv"
    assert main(["simulate", "--gm", "gm2", "--n", "20", "--seed", "1", "--T", "4", "--out", str(out)]) == 0
    out = capsys.readouterr().out
    assert "n=20 T=4 eligibility=" in out


@pytest.mark.parametrize(
    "argv",
    [
        ["simulate", "--gm", "gm3", "--n", "10", "--seed", "1", "--out", "x.csv"],
        ["simulate", "--gm", "gm1", "--n", "0", "--seed", "1", "--out", "x.csv"],
        ["simulate", "--gm", "gm1", "--n", "10", "--seed", "-1", "--out", "x.csv"],
        ["verify", "--random", "5"],
        ["verify"],
        ["estimate", "--data", "missing.csv", "--out", "r.json"],
    ],
)
def test_usage_errors(argv):
    """Test that malformed invocations exit with status 2."""
    assert main(argv) == 2


def test_estimate_writes_json(gm1_csv, tmp_path, capsys):
    """Test an estimate run with a linear feature map."""
    out = tmp_path / "result.json"
    code = main(["estimate", "--data", str(gm1_csv), "--f", "linear", "--out", str(out)])
    assert code == 0
    result = json.loads(out.read_text(encoding="utf-8"))
    assert result["names"] == ["alpha_1", "alpha_2", "beta_1", "beta_2"]
    assert result["diagnostics"]["provenance"] == "fitted"
    assert "alpha_1" in capsys.readouterr().out


def test_estimate_crossfit_seed_rules(gm1_csv, tmp_path):
    """Test that cross-fitting needs a seed and K = 1 is refused."""
    out = str(tmp_path / "r.json")
    assert main(["estimate", "--data", str(gm1_csv), "--crossfit", "2", "--out", out]) == 2
    assert main(["estimate", "--data", str(gm1_csv), "--crossfit", "1", "--seed", "1", "--out", out]) == 2


def test_estimate_with_known_propensity(gm1_csv, tmp_path):
    """Test known-propensity mode with a constant."""
    out = tmp_path / "r.json"
    code = main(
        ["estimate", "--data", str(gm1_csv), "--known-propensity", "0.5", "--effects", "total", "--out", str(out)]
    )
    assert code == 0
    result = json.loads(out.read_text(encoding="utf-8"))
    assert result["names"] == ["total_1"]
    assert result["diagnostics"]["provenance"] == "known-propensity"


def test_estimate_bad_propensity_fails(gm1_csv, tmp_path, capsys):
    """Test that an invalid known propensity is a runtime failure."""
    out = str(tmp_path / "r.json")
    assert main(["estimate", "--data", str(gm1_csv), "--known-propensity", "1.5", "--out", out]) == 1
    assert "must lie in (0, 1)" in capsys.readouterr().err


def test_known_propensity_column(toy_dataset):
    """Test propensities read from a covariate column."""
    component = known_propensity_from("X1", toy_dataset)
    assert component(toy_dataset).shape == (3, 3)
    with pytest.raises(ConfigurationError, match="not in X1..X1"):
        known_propensity_from("X2", toy_dataset)


def test_mc_with_empty_plan(tmp_path):
    """Test that an empty plan writes a header-only metrics file."""
    plan = tmp_path / "plan.json"
    plan.write_text('{"cells": []}', encoding="utf-8")
    out = tmp_path / "metrics.csv"
    assert main(["mc", "--plan", str(plan), "--seed", "3", "--out", str(out)]) == 0
    assert out.read_text(encoding="utf-8").strip() == ",".join(METRIC_COLUMNS)


def test_mc_rejects_unknown_plan_keys(tmp_path):
    """Test that a misspelled plan key fails validation."""
    plan = tmp_path / "plan.json"
    plan.write_text('{"cels": []}', encoding="utf-8")
    assert main(["mc", "--plan", str(plan), "--seed", "3", "--out", str(tmp_path / "m.csv")]) == 1


def test_verify_random(capsys):
    """Test the random agreement summary line."""
    assert main(["verify", "--random", "5", "--seed", "1"]) == 0
    assert capsys.readouterr().out.strip() == "5/5 agree"


def test_verify_dgp_file(tiny_dgp, tmp_path, capsys):
    """Test the per-check table for a DGP file."""
    path = tmp_path / "dgp.json"
    path.write_text(tiny_dgp.model_dump_json(), encoding="utf-8")
    assert main(["verify", "--dgp", str(path)]) == 0
    out = capsys.readouterr().out
    assert "t=1 a=1 b=0 definition=1.3" in out
    assert "4/4 agree; 14/14 robustness checks pass" in out
