"""Tests for settings loading and environment overrides."""
import json

import pytest
from pydantic import ValidationError

from aitken_kernels.config import DEFAULT_CONFIG_PATH, Settings, load_settings


@pytest.fixture(autouse=True)
def clean_env(monkeypatch):
    for name in ("AK_CONFIG", "AK_THREADS", "AK_LOG_LEVEL", "AK_SEED"):
        monkeypatch.delenv(name, raising=False)


def test_defaults_file_matches_model_defaults():
    assert load_settings(DEFAULT_CONFIG_PATH) == Settings()


def test_missing_file_falls_back(tmp_path):
    settings = load_settings(tmp_path / "absent.json")
    assert settings.sampling.seed == 42
    assert settings.tolerances.tol_psd == 1e-8


def test_file_values(tmp_path):
    path = tmp_path / "settings.json"
    path.write_text(json.dumps({"sampling": {"seed": 7}, "quadrature": {"hermite_nodes": 80}}))
    settings = load_settings(path)
    assert settings.sampling.seed == 7
    assert settings.quadrature.hermite_nodes == 80
    assert settings.quadrature.matern_nodes == 64


def test_environment_overrides(monkeypatch, tmp_path):
    monkeypatch.setenv("AK_THREADS", "0")
    monkeypatch.setenv("AK_LOG_LEVEL", "debug")
    monkeypatch.setenv("AK_SEED", "123")
    settings = load_settings(tmp_path / "absent.json")
    assert settings.runtime.threads == 1
    assert settings.runtime.log_level == "DEBUG"
    assert settings.sampling.seed == 123


def test_config_path_from_environment(monkeypatch, tmp_path):
    path = tmp_path / "settings.json"
    path.write_text(json.dumps({"runtime": {"sidecar_threshold": 16}}))
    monkeypatch.setenv("AK_CONFIG", str(path))
    assert load_settings().runtime.sidecar_threshold == 16


def test_checker_point_limit(tmp_path):
    path = tmp_path / "settings.json"
    path.write_text(json.dumps({"sampling": {"validity_points": 9}}))
    with pytest.raises(ValidationError):
        load_settings(path)
