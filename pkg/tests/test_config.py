"""
Tests for configuration loading.
"""

from __future__ import annotations

import os
from pathlib import Path
from unittest.mock import patch

import pytest

from projflow.config import ProjflowConfig
from projflow.errors import DomainError

CONFIG = """
[defaults]
series_order = 12
numeric_tol = 1e-7
rhs = -1
literal_square = true

[flows]
mine = ["x*(y+1)^2", "y/(y+1)"]

[fields]
quad = ["2*x*y", "-y^2"]

[integrals]
cubic = "y^4/(x^3 - y^3)"
line = { W = "x + y", N = 1 }

[maps.l0]
P = "y"
Q = "x + y"
"""


@pytest.fixture
def config_file(tmp_path):
    """A config file with defaults and definitions."""
    path = tmp_path / ".projflow.toml"
    path.write_text(CONFIG)
    return path


class TestProjflowConfig:
    """Tests for ProjflowConfig.load."""

    def test_defaults(self, tmp_path):
        with patch.dict(os.environ, {}, clear=True):
            config = ProjflowConfig.load(tmp_path / "missing.toml")
        assert config.series_order == 8
        assert config.rhs == 1
        assert config.max_deg is None
        assert not config.definitions.flows

    def test_file_values(self, config_file):
        with patch.dict(os.environ, {}, clear=True):
            config = ProjflowConfig.load(config_file)
        assert config.series_order == 12
        assert config.numeric_tol == 1e-7
        assert config.rhs == -1
        assert config.literal_square
        assert config.definitions.flows["mine"] == ["x*(y+1)^2", "y/(y+1)"]
        assert config.definitions.vector_fields["quad"] == ["2*x*y", "-y^2"]
        assert config.definitions.integrals["cubic"].W == "y^4/(x^3 - y^3)"
        assert config.definitions.integrals["line"].N == 1
        assert config.definitions.maps["l0"].Q == "x + y"

    def test_environment_overrides_file(self, config_file):
        env = {"PROJFLOW_SERIES_ORDER": "5", "PROJFLOW_RHS": "1", "PROJFLOW_MAX_DEG": "6"}
        with patch.dict(os.environ, env, clear=True):
            config = ProjflowConfig.load(config_file)
        assert config.series_order == 5
        assert config.rhs == 1
        assert config.max_deg == 6

    def test_bad_rhs(self, tmp_path):
        with patch.dict(os.environ, {"PROJFLOW_RHS": "2"}, clear=True):
            with pytest.raises(DomainError, match="PROJFLOW_RHS"):
                ProjflowConfig.load(tmp_path / "missing.toml")

    def test_map_needs_one_shape(self, tmp_path):
        path = tmp_path / "bad.toml"
        path.write_text('[maps.half]\nP = "y"\n')
        with pytest.raises(DomainError, match="invalid definitions"):
            ProjflowConfig.load(path)

    def test_json_file(self, tmp_path):
        path = tmp_path / "config.json"
        path.write_text('{"defaults": {"seed": 7}, "integrals": {"w": "x/y"}}')
        with patch.dict(os.environ, {}, clear=True):
            config = ProjflowConfig.load(path)
        assert config.seed == 7
        assert config.definitions.integrals["w"].N is None

    def test_unreadable_file(self, tmp_path):
        path = Path(tmp_path / "broken.toml")
        path.write_text("[defaults\n")
        with pytest.raises(DomainError, match="cannot read"):
            ProjflowConfig.load(path)
