"""
Configuration management for projflow.

Supports:
- Environment variables
- Config file (.projflow.toml, or any TOML/JSON path)
- Named definitions of flows, fields, integrals and maps
- CLI arguments (highest priority)
"""

from __future__ import annotations

import json
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Optional

from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from projflow.errors import DomainError

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib


CONFIG_FILE_NAME = ".projflow.toml"
ENV_PREFIX = "PROJFLOW_"


def _truthy(value: str) -> bool:
    return value.lower() in ("1", "true", "yes")


def _sign(value: str) -> int:
    sign = int(value)
    if sign not in (1, -1):
        raise ValueError(f"rhs must be +1 or -1, got {value}")
    return sign


class IntegralSpec(BaseModel):
    """A homogeneous first integral: {"W": "<expr>", "N": int}."""

    model_config = ConfigDict(populate_by_name=True)

    W: str
    N: Optional[int] = None


class BirMapSpec(BaseModel):
    """Either a (P, Q) pair or an explicit tuple with its inverse."""

    model_config = ConfigDict(populate_by_name=True)

    P: Optional[str] = None
    Q: Optional[str] = None
    forward: Optional[list[str]] = Field(default=None, alias="tuple")
    inverse: Optional[list[str]] = None

    @model_validator(mode="after")
    def _check_shape(self) -> BirMapSpec:
        pair = self.P is not None and self.Q is not None
        explicit = self.forward is not None and self.inverse is not None
        if pair == explicit:
            raise ValueError("a map needs either P and Q, or tuple and inverse")
        if explicit and len(self.forward or []) != len(self.inverse or []):
            raise ValueError("tuple and inverse must have the same length")
        return self


class Definitions(BaseModel):
    """Named objects a config file can predefine."""

    model_config = ConfigDict(populate_by_name=True)

    flows: dict[str, list[str]] = Field(default_factory=dict)
    vector_fields: dict[str, list[str]] = Field(default_factory=dict, alias="fields")
    integrals: dict[str, IntegralSpec] = Field(default_factory=dict)
    maps: dict[str, BirMapSpec] = Field(default_factory=dict)

    @model_validator(mode="before")
    @classmethod
    def _expand_short_integrals(cls, data: Any) -> Any:
        if isinstance(data, dict) and isinstance(data.get("integrals"), dict):
            data = dict(data)
            data["integrals"] = {
                name: {"W": spec} if isinstance(spec, str) else spec
                for name, spec in data["integrals"].items()
            }
        return data


@dataclass
class ProjflowConfig:
    """Configuration for projflow."""

    # Series verification
    series_order: int = 8

    # Numeric verification
    numeric_tol: float = 1e-9
    numeric_samples: int = 64
    seed: int = 0

    # Fundamental ODE
    max_deg: int | None = None  # None selects the heuristic bound
    rhs: int = 1
    literal_square: bool = False

    definitions: Definitions = field(default_factory=Definitions)

    @classmethod
    def load(cls, config_path: Path | None = None) -> ProjflowConfig:
        """
        Load configuration from multiple sources.

        Priority (highest to lowest):
        1. Environment variables
        2. Config file
        3. Defaults
        """
        config_dict: dict[str, Any] = {}

        if config_path is None:
            config_path = cls._find_config_file()

        if config_path and config_path.exists():
            config_dict.update(cls._flatten_config(cls._read_file(config_path)))

        config_dict.update(cls._load_from_env())

        return cls(**config_dict)

    @classmethod
    def _find_config_file(cls) -> Path | None:
        """Find config file by walking up from current directory."""
        current = Path.cwd()

        while current != current.parent:
            config_file = current / CONFIG_FILE_NAME
            if config_file.exists():
                return config_file
            current = current.parent

        home_config = Path.home() / CONFIG_FILE_NAME
        if home_config.exists():
            return home_config

        return None

    @staticmethod
    def _read_file(path: Path) -> dict[str, Any]:
        try:
            if path.suffix == ".json":
                data = json.loads(path.read_text(encoding="utf-8"))
            else:
                with open(path, "rb") as f:
                    data = tomllib.load(f)
        except (OSError, ValueError) as e:
            raise DomainError(f"cannot read config file {path}: {e}") from e
        if not isinstance(data, dict):
            raise DomainError(f"config file {path} must contain a table")
        return data

    @classmethod
    def _flatten_config(cls, config: dict[str, Any]) -> dict[str, Any]:
        """Flatten nested config to match dataclass fields."""
        result: dict[str, Any] = {}

        defaults = config.get("defaults", {})
        for key in ("series_order", "numeric_samples", "seed", "max_deg"):
            if key in defaults:
                result[key] = int(defaults[key])
        if "numeric_tol" in defaults:
            result["numeric_tol"] = float(defaults["numeric_tol"])
        if "rhs" in defaults:
            result["rhs"] = _sign(str(defaults["rhs"]))
        if "literal_square" in defaults:
            result["literal_square"] = bool(defaults["literal_square"])

        sections = {k: config[k] for k in ("flows", "fields", "integrals", "maps") if k in config}
        try:
            result["definitions"] = Definitions.model_validate(sections)
        except ValidationError as e:
            raise DomainError(f"invalid definitions: {e.errors()[0]['msg']}") from e

        return result

    @classmethod
    def _load_from_env(cls) -> dict[str, Any]:
        """Load configuration from environment variables."""
        result: dict[str, Any] = {}

        converter_mappings: dict[str, tuple[str, Callable[[str], Any]]] = {
            "SERIES_ORDER": ("series_order", int),
            "NUMERIC_TOL": ("numeric_tol", float),
            "NUMERIC_SAMPLES": ("numeric_samples", int),
            "SEED": ("seed", int),
            "MAX_DEG": ("max_deg", int),
            "RHS": ("rhs", _sign),
            "LITERAL_SQUARE": ("literal_square", _truthy),
        }

        for env_suffix, (field_name, converter) in converter_mappings.items():
            value = os.environ.get(f"{ENV_PREFIX}{env_suffix}")
            if value is not None:
                try:
                    result[field_name] = converter(value)
                except ValueError as e:
                    raise DomainError(f"{ENV_PREFIX}{env_suffix}: {e}") from e

        return result
