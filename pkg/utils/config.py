import os
from collections import OrderedDict
from typing import Any, Dict, Optional, Tuple

import toml
from pydantic import BaseModel, Field, ValidationError, field_validator, model_validator

from utils.errors import ConfigError

DEFAULT_CONFIG = "cmbp.toml"
LOG_LEVELS = ("debug", "info", "warning", "error", "critical")


class TomlConfig(OrderedDict):
    def __init__(self, file_path: Optional[str] = None):
        super().__init__()
        self.file_path = file_path
        self.load_toml()

    def load_toml(self):
        if self.file_path is None:
            return
        if os.path.isfile(self.file_path):
            with open(self.file_path, "r", encoding="utf-8") as fp:
                try:
                    data = toml.load(fp)
                except toml.TomlDecodeError as e:
                    raise ConfigError(f"Could not parse config file {self.file_path}: {e}") from e
                self.update(data)
        else:
            raise FileNotFoundError(f"Could not find config file at path {self.file_path}!")

    def reload(self):
        self.clear()
        self.load_toml()


class GeneralSettings(BaseModel):
    log_level: str = "warning"

    @field_validator("log_level")
    @classmethod
    def known_level(cls, value: str) -> str:
        if value.lower() not in LOG_LEVELS:
            raise ValueError(f"log_level must be one of {', '.join(LOG_LEVELS)}")
        return value.lower()


class EngineSettings(BaseModel):
    unique_table_bits: int = Field(20, ge=1, le=40)
    computed_table_bits: int = Field(18, ge=1, le=30)
    max_nodes: int = Field(0, ge=0)


class PlannerSettings(BaseModel):
    prune: bool = True
    max_depth: int = Field(0, ge=0)
    all_plans: int = Field(1, ge=1)


class OracleSettings(BaseModel):
    bound: int = Field(16384, ge=1)
    max_fluents: int = Field(16, ge=1)


class BenchSettings(BaseModel):
    with_oracle: bool = False
    oracle_max_fluents: int = Field(12, ge=1)
    history_db: str = "bench_history.db"
    record_history: bool = False


class Settings(BaseModel):
    general: GeneralSettings = GeneralSettings()
    engine: EngineSettings = EngineSettings()
    planner: PlannerSettings = PlannerSettings()
    oracle: OracleSettings = OracleSettings()
    bench: BenchSettings = BenchSettings()


def load_settings(path: Optional[str] = None) -> Settings:
    """Load settings from a TOML file over the built-in defaults

    Args:
        path (Optional[str]): config file. When None, ./cmbp.toml is read if present

    Raises:
        FileNotFoundError: an explicitly given file does not exist
        ConfigError: the merged values do not validate
    """
    if path is None and os.path.isfile(DEFAULT_CONFIG):
        path = DEFAULT_CONFIG
    data: Dict[str, Any] = {k: dict(v) for k, v in TomlConfig(path).items() if isinstance(v, dict)}

    override = os.environ.get("CMBP_UNIQUE_TABLE_BITS")
    if override is not None:
        try:
            bits = int(override)
        except ValueError:
            raise ConfigError(
                f"CMBP_UNIQUE_TABLE_BITS must be an integer, got '{override}'"
            ) from None
        data.setdefault("engine", {})["unique_table_bits"] = bits

    try:
        return Settings.model_validate(data)
    except ValidationError as e:
        raise ConfigError(f"Invalid configuration: {e}") from e


class RunConfig(BaseModel):
    """One CLI invocation: settings merged with the command-line flags"""

    command: str
    path: Optional[str] = None
    family: Optional[str] = None
    params: Tuple[int, ...] = ()
    variant: Optional[str] = None
    max_depth: int = Field(0, ge=0)
    prune: bool = True
    all_plans: int = Field(1, ge=1)
    json_output: bool = False
    oracle_bound: int = Field(16384, ge=1)
    unique_table_bits: int = Field(20, ge=1, le=40)

    @model_validator(mode="after")
    def one_input_source(self) -> "RunConfig":
        if self.command in ("plan", "oracle", "verify"):
            if self.path is not None and self.family is not None:
                raise ValueError("give either a domain file or --family, not both")
            if self.path is None and self.family is None:
                raise ValueError("a domain file or --family is required")
        return self


def build_run_config(settings: Settings, **flags: Any) -> RunConfig:
    """Merge settings with flags; flags left as None fall back to settings"""
    values: Dict[str, Any] = {
        "max_depth": settings.planner.max_depth,
        "prune": settings.planner.prune,
        "all_plans": settings.planner.all_plans,
        "oracle_bound": settings.oracle.bound,
        "unique_table_bits": settings.engine.unique_table_bits,
    }
    values.update({k: v for k, v in flags.items() if v is not None})
    try:
        return RunConfig.model_validate(values)
    except ValidationError as e:
        raise ConfigError(f"Invalid arguments: {e}") from e
