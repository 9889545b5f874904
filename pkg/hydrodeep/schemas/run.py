"""
Run configuration loaded from YAML files and command-line overrides.
"""
import json
from pathlib import Path
from typing import Any, Dict, Optional

import yaml
from pydantic import BaseModel, Extra, Field, ValidationError

from hydrodeep import __version__
from hydrodeep.config.settings import settings
from hydrodeep.schemas.dataset import DataConfig
from hydrodeep.schemas.model import ModelConfig, ModelHyperparams, TrainConfig
from hydrodeep.schemas.synth import SynthSpec
from hydrodeep.schemas.transfer import TransferSettings
from hydrodeep.utils.enums import Arch
from hydrodeep.utils.exceptions import ConfigError


class RunConfig(BaseModel):
    """
    Effective settings of one command.

    Attributes:
        seed (int): Global seed; seeds model init, shuffling and generation.
        lag (int): Look-back window in days.
        data (DataConfig): Preprocessing.
        model (ModelHyperparams): Network sizes.
        train (TrainConfig): Training loop.
        synth (SynthSpec): Synthetic generation.
        transfer (TransferSettings): Transfer experiments.
    """
    seed: int = Field(default_factory=lambda: settings.default_seed)
    lag: int = Field(7, ge=1)
    data: DataConfig = DataConfig()
    model: ModelHyperparams = ModelHyperparams()
    train: TrainConfig = TrainConfig()
    synth: SynthSpec = SynthSpec()
    transfer: TransferSettings = TransferSettings()

    class Config:
        extra = Extra.forbid

    @classmethod
    def load(cls, path: Optional[Path] = None, overrides: Optional[Dict[str, Any]] = None) -> "RunConfig":
        """
        Read a YAML config file and apply dotted-key overrides.

        Args:
            path (Optional[Path]): YAML file; defaults are used when None.
            overrides (Optional[Dict[str, Any]]): e.g. ``{"train.epochs": 5}``;
                None values are ignored.

        Returns:
            RunConfig: Validated configuration.

        Raises:
            ConfigError: If the file is unreadable or contains unknown or invalid keys.
        """
        raw: Dict[str, Any] = {}
        if path is not None:
            try:
                with open(path, "r", encoding="utf-8") as handle:
                    raw = yaml.safe_load(handle) or {}
            except (OSError, yaml.YAMLError) as e:
                raise ConfigError(f"cannot read config {path}: {e}")
            if not isinstance(raw, dict):
                raise ConfigError(f"config {path} must be a mapping")
        for dotted, value in (overrides or {}).items():
            if value is None:
                continue
            node = raw
            *parents, leaf = dotted.split(".")
            for key in parents:
                node = node.setdefault(key, {})
            node[leaf] = value
        try:
            return cls.parse_obj(raw)
        except ValidationError as e:
            raise ConfigError(f"invalid config: {_first_error(e)}")

    def model_config(self, arch: Arch, grid_count: int) -> ModelConfig:
        """
        Full ModelConfig for one architecture and watershed.

        Raises:
            ConfigError: If the combination is invalid, e.g. a lag below 1.
        """
        try:
            return ModelConfig(**self.model.dict(), arch=arch, lag=self.lag, grid_count=grid_count, seed=self.seed)
        except ValidationError as e:
            raise ConfigError(f"invalid model config: {_first_error(e)}")

    def train_config(self) -> TrainConfig:
        return self.train.copy(update={"seed": self.seed})

    def as_plain(self) -> Dict[str, Any]:
        return json.loads(self.json())

    def write_provenance(self, out_dir: Path) -> None:
        """Write ``effective_config.yaml`` and ``VERSION`` into ``out_dir``."""
        out_dir.mkdir(parents=True, exist_ok=True)
        with open(out_dir / "effective_config.yaml", "w", encoding="utf-8") as handle:
            yaml.safe_dump(self.as_plain(), handle, sort_keys=True)
        (out_dir / "VERSION").write_text(f"hydrodeep {__version__}\n", encoding="utf-8")


def _first_error(error: ValidationError) -> str:
    first = error.errors()[0]
    location = ".".join(str(p) for p in first["loc"])
    return f"{location}: {first['msg']}"
