"""
Configuration settings for the HydroDeep package.

This module handles environment variable loading and process-wide defaults.
"""
import os

from dotenv import load_dotenv

load_dotenv()


def _env_flag(name: str, default: bool) -> bool:
    value = os.getenv(name)
    if value is None:
        return default
    return value.strip().lower() in ("1", "true", "yes", "on")


class Settings:
    """
    Process-wide settings loaded from environment variables.

    Attributes:
        log_level (str): Root log level for the hydrodeep loggers.
        default_seed (int): Seed used when a run config does not name one.
        float_format (str): printf-style format for floats in emitted CSV files.
        progress (bool): Whether training shows a tqdm progress bar.
        checkpoint_version (int): Format version written into checkpoints.
    """

    def __init__(self) -> None:
        self.log_level: str = os.getenv("HYDRODEEP_LOG_LEVEL", "INFO")
        self.default_seed: int = int(os.getenv("HYDRODEEP_SEED", "0"))
        self.float_format: str = os.getenv("HYDRODEEP_FLOAT_FORMAT", "%.10g")
        self.progress: bool = _env_flag("HYDRODEEP_PROGRESS", False)
        self.checkpoint_version: int = int(os.getenv("HYDRODEEP_CHECKPOINT_VERSION", "1"))


# Global settings instance
settings = Settings()
