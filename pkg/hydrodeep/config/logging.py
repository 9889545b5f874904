"""
Logging setup for the HydroDeep command line and library code.
"""
import logging
import sys
from typing import Optional

from hydrodeep.config.settings import settings
from hydrodeep.utils.exceptions import ConfigError

LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"


def configure_logging(level: Optional[str] = None) -> None:
    """
    Configure the ``hydrodeep`` logger hierarchy.

    Each call replaces the previous handler with one bound to the current
    ``sys.stderr``, so repeated command invocations in one process log to
    the live stream.

    Args:
        level (Optional[str]): Log level name; defaults to ``settings.log_level``.

    Raises:
        ConfigError: If the level name is unknown.
    """
    root = logging.getLogger("hydrodeep")
    try:
        root.setLevel((level or settings.log_level).upper())
    except ValueError as e:
        raise ConfigError(f"invalid log level: {e}")
    for handler in list(root.handlers):
        root.removeHandler(handler)
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter(LOG_FORMAT))
    root.addHandler(handler)
    root.propagate = False
