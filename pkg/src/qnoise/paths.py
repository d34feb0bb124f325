"""Filesystem paths for the application."""
from pathlib import Path

ROOT_DIR = Path(__file__).parent.parent.parent
CONF_DIR = ROOT_DIR / "conf"
LOGGER_CONFIG = CONF_DIR / "logger.json"
