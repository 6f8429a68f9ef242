"""
Runtime settings loaded from the environment (.env supported) and logging setup
"""
import logging
import os
from typing import Optional

from dotenv import load_dotenv
from pydantic import BaseModel, Field

load_dotenv()

__version__ = "0.1.0"

LOG_FORMAT = "[%(name)s] %(message)s"


class Settings(BaseModel):
    """Process-wide defaults; CLI flags take precedence"""

    out_dir: str = "runs"
    log_level: str = "INFO"
    workers: int = Field(default=4, ge=1)
    seed: int = 0


def get_settings() -> Settings:
    """Read AIRFORGE_* variables into a Settings object"""
    values = {
        "out_dir": os.getenv("AIRFORGE_OUT_DIR"),
        "log_level": os.getenv("AIRFORGE_LOG_LEVEL"),
        "workers": os.getenv("AIRFORGE_WORKERS"),
        "seed": os.getenv("AIRFORGE_SEED"),
    }
    return Settings(**{k: v for k, v in values.items() if v not in (None, "")})


def setup_logging(level: Optional[str] = None) -> None:
    """Install the tag-style console format used by every AirForge logger"""
    level = (level or get_settings().log_level).upper()
    logging.basicConfig(level=level, format=LOG_FORMAT, force=True)
