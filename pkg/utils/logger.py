"""
Logging setup.
"""

import os
import sys
from typing import Optional

from loguru import logger

sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))
from config import Config

_configured_level: Optional[str] = None


def setup_logging(level: Optional[str] = None) -> None:
    """Install the stderr sink with the project format.

    Args:
        level: Log level name; defaults to Config.LOG_LEVEL.
    """
    global _configured_level
    level = (level or Config.LOG_LEVEL).upper()
    if _configured_level == level:
        return
    logger.remove()
    logger.add(sys.stderr, level=level, format=Config.LOG_FORMAT)
    _configured_level = level
    logger.debug(f"Logging configured at {level}")
