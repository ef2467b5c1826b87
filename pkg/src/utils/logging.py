import logging
import sys
from typing import Optional

from src.config.settings import settings


def setup_logging(level: Optional[str] = None):
    """
    Configure logging for the command line based on settings.

    Reports go to stdout and files, so log records are sent to stderr.
    """
    level_name = (level or settings.LOGGING.LEVEL).upper()
    log_level = getattr(logging, level_name, logging.WARNING)

    # force=True so repeated CLI invocations in one process (tests) reconfigure
    logging.basicConfig(
        level=log_level,
        format=settings.LOGGING.FORMAT,
        handlers=[
            logging.StreamHandler(sys.stderr),
        ],
        force=True,
    )

    logger = logging.getLogger("src")
    logger.setLevel(log_level)
    logger.debug(f"Logging initialized at level {level_name}")
    logger.debug(f"{settings.PROJECT_NAME} v{settings.VERSION} on {settings.HOST_NAME}")

    return logger

