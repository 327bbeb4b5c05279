# =============================================================
# src/core/log_setup.py
#
# loguru ships with a default stderr sink at DEBUG. Training
# loops log once per group per iteration, which drowns the
# terminal at DEBUG, so the CLI calls configure_logging()
# once at startup to swap in a sink at Settings.LOG_LEVEL.
# =============================================================

import sys

from loguru import logger

LOG_FORMAT = (
    "<green>{time:HH:mm:ss}</green> | "
    "<level>{level: <8}</level> | "
    "<cyan>{name}</cyan> - {message}"
)


def configure_logging(level: str = "INFO") -> None:
    logger.remove()
    logger.add(sys.stderr, level=level.upper(), format=LOG_FORMAT)
