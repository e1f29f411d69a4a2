"""Console logging for the command-line tool."""

import logging

from rich.console import Console
from rich.logging import RichHandler

LEVELS = {0: logging.WARNING, 1: logging.INFO}


def setup_logging(verbose: int = 0) -> logging.Logger:
    """
    Attach a RichHandler to the package logger.

    Args:
        verbose: 0 warnings only, 1 progress (-v), 2 or more debug (-vv)
    """
    logger = logging.getLogger("euclidprefs")
    logger.setLevel(LEVELS.get(verbose, logging.DEBUG))
    for handler in list(logger.handlers):
        if isinstance(handler, RichHandler):
            logger.removeHandler(handler)
    handler = RichHandler(
        console=Console(stderr=True),
        show_path=verbose >= 2,
        rich_tracebacks=True,
        markup=False,
    )
    handler.setFormatter(logging.Formatter("%(name)s: %(message)s", datefmt="[%X]"))
    logger.addHandler(handler)
    logger.propagate = False
    return logger
