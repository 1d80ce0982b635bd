"""Logging utilities for Tresse."""

import logging

from rich.console import Console
from rich.logging import RichHandler

LOGGER_NAME = "tresse"


def setup_logging(verbose: bool = False) -> None:
    """Route library log records through rich.

    Args:
        verbose: If True, show DEBUG records (sample rejections, rank votes).
    """
    logger = logging.getLogger(LOGGER_NAME)
    logger.setLevel(logging.DEBUG if verbose else logging.WARNING)
    if not any(isinstance(h, RichHandler) for h in logger.handlers):
        handler = RichHandler(console=Console(stderr=True), show_path=False, markup=False)
        handler.setFormatter(logging.Formatter("%(message)s"))
        logger.addHandler(handler)


def elide(text: str, nodes: int, limit: int) -> str:
    """Shorten a symbolic string whose tree is larger than ``limit`` nodes.

    Args:
        text: Printed expression.
        nodes: Node count of the expression tree.
        limit: Largest tree printed in full.

    Returns:
        The text itself, or a placeholder naming the size.
    """
    if nodes <= limit:
        return text
    return f"<elided: {nodes} nodes, use --full>"
