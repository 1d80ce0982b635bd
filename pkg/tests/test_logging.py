import logging

from rich.logging import RichHandler

from tresse.utils.logging import LOGGER_NAME, elide, setup_logging


def test_elide():
    assert elide("x + y", 3, 10) == "x + y"
    assert elide("x + y", 30, 10) == "<elided: 30 nodes, use --full>"


def test_setup_logging_is_idempotent():
    setup_logging(verbose=True)
    setup_logging(verbose=False)
    logger = logging.getLogger(LOGGER_NAME)
    assert sum(isinstance(h, RichHandler) for h in logger.handlers) == 1
    assert logger.level == logging.WARNING
