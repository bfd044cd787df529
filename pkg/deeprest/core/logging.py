"""
Logger setup

Messages use bracket tags, e.g.
[TRAIN] layer=2 | iter=100 | cost=1.23e+06
"""
import logging
import sys

_CONFIGURED = False


def configure_logging(level: str = "INFO") -> None:
    """
    Attach a single stderr handler to the package logger (idempotent)
    """
    global _CONFIGURED
    root = logging.getLogger("deeprest")
    root.setLevel(level)
    if _CONFIGURED:
        return
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter("%(asctime)s %(levelname)s %(name)s %(message)s"))
    root.addHandler(handler)
    _CONFIGURED = True


def get_logger(name: str) -> logging.Logger:
    return logging.getLogger(f"deeprest.{name}")
