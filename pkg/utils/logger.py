"""
Logging helpers - handlers are configured once in main.py
"""
import logging
import sys


def configure_logging(level: str = "INFO"):
    """Install the single handler used by the CLI (stderr keeps stdout for tables)."""
    logging.basicConfig(
        level=getattr(logging, str(level).upper(), logging.INFO),
        format='%(levelname)s: %(message)s',
        stream=sys.stderr,
        force=True
    )


def get_logger(name: str):
    """Get logger configured in main.py"""
    return logging.getLogger(name)
