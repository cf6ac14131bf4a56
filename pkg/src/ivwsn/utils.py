"""
Utility functions for the simulator.
"""

import logging
import sys


def setup_logging(level: str = "INFO") -> None:
    """
    Setup basic logging configuration.

    Args:
        level: Logging level (DEBUG, INFO, WARNING, ERROR, CRITICAL)
    """
    logging.basicConfig(
        level=getattr(logging, level.upper(), logging.INFO),
        format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
        handlers=[logging.StreamHandler(sys.stderr)],
    )


def parse_values(text: str) -> list:
    """Comma-separated sweep values; an empty string gives no values."""
    return [v.strip() for v in text.split(",") if v.strip()]
