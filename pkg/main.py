"""
Main Entry Point for the Flow Map Lab
Parses the command line and runs one experiment command
"""

import sys

from cli.commands import main as run_cli
from utils.logger import get_logger

# Initialize logger for main module
logger = get_logger(__name__)


def main() -> int:
    """Run the command named on the command line and return its exit code."""
    logger.debug("=" * 60)
    logger.debug(f"Starting flow map lab: {' '.join(sys.argv[1:])}")
    logger.debug("=" * 60)
    return run_cli(sys.argv[1:])


if __name__ == "__main__":
    sys.exit(main())
