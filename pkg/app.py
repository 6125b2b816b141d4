#!/usr/bin/env python3
"""
Main Application Entry Point
finitekit command line
"""

import sys
from pathlib import Path

from dotenv import load_dotenv

# Add src to path for imports
sys.path.insert(0, str(Path(__file__).parent))

# Load environment variables before settings are read
load_dotenv()

from src.cli.main import main as cli_main  # noqa: E402


def main() -> None:
    sys.exit(cli_main())


if __name__ == "__main__":
    main()
