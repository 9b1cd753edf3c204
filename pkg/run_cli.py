#!/usr/bin/env python3
"""
annealbench CLI Startup Script
Loads .env and runs the command-line tool
"""

import sys
from pathlib import Path

from dotenv import load_dotenv

# Load environment variables from .env file
load_dotenv()

# Add the current directory to Python path
sys.path.insert(0, str(Path(__file__).parent.absolute()))


def main() -> None:
    """Main entry point for the annealbench CLI"""
    try:
        from cli.main import main as cli_main
    except ImportError as e:
        print(f"Import error: {e}", file=sys.stderr)
        print("Make sure you have installed the required dependencies:", file=sys.stderr)
        print("pip install -r requirements.txt", file=sys.stderr)
        sys.exit(1)
    sys.exit(cli_main())


if __name__ == "__main__":
    main()
