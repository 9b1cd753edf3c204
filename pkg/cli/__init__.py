"""
annealbench command-line package
Subcommands anneal, sweep, spectrum, envelope and oracle-check
"""

__version__ = "1.0.0"
__description__ = "annealbench - quantum vs classical annealing benchmarks"

from .main import main

__all__ = ["main"]
