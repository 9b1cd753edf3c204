"""
CLI Commands Package
"""

from . import anneal, envelope, oracle_check, spectrum, sweep

__all__ = ["anneal", "sweep", "spectrum", "envelope", "oracle_check"]
