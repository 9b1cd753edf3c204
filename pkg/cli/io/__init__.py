"""
CLI result persistence
"""

from .writer import ResultWriter, read_results_csv

__all__ = ["ResultWriter", "read_results_csv"]
