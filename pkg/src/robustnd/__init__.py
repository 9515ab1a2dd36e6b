"""Robust multiperiod capacitated network design toolkit.

Exact branch-and-bound over a built-in LP core plus a hybrid ant-colony /
large-neighborhood-search primal heuristic, with SNDlib ingestion and a
canonical instance format.
"""

from .tolerances import DEFAULT, Tolerances

__all__ = ["DEFAULT", "Tolerances"]
__version__ = "0.1.0"
