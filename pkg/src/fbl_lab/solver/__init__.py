"""Numerical engines: multi-start ratio ascent and a dense simplex LP solver."""
from .ascent import AscentConfig, maximize_ratio, worker_count
from .simplex import LinearProgram, LPResult, solve_lp

__all__ = ["AscentConfig", "maximize_ratio", "LinearProgram", "LPResult", "solve_lp", "worker_count"]
