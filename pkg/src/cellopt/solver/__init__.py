"""Bundled MILP machinery: LP core, branch and bound, model export/import."""

from .lp import LpSolution, ScaledLp, solve_lp
from .bnb import BnbResult, branch_and_bound
from .mpsio import export_model, format_solution, import_solution

__all__ = [
    "LpSolution",
    "ScaledLp",
    "solve_lp",
    "BnbResult",
    "branch_and_bound",
    "export_model",
    "format_solution",
    "import_solution",
]
