"""Dense conic solver: programs, interior-point solve, outcome verification."""

from .program import CONSTANT, ConicProgram, LmiBlock, ProgramError, presolve_equalities
from .solver import (
    Certificate,
    ConicOutcome,
    SolveStats,
    SolveStatus,
    SolverOptions,
    solve,
)
from .verify import VerificationReport, verify_infeasibility, verify_optimum

__all__ = [
    "CONSTANT",
    "Certificate",
    "ConicOutcome",
    "ConicProgram",
    "LmiBlock",
    "ProgramError",
    "SolveStats",
    "SolveStatus",
    "SolverOptions",
    "VerificationReport",
    "presolve_equalities",
    "solve",
    "verify_infeasibility",
    "verify_optimum",
]
