"""Conic program data: linear objective, equalities, and LMI blocks.

A program is

    minimize    c' x
    subject to  A x = b
                sum_i x_i * B_{j,i} + D_j  is PSD for every block j

with x free.  Blocks are given as sparse coefficient triplets
(row, col, var, coeff); ``var = -1`` marks a constant contribution D_j.
Cell lists must describe symmetric matrices for every x.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import scipy.sparse as sp


class ProgramError(ValueError):
    """Raised for malformed conic program data."""


CONSTANT = -1


@dataclass
class LmiBlock:
    """One linear-matrix-inequality block in triplet form."""

    size: int
    rows: np.ndarray
    cols: np.ndarray
    vars: np.ndarray
    coeffs: np.ndarray

    def __post_init__(self):
        self.rows = np.asarray(self.rows, dtype=np.int32)
        self.cols = np.asarray(self.cols, dtype=np.int32)
        self.vars = np.asarray(self.vars, dtype=np.int64)
        self.coeffs = np.asarray(self.coeffs, dtype=float)
        lens = {a.shape[0] for a in (self.rows, self.cols, self.vars, self.coeffs)}
        if len(lens) != 1:
            raise ProgramError("triplet arrays have inconsistent lengths")
        if self.rows.size and (
            self.rows.min() < 0
            or self.rows.max() >= self.size
            or self.cols.min() < 0
            or self.cols.max() >= self.size
        ):
            raise ProgramError(f"cell index outside block of size {self.size}")

    def validate_symmetry(self, num_vars: int, tol: float = 0.0) -> None:
        if self.vars.size and self.vars.max() >= num_vars:
            raise ProgramError(
                f"block references variable {self.vars.max()} >= N={num_vars}"
            )
        if self.vars.size and self.vars.min() < CONSTANT:
            raise ProgramError("variable ids must be >= -1")
        acc: dict[tuple[int, int, int], float] = {}
        for r, c, v, w in zip(self.rows, self.cols, self.vars, self.coeffs):
            key = (int(r), int(c), int(v))
            acc[key] = acc.get(key, 0.0) + float(w)
        for (r, c, v), w in acc.items():
            mirrored = acc.get((c, r, v), 0.0)
            if abs(w - mirrored) > tol:
                raise ProgramError(
                    f"block not symmetric at cell ({r},{c}) for variable {v}: "
                    f"{w} vs {mirrored}"
                )

    def constant_matrix(self) -> np.ndarray:
        d = np.zeros((self.size, self.size))
        mask = self.vars == CONSTANT
        np.add.at(d, (self.rows[mask], self.cols[mask]), self.coeffs[mask])
        return d

    def evaluate(self, x: np.ndarray) -> np.ndarray:
        """Full matrix value D + sum_i x_i B_i at the point x."""
        out = np.zeros((self.size, self.size))
        mask = self.vars != CONSTANT
        vals = np.where(mask, self.coeffs * x[np.where(mask, self.vars, 0)], self.coeffs)
        np.add.at(out, (self.rows, self.cols), vals)
        return out

    def evaluate_linear(self, x: np.ndarray) -> np.ndarray:
        """Variable part only: sum_i x_i B_i."""
        out = np.zeros((self.size, self.size))
        mask = self.vars != CONSTANT
        np.add.at(
            out,
            (self.rows[mask], self.cols[mask]),
            self.coeffs[mask] * x[self.vars[mask]],
        )
        return out

    def adjoint_into(self, mat: np.ndarray, out: np.ndarray) -> None:
        """Accumulate adjoint of the variable part applied to ``mat``."""
        mask = self.vars != CONSTANT
        contrib = np.bincount(
            self.vars[mask],
            weights=self.coeffs[mask] * mat[self.rows[mask], self.cols[mask]],
            minlength=out.shape[0],
        )
        out += contrib


@dataclass
class ConicProgram:
    """Conic program over N free variables; see module docstring."""

    num_vars: int
    objective: np.ndarray
    eq_matrix: object  # dense array or scipy sparse, shape (m, N)
    eq_rhs: np.ndarray
    blocks: list[LmiBlock] = field(default_factory=list)

    def __post_init__(self):
        self.objective = np.asarray(self.objective, dtype=float)
        self.eq_rhs = np.asarray(self.eq_rhs, dtype=float)
        if self.objective.shape != (self.num_vars,):
            raise ProgramError(
                f"objective shape {self.objective.shape} != ({self.num_vars},)"
            )
        m = self.eq_rhs.shape[0]
        shape = self.eq_matrix.shape
        if shape != (m, self.num_vars):
            raise ProgramError(
                f"equality matrix shape {shape} inconsistent with rhs ({m},) "
                f"and N={self.num_vars}"
            )
        if not np.all(np.isfinite(self.objective)) or not np.all(
            np.isfinite(self.eq_rhs)
        ):
            raise ProgramError("non-finite program data")

    @property
    def num_eq(self) -> int:
        return int(self.eq_rhs.shape[0])

    def validate(self) -> None:
        for blk in self.blocks:
            blk.validate_symmetry(self.num_vars)

    def eq_dense(self) -> np.ndarray:
        if sp.issparse(self.eq_matrix):
            return np.asarray(self.eq_matrix.todense(), dtype=float)
        return np.ascontiguousarray(self.eq_matrix, dtype=float)

    def eq_apply(self, x: np.ndarray) -> np.ndarray:
        return np.asarray(self.eq_matrix @ x).ravel()

    def eq_apply_t(self, y: np.ndarray) -> np.ndarray:
        if sp.issparse(self.eq_matrix):
            return np.asarray(self.eq_matrix.T @ y).ravel()
        return self.eq_matrix.T @ y

    def block_values(self, x: np.ndarray) -> list[np.ndarray]:
        return [blk.evaluate(x) for blk in self.blocks]

    def adjoint(self, mats: Sequence[np.ndarray]) -> np.ndarray:
        out = np.zeros(self.num_vars)
        for blk, mat in zip(self.blocks, mats):
            blk.adjoint_into(mat, out)
        return out

    def dump_text(self, path: str) -> None:
        """Write the program in a plain sparse-triplet text format.

        Header line: N, number of equality rows, block sizes.  Then one
        section per data field with one triplet (or pair) per line.
        """
        lines = [
            "conicprogram v1",
            f"vars {self.num_vars}",
            f"eqrows {self.num_eq}",
            "blocks " + " ".join(str(b.size) for b in self.blocks),
            "objective",
        ]
        for i in np.nonzero(self.objective)[0]:
            lines.append(f"{i} {self.objective[i]!r}")
        lines.append("eq_matrix")
        eq = sp.coo_matrix(self.eq_matrix)
        for r, c, v in zip(eq.row, eq.col, eq.data):
            lines.append(f"{r} {c} {v!r}")
        lines.append("eq_rhs")
        for i, v in enumerate(self.eq_rhs):
            if v != 0.0:
                lines.append(f"{i} {v!r}")
        for j, blk in enumerate(self.blocks):
            lines.append(f"block {j} size {blk.size}")
            for r, c, var, w in zip(blk.rows, blk.cols, blk.vars, blk.coeffs):
                lines.append(f"{r} {c} {var} {w!r}")
        lines.append("end")
        with open(path, "w") as fh:
            fh.write("\n".join(lines) + "\n")


@dataclass
class Presolve:
    """Presolve result: row selection plus any trivially derived certificate.

    ``keep`` indexes the retained equality rows of the original program.
    If two duplicate rows carry conflicting right-hand sides the problem is
    infeasible outright and ``conflict`` holds the (i, j) row pair.
    """

    keep: np.ndarray
    dropped_zero: int
    dropped_duplicate: int
    conflict: tuple[int, int] | None


def presolve_equalities(prog: ConicProgram, tol: float = 0.0) -> Presolve:
    """Drop identically-zero rows and exact duplicate rows of the equalities."""
    eq = sp.csr_matrix(prog.eq_matrix) if not sp.issparse(prog.eq_matrix) else prog.eq_matrix.tocsr()
    m = prog.num_eq
    keep: list[int] = []
    seen: dict[tuple, int] = {}
    dropped_zero = dropped_dup = 0
    conflict = None
    for i in range(m):
        lo, hi = eq.indptr[i], eq.indptr[i + 1]
        cols = eq.indices[lo:hi]
        vals = eq.data[lo:hi]
        nz = vals != 0.0
        cols, vals = cols[nz], vals[nz]
        if cols.size == 0:
            if abs(prog.eq_rhs[i]) > tol:
                conflict = (i, i)
                break
            dropped_zero += 1
            continue
        order = np.argsort(cols)
        key = (tuple(cols[order]), tuple(vals[order]))
        if key in seen:
            j = seen[key]
            if abs(prog.eq_rhs[i] - prog.eq_rhs[j]) > tol:
                conflict = (j, i)
                break
            dropped_dup += 1
            continue
        seen[key] = i
        keep.append(i)
    return Presolve(np.array(keep, dtype=np.int64), dropped_zero, dropped_dup, conflict)
