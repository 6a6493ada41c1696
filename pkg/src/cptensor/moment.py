"""Truncated moment sequences, moment matrices and localizing matrices.

A truncated moment sequence (tms) of degree d is a real vector indexed by
all multi-indices of degree <= d.  The pairing of a polynomial with a tms
is the linear functional sending x^alpha to the alpha-th moment; moment
and localizing matrices are the Gram-type matrices of that functional.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import ceil

import numpy as np

from .multiindex import MultiIndex, MultiIndexBasis, add, basis, count_leq


class MomentError(ValueError):
    """Raised for degree or indexing violations in moment computations."""


@dataclass(frozen=True)
class Tms:
    """Truncated moment sequence: moments s_alpha for all |alpha| <= d."""

    n: int
    d: int
    s: np.ndarray

    def __post_init__(self):
        s = np.asarray(self.s, dtype=float)
        expected = count_leq(self.n, self.d)
        if s.shape != (expected,):
            raise MomentError(
                f"moment vector has shape {s.shape}, expected ({expected},) "
                f"for n={self.n}, d={self.d}"
            )
        if not np.all(np.isfinite(s)):
            raise MomentError("moment vector contains non-finite entries")
        object.__setattr__(self, "s", s)

    @property
    def basis(self) -> MultiIndexBasis:
        return basis(self.n, self.d)

    def moment(self, alpha: MultiIndex) -> float:
        return float(self.s[self.basis.position(alpha)])


@dataclass(frozen=True)
class Polynomial:
    """Polynomial as a coefficient vector over the degree-<=degree basis."""

    n: int
    degree: int
    coeffs: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=float)
        expected = count_leq(self.n, self.degree)
        if c.shape != (expected,):
            raise MomentError(
                f"coefficient vector has shape {c.shape}, expected ({expected},)"
            )
        if not np.all(np.isfinite(c)):
            raise MomentError("polynomial has non-finite coefficients")
        object.__setattr__(self, "coeffs", c)

    @property
    def basis(self) -> MultiIndexBasis:
        return basis(self.n, self.degree)

    def __call__(self, x: np.ndarray) -> float:
        x = np.asarray(x, dtype=float)
        exps = np.array(self.basis.indices, dtype=float)
        return float(self.coeffs @ np.prod(x[None, :] ** exps, axis=1))

    def effective_degree(self) -> int:
        """Degree of the highest monomial with a nonzero coefficient."""
        nz = np.nonzero(self.coeffs)[0]
        if nz.size == 0:
            return 0
        return max(sum(self.basis[i]) for i in nz)


def riesz(a, p: Polynomial, index_set=None) -> float:
    """Apply the moment functional of ``a`` to the polynomial ``p``.

    ``a`` may be a Tms, a plain vector over the graded basis prefix, or --
    with ``index_set`` given -- a vector indexed by an explicit list of
    multi-indices (e.g. an identifying vector over {|alpha| = m}).  Every
    monomial of p with a nonzero coefficient must be indexed within a.
    """
    if isinstance(a, Tms):
        if p.n != a.n:
            raise MomentError(f"dimension mismatch: polynomial n={p.n}, tms n={a.n}")
        if p.effective_degree() > a.d:
            raise MomentError(
                f"polynomial degree {p.effective_degree()} exceeds tms degree {a.d}"
            )
        k = min(len(p.coeffs), a.s.shape[0])
        return float(np.dot(p.coeffs[:k], a.s[:k]))
    vec = np.asarray(a, dtype=float)
    if index_set is not None:
        positions = {tuple(alpha): i for i, alpha in enumerate(index_set)}
        if vec.shape[0] != len(positions):
            raise MomentError(
                f"vector length {vec.shape[0]} does not match index set size "
                f"{len(positions)}"
            )
        total = 0.0
        pb = p.basis
        for i in np.nonzero(p.coeffs)[0]:
            alpha = pb[int(i)]
            if alpha not in positions:
                raise MomentError(f"monomial {alpha} outside the index set of a")
            total += p.coeffs[i] * vec[positions[alpha]]
        return float(total)
    nz = np.nonzero(p.coeffs)[0]
    needed = int(nz[-1]) + 1 if nz.size else 0
    if vec.shape[0] < needed:
        raise MomentError(
            f"moment vector of length {vec.shape[0]} too short for polynomial "
            f"needing {needed} entries"
        )
    k = min(len(p.coeffs), vec.shape[0])
    return float(np.dot(p.coeffs[:k], vec[:k]))


@dataclass(frozen=True)
class LocalizingStructure:
    """Index form of the linear map from a moment vector to a localizing matrix.

    Entry (rows[i], cols[i]) of the matrix accumulates coeffs[i] times
    moment number vars[i].  All cells of the full (mirrored) matrix are
    listed, so the adjoint map is a plain scatter-add over the same arrays.
    """

    n: int
    k: int
    size: int
    rows: np.ndarray
    cols: np.ndarray
    vars: np.ndarray
    coeffs: np.ndarray

    def apply(self, s: np.ndarray) -> np.ndarray:
        """Evaluate the matrix at a moment vector of degree 2k."""
        out = np.zeros((self.size, self.size))
        np.add.at(out, (self.rows, self.cols), self.coeffs * s[self.vars])
        return out

    def adjoint(self, mat: np.ndarray, out: np.ndarray) -> None:
        """Accumulate the adjoint applied to a symmetric matrix into ``out``."""
        np.add.at(out, self.vars, self.coeffs * mat[self.rows, self.cols])


def localizing_structure(n: int, k: int, q: Polynomial) -> LocalizingStructure:
    """Cell structure of the order-k localizing map of the polynomial q.

    The matrix is indexed by multi-indices of degree <= k - ceil(deg(q)/2),
    and cell (beta, gamma) reads sum_alpha q_alpha * s_{alpha+beta+gamma}.
    """
    if q.n != n:
        raise MomentError(f"polynomial dimension {q.n} does not match n={n}")
    dq = q.effective_degree()
    if dq > 2 * k:
        raise MomentError(f"polynomial degree {dq} exceeds 2k={2 * k}")
    kp = k - ceil(dq / 2)
    rows_basis = basis(n, kp)
    full = basis(n, 2 * k)
    qb = q.basis
    size = len(rows_basis)
    rows, cols, vars_, coeffs = [], [], [], []
    nz = np.nonzero(q.coeffs)[0]
    for i, beta in enumerate(rows_basis):
        for j, gamma in enumerate(rows_basis):
            bg = add(beta, gamma)
            for t in nz:
                alpha = qb[t]
                rows.append(i)
                cols.append(j)
                vars_.append(full.position(add(bg, alpha)))
                coeffs.append(q.coeffs[t])
    return LocalizingStructure(
        n,
        k,
        size,
        np.array(rows, dtype=np.int32),
        np.array(cols, dtype=np.int32),
        np.array(vars_, dtype=np.int64),
        np.array(coeffs, dtype=float),
    )


def localizing_matrix(s: Tms, q: Polynomial, k: int) -> np.ndarray:
    """Order-k localizing matrix of q generated by the moment sequence s."""
    if s.d < 2 * k:
        raise MomentError(f"tms degree {s.d} below 2k={2 * k}")
    struct = localizing_structure(s.n, k, q)
    if s.d == 2 * k:
        vec = s.s
    else:
        vec = s.s[: count_leq(s.n, 2 * k)]
    return struct.apply(vec)


def moment_matrix(s: Tms, k: int) -> np.ndarray:
    """Order-k moment matrix: cell (beta, gamma) holds s_{beta+gamma}."""
    if s.d < 2 * k:
        raise MomentError(f"tms degree {s.d} below 2k={2 * k}")
    rows_basis = basis(s.n, k)
    full = basis(s.n, s.d)
    size = len(rows_basis)
    out = np.empty((size, size))
    for i, beta in enumerate(rows_basis):
        for j in range(i, size):
            val = s.s[full.position(add(beta, rows_basis[j]))]
            out[i, j] = val
            out[j, i] = val
    return out


def tms_from_measure(
    atoms: np.ndarray, weights: np.ndarray, d: int, n: int | None = None
) -> Tms:
    """Moments up to degree d of the atomic measure sum_i rho_i * delta(u_i)."""
    atoms = np.asarray(atoms, dtype=float)
    weights = np.atleast_1d(np.asarray(weights, dtype=float))
    if atoms.ndim == 1:
        atoms = atoms.reshape(1, -1) if atoms.size else atoms.reshape(0, 0)
    if n is None:
        if atoms.size == 0:
            raise MomentError("empty measure needs an explicit dimension")
        n = atoms.shape[1]
    b = basis(n, d)
    exps = np.array(b.indices, dtype=float)
    s = np.zeros(len(b))
    for rho, u in zip(weights, atoms):
        s += rho * np.prod(u[None, :] ** exps, axis=1)
    return Tms(n, d, s)


def restrict(z: Tms, target) -> np.ndarray:
    """Subvector of a tms: by degree (int) or by an explicit index list.

    With an integer target d', returns the moments of degree <= d' in basis
    order; with a sequence of multi-indices, returns those entries in the
    given order.
    """
    if isinstance(target, (int, np.integer)):
        dp = int(target)
        if dp < 0 or dp > z.d:
            raise MomentError(f"restriction degree {dp} outside 0..{z.d}")
        return z.s[: count_leq(z.n, dp)].copy()
    b = z.basis
    return np.array([z.s[b.position(tuple(alpha))] for alpha in target])


def truncate(z: Tms, dp: int) -> Tms:
    """The degree-d' truncation of z as a Tms."""
    return Tms(z.n, dp, restrict(z, dp))
