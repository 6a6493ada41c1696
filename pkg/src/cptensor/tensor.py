"""Symmetric tensors stored by their identifying vectors.

An order-m, dimension-n symmetric tensor is determined by its upper
triangular entries, one per exponent class alpha with |alpha| = m.  The
vector of those entries in graded-lex order is the identifying vector.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .multiindex import (
    MultiIndex,
    exact_degree_basis,
    exact_degree_positions,
    permutation_count,
    tuple_to_index,
)

ENTRY_CONFLICT_TOL = 1e-12


class TensorError(ValueError):
    """Raised for malformed tensor construction input."""


@dataclass(frozen=True)
class SymmetricTensor:
    """Dense symmetric tensor, identified by its vector over {|alpha| = m}."""

    m: int
    n: int
    a: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.a, dtype=float)
        expected = len(exact_degree_basis(self.n, self.m))
        if a.shape != (expected,):
            raise TensorError(
                f"identifying vector has length {a.shape}, expected ({expected},) "
                f"for m={self.m}, n={self.n}"
            )
        if not np.all(np.isfinite(a)):
            raise TensorError("identifying vector contains non-finite entries")
        object.__setattr__(self, "a", a)

    @property
    def index_set(self) -> tuple[MultiIndex, ...]:
        return exact_degree_basis(self.n, self.m)

    def entry(self, indices: Sequence[int]) -> float:
        """Entry at a (1-based) index tuple, via its exponent class."""
        if len(indices) != self.m:
            raise TensorError(f"expected {self.m} indices, got {len(indices)}")
        alpha = tuple_to_index(indices, self.n)
        return float(self.a[exact_degree_positions(self.n, self.m)[alpha]])

    def max_abs(self) -> float:
        return float(np.max(np.abs(self.a))) if self.a.size else 0.0

    def is_zero(self, tol: float = 0.0) -> bool:
        return bool(np.all(np.abs(self.a) <= tol))


@dataclass(frozen=True)
class Decomposition:
    """Weighted unit atoms representing a nonnegative rank-one sum.

    weights[i] > 0 and atoms[i] is a unit vector with nonnegative entries;
    the equivalent plain rank-one vectors are weights[i]**(1/m) * atoms[i].
    An empty decomposition (r = 0) encodes the zero tensor.
    """

    m: int
    weights: np.ndarray
    atoms: np.ndarray  # shape (r, n)

    def __post_init__(self):
        w = np.atleast_1d(np.asarray(self.weights, dtype=float))
        u = np.asarray(self.atoms, dtype=float)
        if u.ndim == 1:
            u = u.reshape(0, 0) if u.size == 0 else u.reshape(1, -1)
        if w.shape[0] != u.shape[0]:
            raise TensorError(f"{w.shape[0]} weights but {u.shape[0]} atoms")
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "atoms", u)

    def __len__(self) -> int:
        return int(self.weights.shape[0])

    @property
    def vectors(self) -> np.ndarray:
        """Rescaled rank-one vectors v_i with weight folded in."""
        if len(self) == 0:
            return self.atoms.copy()
        return self.weights[:, None] ** (1.0 / self.m) * self.atoms


def from_entries(
    m: int, n: int, entries: Sequence[tuple[Sequence[int], float]]
) -> SymmetricTensor:
    """Build a tensor from (index tuple, value) pairs; unset entries are 0.

    Index tuples use 1-based components.  Listing two tuples from the same
    exponent class with values differing by more than ``ENTRY_CONFLICT_TOL``
    is rejected rather than averaged.
    """
    positions = exact_degree_positions(n, m)
    a = np.zeros(len(positions))
    seen: dict[int, float] = {}
    for indices, value in entries:
        if len(indices) != m:
            raise TensorError(f"index tuple {tuple(indices)} does not have {m} parts")
        pos = positions[tuple_to_index(indices, n)]
        if pos in seen and abs(seen[pos] - value) > ENTRY_CONFLICT_TOL:
            raise TensorError(
                f"conflicting values for exponent class of {tuple(indices)}: "
                f"{seen[pos]} vs {value}"
            )
        seen[pos] = float(value)
        a[pos] = float(value)
    return SymmetricTensor(m, n, a)


def from_rank_one_sum(vectors: Sequence[Sequence[float]], m: int, n: int | None = None) -> SymmetricTensor:
    """Sum of m-fold outer powers of the given vectors.

    a_alpha = sum_k v_k^alpha for every |alpha| = m.  An empty vector list
    yields the zero tensor (n must then be given).
    """
    vecs = [np.asarray(v, dtype=float) for v in vectors]
    if vecs:
        dims = {v.shape for v in vecs}
        if len(dims) != 1 or vecs[0].ndim != 1:
            raise TensorError(f"inconsistent vector shapes: {sorted(dims)}")
        if n is not None and vecs[0].shape[0] != n:
            raise TensorError(f"vectors have dimension {vecs[0].shape[0]}, expected {n}")
        n = vecs[0].shape[0]
    elif n is None:
        raise TensorError("empty vector list needs an explicit dimension")
    alphas = exact_degree_basis(n, m)
    exps = np.array(alphas, dtype=float)
    a = np.zeros(len(alphas))
    for v in vecs:
        a += np.prod(v[None, :] ** exps, axis=1)
    return SymmetricTensor(m, n, a)


def reconstruct(dec: Decomposition, m: int, n: int) -> SymmetricTensor:
    """Tensor represented by a decomposition: sum_i rho_i * atom_i^(outer m)."""
    alphas = exact_degree_basis(n, m)
    a = np.zeros(len(alphas))
    exps = np.array(alphas, dtype=float)  # (|E|, n), integer-valued
    for rho, u in zip(dec.weights, dec.atoms):
        if u.shape[0] != n:
            raise TensorError(f"atom dimension {u.shape[0]} does not match n={n}")
        a += rho * np.prod(u[None, :] ** exps, axis=1)
    return SymmetricTensor(m, n, a)


def residual(t: SymmetricTensor, dec: Decomposition) -> float:
    """Max-abs difference between t and the tensor rebuilt from dec."""
    rebuilt = reconstruct(dec, t.m, t.n)
    diff = t.a - rebuilt.a
    return float(np.max(np.abs(diff))) if diff.size else 0.0


def rescale_to_unit_atoms(
    vectors: Sequence[Sequence[float]], m: int, n: int | None = None, tol: float = 1e-12
) -> Decomposition:
    """Convert nonnegative rank-one vectors to a weighted unit-atom form.

    Each v becomes weight ||v||^m with atom v/||v||; zero vectors are
    dropped.  Entries below -tol are rejected.
    """
    weights, atoms = [], []
    for v in vectors:
        v = np.asarray(v, dtype=float)
        if n is not None and v.shape[0] != n:
            raise TensorError(f"vector dimension {v.shape[0]}, expected {n}")
        if np.min(v, initial=0.0) < -tol:
            raise TensorError(f"negative entry {np.min(v)} in rank-one vector")
        v = np.clip(v, 0.0, None)
        norm = float(np.linalg.norm(v))
        if norm == 0.0:
            continue
        weights.append(norm**m)
        atoms.append(v / norm)
    if not atoms:
        dim = n if n is not None else 0
        return Decomposition(m, np.zeros(0), np.zeros((0, dim)))
    return Decomposition(m, np.array(weights), np.array(atoms))


def to_rank_one_vectors(dec: Decomposition) -> list[np.ndarray]:
    """Inverse of :func:`rescale_to_unit_atoms`."""
    return [np.array(v) for v in dec.vectors]


def inner_product(t1: SymmetricTensor, t2: SymmetricTensor) -> float:
    """Entrywise inner product over all index tuples.

    Computed on identifying vectors with multinomial weights, which equals
    the sum over all n^m tuples of products of entries.
    """
    if (t1.m, t1.n) != (t2.m, t2.n):
        raise TensorError(
            f"shape mismatch: (m={t1.m}, n={t1.n}) vs (m={t2.m}, n={t2.n})"
        )
    weights = np.array([permutation_count(al) for al in t1.index_set], dtype=float)
    return float(np.sum(weights * t1.a * t2.a))


def entrywise_nonnegative(t: SymmetricTensor, tol: float = 1e-12) -> bool:
    """True when no identifying entry is below -tol."""
    return bool(np.min(t.a, initial=0.0) >= -tol)


@dataclass(frozen=True)
class SetK:
    """The compact feasibility set: unit sphere intersected with x >= 0.

    Described by h(x) = x'x - 1 = 0 together with g_0 = 1 and g_j = x_j >= 0.
    Constraint polynomials are exposed as coefficient vectors so the moment
    machinery can build localizing matrices from them.
    """

    n: int

    def h_polynomial(self):
        from .moment import Polynomial
        from .multiindex import basis

        b2 = basis(self.n, 2)
        coeffs = np.zeros(len(b2))
        coeffs[b2.position((0,) * self.n)] = -1.0
        for j in range(self.n):
            sq = tuple(2 if i == j else 0 for i in range(self.n))
            coeffs[b2.position(sq)] = 1.0
        return Polynomial(self.n, 2, coeffs)

    def g_polynomial(self, j: int):
        """g_0 = 1; g_j = x_j for 1 <= j <= n."""
        from .moment import Polynomial
        from .multiindex import basis

        if not 0 <= j <= self.n:
            raise ValueError(f"constraint index {j} outside 0..{self.n}")
        if j == 0:
            b0 = basis(self.n, 0)
            return Polynomial(self.n, 0, np.ones(1))
        b1 = basis(self.n, 1)
        coeffs = np.zeros(len(b1))
        unit = tuple(1 if i == j - 1 else 0 for i in range(self.n))
        coeffs[b1.position(unit)] = 1.0
        return Polynomial(self.n, 1, coeffs)
