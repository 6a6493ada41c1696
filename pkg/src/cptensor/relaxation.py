"""Assembly of the semidefinite relaxation for one hierarchy level.

Given an identifying vector a over {|alpha| = m}, the order-k relaxation
minimizes a generic sum-of-squares objective over all moment vectors z up
to degree 2k that agree with a on degree m, annihilate the sphere
localizer, and keep the moment matrix and every coordinate localizer PSD.
Infeasibility of any level certifies that the tensor is not completely
positive; an optimum feeds the flatness/extraction stage.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .moment import Polynomial, localizing_structure
from .multiindex import add, basis, count_leq
from .sdp import ConicProgram, LmiBlock
from .tensor import SetK


class RelaxationError(ValueError):
    """Raised for inconsistent relaxation degrees."""


def default_even_degree(m: int) -> int:
    """Smallest even integer strictly above the tensor order."""
    return m + 1 if m % 2 else m + 2


@dataclass(frozen=True)
class RelaxationSpec:
    """Shape of one relaxation: tensor order/dimension, objective degree,
    hierarchy level, and the seed behind the generic objective."""

    n: int
    m: int
    d: int
    k: int
    seed: int
    objective: Polynomial = field(repr=False, default=None)

    def __post_init__(self):
        if self.d % 2 or self.d <= self.m:
            raise RelaxationError(f"objective degree d={self.d} must be even and > m={self.m}")
        if 2 * self.k < self.d:
            raise RelaxationError(f"level k={self.k} must satisfy 2k >= d={self.d}")
        if self.objective is None:
            object.__setattr__(
                self, "objective", generic_sos_objective(self.n, self.d, self.seed)
            )
        if self.objective.n != self.n or self.objective.degree > self.d:
            raise RelaxationError("objective polynomial inconsistent with spec")


def generic_sos_objective(
    n: int, d: int, seed: int, gram_factor: np.ndarray | None = None
) -> Polynomial:
    """Random sum-of-squares objective of degree d.

    Draws a square standard-normal matrix J over the degree-d/2 monomial
    basis (unless one is injected for testing) and expands the quadratic
    form [x]' J'J [x] into a coefficient vector.  The result is a sum of
    squares by construction, so it is nonnegative on every measure.
    """
    if d % 2:
        raise RelaxationError(f"objective degree must be even, got {d}")
    half = basis(n, d // 2)
    q = len(half)
    if gram_factor is None:
        rng = np.random.default_rng(seed)
        gram_factor = rng.standard_normal((q, q))
    elif gram_factor.shape != (q, q):
        raise RelaxationError(f"injected factor has shape {gram_factor.shape}, expected {(q, q)}")
    gram = gram_factor.T @ gram_factor
    full = basis(n, d)
    coeffs = np.zeros(len(full))
    for i, beta in enumerate(half):
        for j, gamma in enumerate(half):
            coeffs[full.position(add(beta, gamma))] += gram[i, j]
    return Polynomial(n, d, coeffs)


def assemble(a: np.ndarray, spec: RelaxationSpec) -> ConicProgram:
    """Build the level-k conic program for an identifying vector.

    The vector is rescaled by its max-abs entry before entering the
    equality right-hand side (complete positivity is invariant under
    positive scaling); recovered weights must be multiplied back by
    :func:`scale_of`.  Equalities are the degree-m pinning rows plus one
    row per distinct sphere-localizer entry; LMI blocks are the moment
    matrix and one localizer per coordinate.
    """
    n, m, k = spec.n, spec.m, spec.k
    a = np.asarray(a, dtype=float)
    e_basis = basis(n, 2 * k)
    num_vars = len(e_basis)
    index_set = [alpha for alpha in e_basis if sum(alpha) == m]
    if a.shape != (len(index_set),):
        raise RelaxationError(
            f"identifying vector has shape {a.shape}, expected ({len(index_set)},)"
        )
    sigma = scale_of(a)
    a_scaled = a / sigma

    rows, cols, vals, rhs = [], [], [], []
    row_count = 0
    offset_m = count_leq(n, m - 1)
    for i, alpha in enumerate(index_set):
        rows.append(row_count)
        cols.append(offset_m + i)
        vals.append(1.0)
        rhs.append(a_scaled[i])
        row_count += 1
    # sphere localizer rows: one per distinct cell value sum_i z_{s+2e_i} - z_s
    for sigma_idx in basis(n, 2 * k - 2):
        pos_lo = e_basis.position(sigma_idx)
        rows.append(row_count)
        cols.append(pos_lo)
        vals.append(-1.0)
        for i in range(n):
            bumped = tuple(
                s + 2 if t == i else s for t, s in enumerate(sigma_idx)
            )
            rows.append(row_count)
            cols.append(e_basis.position(bumped))
            vals.append(1.0)
        rhs.append(0.0)
        row_count += 1
    eq = sp.coo_matrix(
        (vals, (rows, cols)), shape=(row_count, num_vars)
    ).tocsr()

    kset = SetK(n)
    blocks = []
    for j in range(n + 1):
        struct = localizing_structure(n, k, kset.g_polynomial(j))
        blocks.append(
            LmiBlock(
                size=struct.size,
                rows=struct.rows,
                cols=struct.cols,
                vars=struct.vars,
                coeffs=struct.coeffs,
            )
        )

    objective = np.zeros(num_vars)
    objective[: len(spec.objective.coeffs)] = spec.objective.coeffs

    return ConicProgram(
        num_vars=num_vars,
        objective=objective,
        eq_matrix=eq,
        eq_rhs=np.array(rhs),
        blocks=blocks,
    )


def scale_of(a: np.ndarray) -> float:
    """Positive rescaling factor applied to a before assembly."""
    top = float(np.max(np.abs(a), initial=0.0))
    return top if top > 0 else 1.0
