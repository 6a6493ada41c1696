"""Independent brute-force oracles used to freeze expected test values.

Everything here works directly on full dense index tuples or on naive
enumeration, deliberately avoiding the library's identifying-vector code
paths so the two routes stay independent.
"""

from __future__ import annotations

import itertools
from math import prod

import numpy as np


def all_tuples(n: int, m: int):
    """Every index tuple (1-based) of an order-m dimension-n tensor."""
    return itertools.product(range(1, n + 1), repeat=m)


def exponent_of(tpl, n: int):
    alpha = [0] * n
    for i in tpl:
        alpha[i - 1] += 1
    return tuple(alpha)


def enumerate_exact_degree(n: int, m: int):
    """Stars-and-bars enumeration of {alpha : |alpha| = m} as a set."""
    out = set()
    for cut in itertools.combinations(range(n + m - 1), n - 1):
        prev = -1
        alpha = []
        for c in cut:
            alpha.append(c - prev - 1)
            prev = c
        alpha.append(n + m - 2 - prev)
        out.add(tuple(alpha))
    return out


def enumerate_leq_degree(n: int, d: int):
    out = set()
    for m in range(d + 1):
        if m == 0:
            out.add((0,) * n)
        else:
            out.update(enumerate_exact_degree(n, m))
    return out


def count_tuples_for_class(alpha):
    """Number of index tuples whose exponent class is alpha, by enumeration."""
    n = len(alpha)
    m = sum(alpha)
    return sum(1 for t in all_tuples(n, m) if exponent_of(t, n) == alpha)


def dense_tensor_from_vectors(vectors, m: int, n: int):
    """Full dense order-m tensor sum of outer powers, entry by entry."""
    t = np.zeros((n,) * m)
    for v in vectors:
        v = np.asarray(v, dtype=float)
        for idx in itertools.product(range(n), repeat=m):
            t[idx] += prod(v[i] for i in idx)
    return t


def dense_entry(dense, tpl):
    """Entry of a dense tensor at a 1-based index tuple."""
    return dense[tuple(i - 1 for i in tpl)]


def dense_inner_product(t1, t2):
    """Sum over all index tuples of products of entries."""
    return float(np.sum(t1 * t2))


def eval_poly(coeffs, alphas, x):
    """Direct evaluation of sum_alpha c_alpha x^alpha."""
    x = np.asarray(x, dtype=float)
    total = 0.0
    for c, alpha in zip(coeffs, alphas):
        total += c * prod(x[i] ** a for i, a in enumerate(alpha))
    return total


def measure_moment(atoms, weights, alpha):
    """Moment of an atomic measure at a single multi-index."""
    total = 0.0
    for rho, u in zip(weights, atoms):
        total += rho * prod(float(u[i]) ** a for i, a in enumerate(alpha))
    return total


def hausdorff_distance(points_a, points_b):
    """Symmetric Hausdorff distance between two point sets (rows)."""
    a = np.asarray(points_a, dtype=float)
    b = np.asarray(points_b, dtype=float)
    if a.size == 0 and b.size == 0:
        return 0.0
    if a.size == 0 or b.size == 0:
        return np.inf
    d = np.linalg.norm(a[:, None, :] - b[None, :, :], axis=2)
    return float(max(d.min(axis=1).max(), d.min(axis=0).max()))
