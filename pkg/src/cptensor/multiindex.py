"""Multi-index machinery for monomial bases of n-variate polynomials.

A multi-index is a tuple of n nonnegative integers; its degree is the
component sum.  Bases are ordered graded-lexicographically: first by total
degree, then lexicographically with earlier variables dominating, so for
n=2, d=2 the order is (0,0), (1,0), (0,1), (2,0), (1,1), (0,2).
"""

from __future__ import annotations

from functools import lru_cache
from math import comb, factorial
from typing import Iterator, Sequence

MultiIndex = tuple[int, ...]


def degree(alpha: MultiIndex) -> int:
    """Total degree |alpha|, recomputed from the components."""
    return sum(alpha)


def graded_lex_key(alpha: MultiIndex) -> tuple:
    """Sort key realizing the graded lexicographic order used everywhere.

    Within one degree, indices with larger leading exponents come first,
    hence the negated components.
    """
    return (sum(alpha), tuple(-a for a in alpha))


def _compositions(total: int, slots: int) -> Iterator[MultiIndex]:
    """All exponent tuples with the given component sum, in graded-lex order."""
    if slots == 1:
        yield (total,)
        return
    for head in range(total, -1, -1):
        for tail in _compositions(total - head, slots - 1):
            yield (head,) + tail


class MultiIndexBasis:
    """Ordered monomial basis of all multi-indices with degree <= d.

    Immutable after construction; holds the index list and the exact
    inverse map from multi-index to position.
    """

    __slots__ = ("n", "d", "indices", "_position")

    def __init__(self, n: int, d: int, indices: Sequence[MultiIndex]):
        self.n = n
        self.d = d
        self.indices = tuple(indices)
        self._position = {alpha: i for i, alpha in enumerate(self.indices)}

    def __len__(self) -> int:
        return len(self.indices)

    def __iter__(self) -> Iterator[MultiIndex]:
        return iter(self.indices)

    def __getitem__(self, i: int) -> MultiIndex:
        return self.indices[i]

    def position(self, alpha: MultiIndex) -> int:
        """Zero-based position of alpha in the basis; raises KeyError outside."""
        try:
            return self._position[tuple(alpha)]
        except KeyError:
            raise KeyError(
                f"multi-index {tuple(alpha)} outside basis (n={self.n}, d={self.d})"
            ) from None

    def __contains__(self, alpha: MultiIndex) -> bool:
        return tuple(alpha) in self._position


@lru_cache(maxsize=None)
def basis(n: int, d: int) -> MultiIndexBasis:
    """All multi-indices of degree <= d in n variables, graded-lex ordered.

    Has exactly C(n+d, d) elements.
    """
    if n < 1:
        raise ValueError(f"dimension must be positive, got n={n}")
    if d < 0:
        raise ValueError(f"degree must be nonnegative, got d={d}")
    indices = [alpha for deg in range(d + 1) for alpha in _compositions(deg, n)]
    return MultiIndexBasis(n, d, indices)


@lru_cache(maxsize=None)
def exact_degree_basis(n: int, m: int) -> tuple[MultiIndex, ...]:
    """All multi-indices of degree exactly m, graded-lex ordered.

    Has exactly C(n+m-1, m) elements; this is the index set of the
    identifying vector of a symmetric tensor of order m.
    """
    if n < 1:
        raise ValueError(f"dimension must be positive, got n={n}")
    if m < 1:
        raise ValueError(f"order must be positive, got m={m}")
    return tuple(_compositions(m, n))


@lru_cache(maxsize=None)
def exact_degree_positions(n: int, m: int) -> dict[MultiIndex, int]:
    """Inverse lookup for :func:`exact_degree_basis`."""
    return {alpha: i for i, alpha in enumerate(exact_degree_basis(n, m))}


def tuple_to_index(indices: Sequence[int], n: int) -> MultiIndex:
    """Exponent vector of a tensor entry index tuple (1-based components).

    The tuple (i_1, ..., i_m) maps to e_{i_1} + ... + e_{i_m}; the result is
    invariant under permutations of the tuple.
    """
    alpha = [0] * n
    for i in indices:
        if not 1 <= i <= n:
            raise ValueError(f"index component {i} outside 1..{n}")
        alpha[i - 1] += 1
    return tuple(alpha)


def add(alpha: MultiIndex, beta: MultiIndex) -> MultiIndex:
    """Componentwise sum of two multi-indices of the same dimension."""
    if len(alpha) != len(beta):
        raise ValueError(f"dimension mismatch: {len(alpha)} vs {len(beta)}")
    return tuple(a + b for a, b in zip(alpha, beta))


def position_of(b: MultiIndexBasis, alpha: MultiIndex) -> int:
    """Zero-based position of alpha in basis b; fails if |alpha| > d."""
    return b.position(alpha)


def permutation_count(alpha: MultiIndex) -> int:
    """Number of distinct index tuples collapsing onto alpha.

    This is the multinomial |alpha|! / (alpha_1! ... alpha_n!), the weight
    with which the exponent class alpha appears among all m-tuples.
    """
    count = factorial(sum(alpha))
    for a in alpha:
        count //= factorial(a)
    return count


def count_leq(n: int, d: int) -> int:
    """C(n+d, d): size of basis(n, d)."""
    return comb(n + d, d)


def count_eq(n: int, m: int) -> int:
    """C(n+m-1, m): size of exact_degree_basis(n, m)."""
    return comb(n + m - 1, m)
