"""Deciding complete positivity of symmetric tensors.

A tensor is completely positive when it is a finite sum of m-fold outer
powers of nonnegative vectors.  This package decides membership through a
hierarchy of semidefinite relaxations over truncated moment sequences,
producing either an explicit nonnegative rank-one decomposition or a
machine-checkable infeasibility certificate.
"""

from .tensor import (
    Decomposition,
    SetK,
    SymmetricTensor,
    TensorError,
    entrywise_nonnegative,
    from_entries,
    from_rank_one_sum,
    inner_product,
    reconstruct,
    rescale_to_unit_atoms,
    residual,
    to_rank_one_vectors,
)
from .moment import Polynomial, Tms, localizing_matrix, moment_matrix, riesz, tms_from_measure
from .pipeline import CpOptions, CpOutcome, CpStatus, check_cp, verify_outcome

__version__ = "0.1.0"

__all__ = [
    "CpOptions",
    "CpOutcome",
    "CpStatus",
    "Decomposition",
    "Polynomial",
    "SetK",
    "SymmetricTensor",
    "TensorError",
    "Tms",
    "check_cp",
    "entrywise_nonnegative",
    "from_entries",
    "from_rank_one_sum",
    "inner_product",
    "localizing_matrix",
    "moment_matrix",
    "reconstruct",
    "rescale_to_unit_atoms",
    "residual",
    "riesz",
    "tms_from_measure",
    "to_rank_one_vectors",
    "verify_outcome",
]
