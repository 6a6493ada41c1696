"""Hierarchy driver deciding complete positivity of a symmetric tensor.

For each level k the relaxation is solved; infeasibility (with a verified
improving ray) proves the tensor is not completely positive, while an
optimum is scanned for flat truncations whose atomic measure reconstructs
the tensor.  The hierarchy is asymptotically complete in both directions,
but any finite run may end indeterminate, which is reported honestly.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field, replace
from enum import Enum
from math import ceil

import numpy as np

from . import extraction, relaxation
from .moment import Tms, restrict, truncate
from .multiindex import count_leq, exact_degree_basis
from .sdp import (
    Certificate,
    ConicOutcome,
    SolveStatus,
    SolverOptions,
    solve,
    verify_infeasibility,
)
from .tensor import Decomposition, SymmetricTensor, entrywise_nonnegative, residual


class CpStatus(str, Enum):
    COMPLETELY_POSITIVE = "completely-positive"
    NOT_COMPLETELY_POSITIVE = "not-completely-positive"
    INDETERMINATE = "indeterminate"


@dataclass(frozen=True)
class CpOptions:
    """Hierarchy controls; degree defaults to the smallest even value
    above the tensor order, and the same seeded objective is reused for
    every level."""

    degree: int | None = None
    k_max: int | None = None
    seed: int = 0
    tol_rank: float = extraction.RANK_THRESHOLD
    tol_feas: float = 1e-6
    tol_coord: float = extraction.ATOM_COORD_TOL
    tol_residual: float = 1e-6
    fast_path: bool = True
    solver: SolverOptions = field(default_factory=SolverOptions)
    verbose: bool = False

    def resolved_degree(self, m: int) -> int:
        d = self.degree if self.degree is not None else relaxation.default_even_degree(m)
        if d % 2 or d <= m:
            raise ValueError(f"degree d={d} must be even and exceed the order m={m}")
        return d


@dataclass
class LevelStats:
    k: int
    solve_status: str
    iterations: int
    solve_time: float
    flat_t: int | None = None
    extraction_failures: int = 0
    notes: str = ""


@dataclass
class CpOutcome:
    status: CpStatus
    decomposition: Decomposition | None = None
    level_k: int | None = None
    level_t: int | None = None
    residual: float | None = None
    certificate_kind: str | None = None
    certificate: Certificate | None = None
    certificate_residuals: dict = field(default_factory=dict)
    negative_entry: tuple | None = None
    reason: str = ""
    levels: list = field(default_factory=list)
    seed: int = 0
    options: CpOptions | None = None
    total_time: float = 0.0


def check_cp(tensor: SymmetricTensor, opts: CpOptions | None = None) -> CpOutcome:
    """Decide whether a symmetric tensor is completely positive.

    Returns a decomposition, a verified infeasibility certificate, or an
    indeterminate outcome carrying the reason.
    """
    opts = opts or CpOptions()
    t0 = time.time()
    m, n = tensor.m, tensor.n
    out = CpOutcome(status=CpStatus.INDETERMINATE, seed=opts.seed, options=opts)

    if opts.fast_path:
        neg = _most_negative_entry(tensor)
        if neg is not None:
            out.status = CpStatus.NOT_COMPLETELY_POSITIVE
            out.certificate_kind = "negative-entry"
            out.negative_entry = neg
            out.reason = (
                f"entry at exponent {neg[0]} equals {neg[1]:.6g} < 0; atoms are "
                "nonnegative so every entry of a completely positive tensor is"
            )
            out.total_time = time.time() - t0
            return out
    if tensor.is_zero():
        out.status = CpStatus.COMPLETELY_POSITIVE
        out.decomposition = Decomposition(m, np.zeros(0), np.zeros((0, n)))
        out.residual = 0.0
        out.reason = "zero tensor: empty decomposition"
        out.total_time = time.time() - t0
        return out

    d = opts.resolved_degree(m)
    k_start = d // 2
    k_max = opts.k_max if opts.k_max is not None else k_start + 3
    if k_max < k_start:
        raise ValueError(f"k_max={k_max} below starting level {k_start}")
    objective = relaxation.generic_sos_objective(n, d, opts.seed)
    t_min = ceil(m / 2)
    a_scale = 1.0 + tensor.max_abs()

    for k in range(k_start, k_max + 1):
        spec = relaxation.RelaxationSpec(n=n, m=m, d=d, k=k, seed=opts.seed, objective=objective)
        prog = relaxation.assemble(tensor.a, spec)
        solver_opts = replace(opts.solver, verbose=opts.solver.verbose or opts.verbose)
        outcome = solve(prog, solver_opts)
        stats = LevelStats(
            k=k,
            solve_status=outcome.status.value,
            iterations=outcome.stats.iterations,
            solve_time=outcome.stats.solve_time,
        )
        out.levels.append(stats)

        if outcome.status == SolveStatus.INFEASIBLE:
            report = verify_infeasibility(prog, outcome.certificate, tol=opts.solver.tol_accept)
            if report.ok:
                out.status = CpStatus.NOT_COMPLETELY_POSITIVE
                out.level_k = k
                out.certificate_kind = "dual-ray"
                out.certificate = outcome.certificate
                out.certificate_residuals = report.residuals
                out.reason = f"level-{k} relaxation infeasible with verified certificate"
                out.total_time = time.time() - t0
                return out
            stats.notes = "infeasibility certificate failed verification"
            out.reason = stats.notes
            out.status = CpStatus.INDETERMINATE
            out.total_time = time.time() - t0
            return out

        if outcome.status != SolveStatus.OPTIMAL:
            stats.notes = f"solver returned {outcome.status.value}"
            out.reason = (
                f"solver {outcome.status.value} at level {k}: {outcome.stats.message}"
            )
            out.total_time = time.time() - t0
            return out

        z_star = Tms(n, 2 * k, outcome.x)
        dec = _try_extract(tensor, z_star, k, t_min, opts, stats, a_scale)
        if dec is not None:
            decomposition, t_used, res = dec
            out.status = CpStatus.COMPLETELY_POSITIVE
            out.decomposition = decomposition
            out.level_k = k
            out.level_t = t_used
            out.residual = res
            out.reason = f"flat truncation at (k={k}, t={t_used})"
            out.total_time = time.time() - t0
            return out

    out.reason = f"no decision up to k_max={k_max}; hierarchy is only asymptotically complete"
    out.total_time = time.time() - t0
    return out


def _most_negative_entry(tensor: SymmetricTensor, tol: float = 1e-12):
    i = int(np.argmin(tensor.a))
    if tensor.a[i] < -tol:
        return (tensor.index_set[i], float(tensor.a[i]))
    return None


def _try_extract(tensor, z_star, k, t_min, opts, stats, a_scale):
    """Scan truncation levels for a flat tms and a verified decomposition."""
    m, n = tensor.m, tensor.n
    for t in range(t_min, k + 1):
        w = truncate(z_star, 2 * t)
        report = extraction.check_flat(
            w, t, tol_rank=opts.tol_rank, tol_feas=opts.tol_feas
        )
        if not report.is_flat:
            continue
        try:
            measure = extraction.extract_atoms(
                w, t, report.rank_hi, seed=opts.seed, tol_coord=opts.tol_coord
            )
        except extraction.ExtractionError as exc:
            stats.extraction_failures += 1
            stats.notes = f"extraction failed at t={t}: {exc}"
            continue
        e_basis = exact_degree_basis(n, m)
        weights, _ = extraction.fit_weights(measure.atoms, (tensor.a, e_basis))
        keep = weights > 0
        if not np.any(keep):
            stats.extraction_failures += 1
            stats.notes = f"weight fit degenerate at t={t}"
            continue
        atoms, weights, _ = extraction.polish(
            measure.atoms[keep], weights[keep], tensor.a, e_basis, m
        )
        if atoms.shape[0] == 0 or float(np.min(atoms, initial=0.0)) < 0:
            stats.extraction_failures += 1
            stats.notes = f"polish emptied the decomposition at t={t}"
            continue
        dec = Decomposition(m, weights, atoms)
        res = residual(tensor, dec)
        if res <= opts.tol_residual * a_scale:
            stats.flat_t = t
            return dec, t, res
        stats.extraction_failures += 1
        stats.notes = (
            f"reconstruction residual {res:.3e} above "
            f"{opts.tol_residual * a_scale:.3e} at t={t}"
        )
    return None


def verify_outcome(tensor: SymmetricTensor, outcome: CpOutcome, tol: float = 1e-7):
    """Re-verify a pipeline outcome independently of how it was produced.

    Completely positive outcomes are re-checked by reconstruction residual
    and membership of every atom in the feasibility set; infeasibility
    outcomes by re-assembling the same relaxation (same seed, same degree)
    and re-running the certificate check.  Indeterminate outcomes carry
    nothing to verify.
    """
    report: dict = {"status": outcome.status.value}
    if outcome.status == CpStatus.INDETERMINATE:
        report["note"] = "nothing to verify"
        return True, report

    if outcome.status == CpStatus.COMPLETELY_POSITIVE:
        dec = outcome.decomposition
        if dec is None:
            return False, {"reason": "missing decomposition"}
        res = residual(tensor, dec)
        a_scale = 1.0 + tensor.max_abs()
        tol_res = (outcome.options.tol_residual if outcome.options else 1e-6) * a_scale
        atoms_ok = True
        for u in dec.atoms:
            if float(np.min(u, initial=0.0)) < -extraction.ATOM_COORD_TOL:
                atoms_ok = False
            if abs(float(np.linalg.norm(u)) - 1.0) > 1e-6:
                atoms_ok = False
        weights_ok = bool(np.all(dec.weights > 0)) if len(dec) else True
        report.update(
            residual=res, residual_bound=tol_res, atoms_in_set=atoms_ok,
            weights_positive=weights_ok,
        )
        return bool(res <= tol_res and atoms_ok and weights_ok), report

    if outcome.certificate_kind == "negative-entry":
        if outcome.negative_entry is None:
            return False, {"reason": "missing witness entry"}
        alpha, value = outcome.negative_entry
        positions = {a: i for i, a in enumerate(tensor.index_set)}
        actual = float(tensor.a[positions[tuple(alpha)]])
        report.update(witness=alpha, value=actual)
        return bool(actual < -1e-12 and abs(actual - value) <= 1e-12), report

    # dual-ray certificate: rebuild the same program and re-verify
    if outcome.certificate is None or outcome.level_k is None:
        return False, {"reason": "missing certificate"}
    opts = outcome.options or CpOptions()
    d = opts.resolved_degree(tensor.m)
    spec = relaxation.RelaxationSpec(
        n=tensor.n, m=tensor.m, d=d, k=outcome.level_k, seed=outcome.seed
    )
    prog = relaxation.assemble(tensor.a, spec)
    res = verify_infeasibility(prog, outcome.certificate, tol=tol)
    report.update(res.residuals)
    return bool(res.ok), report
