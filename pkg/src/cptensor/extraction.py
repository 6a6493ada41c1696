"""Flatness detection and atomic-measure recovery from moment sequences.

A truncated moment sequence of degree 2t is flat when it satisfies the
sphere/orthant feasibility conditions and its order-(t-1) and order-t
moment matrices have equal numeric rank.  A flat sequence has a unique
representing measure with rank-many atoms; the atoms are recovered from
the joint eigenstructure of multiplication operators on a monomial basis
of the moment-matrix column space, and the weights by nonnegative least
squares.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import ceil

import numpy as np
import scipy.linalg as sla
from scipy.optimize import nnls

from .moment import Tms, moment_matrix, localizing_matrix, truncate
from .multiindex import add, basis
from .tensor import SetK

RANK_THRESHOLD = 1e-6  # absolute singular-value cutoff for the rank rule
PIVOT_TOL = 1e-8
WEIGHT_DUST = 1e-8
# Membership tolerance for atom coordinates.  Atoms sitting exactly on the
# orthant boundary come back with coordinate errors at the level of the
# relaxation optimum times the extraction conditioning, which lands around
# 1e-5..1e-4; the reconstruction-residual gate downstream is what actually
# protects correctness.
ATOM_COORD_TOL = 1e-4
MAX_REDRAWS = 5


class ExtractionError(RuntimeError):
    """Extraction failed; the hierarchy should continue rather than abort."""


def numeric_rank(
    mat: np.ndarray, threshold: float = RANK_THRESHOLD, relative: bool = False
) -> tuple[int, np.ndarray]:
    """Rank as the count of singular values >= threshold.

    The default threshold is absolute; ``relative=True`` instead counts
    singular values >= threshold * largest, which behaves better when the
    input has been rescaled.  The full spectrum is returned for
    diagnostics.
    """
    mat = np.atleast_2d(np.asarray(mat, dtype=float))
    sv = np.linalg.svd(mat, compute_uv=False)
    cut = threshold * (sv[0] if relative and sv.size and sv[0] > 0 else 1.0)
    return int(np.sum(sv >= cut)), sv


@dataclass(frozen=True)
class FlatnessReport:
    t: int
    rank_lo: int
    rank_hi: int
    singular_lo: np.ndarray
    singular_hi: np.ndarray
    feasible: bool
    is_flat: bool
    rank_threshold: float
    feas_threshold: float
    details: dict = field(default_factory=dict)


def check_flat(
    w: Tms,
    t: int,
    tol_rank: float = RANK_THRESHOLD,
    tol_feas: float = 1e-6,
    relative_rank: bool = False,
) -> FlatnessReport:
    """Evaluate feasibility conditions and the rank condition at level t."""
    if t < 1:
        raise ValueError(f"truncation level must be >= 1, got {t}")
    if w.d < 2 * t:
        raise ValueError(f"tms degree {w.d} below 2t={2 * t}")
    kset = SetK(w.n)
    scale = 1.0 + float(np.max(np.abs(w.s), initial=0.0))
    h_mat = localizing_matrix(w, kset.h_polynomial(), t)
    h_norm = float(np.max(np.abs(h_mat), initial=0.0))
    min_eigs = []
    for j in range(w.n + 1):
        g_mat = localizing_matrix(w, kset.g_polynomial(j), t)
        g_scale = 1.0 + float(np.max(np.abs(g_mat), initial=0.0))
        min_eigs.append(float(np.linalg.eigvalsh(g_mat)[0]) / g_scale)
    feasible = h_norm <= tol_feas * scale and min(min_eigs) >= -tol_feas

    m_hi = moment_matrix(w, t)
    m_lo = moment_matrix(w, t - 1) if t >= 1 else np.array([[w.s[0]]])
    rank_hi, sv_hi = numeric_rank(m_hi, tol_rank, relative_rank)
    rank_lo, sv_lo = numeric_rank(m_lo, tol_rank, relative_rank)
    return FlatnessReport(
        t=t,
        rank_lo=rank_lo,
        rank_hi=rank_hi,
        singular_lo=sv_lo,
        singular_hi=sv_hi,
        feasible=feasible,
        is_flat=bool(feasible and rank_lo == rank_hi),
        rank_threshold=tol_rank,
        feas_threshold=tol_feas,
        details={"h_norm": h_norm, "g_min_eigs": min_eigs},
    )


@dataclass(frozen=True)
class AtomicMeasure:
    """Finitely atomic representing measure: unit nonnegative atoms and
    positive weights."""

    atoms: np.ndarray  # (r, n)
    weights: np.ndarray  # (r,)
    fit_residual: float
    redraws: int = 0

    def __len__(self) -> int:
        return int(self.weights.shape[0])


def extract_atoms(
    w: Tms,
    t: int,
    r: int,
    seed: int = 0,
    tol_coord: float = ATOM_COORD_TOL,
    pivot_tol: float = PIVOT_TOL,
) -> AtomicMeasure:
    """Recover an r-atomic measure from a flat degree-2t moment sequence.

    Steps: truncated spectral factorization of the order-t moment matrix;
    pivot (basis) monomials of degree <= t-1 selected by column-echelon
    reduction; one multiplication operator per variable on that basis; a
    random combination is Schur-factored and atom coordinates read off as
    Rayleigh quotients of the Schur vectors; weights are least-squares
    fitted to the full moment vector, atoms cleaned up against the sphere
    and orthant, and weights refitted without sign freedom.
    """
    if r <= 0:
        raise ExtractionError(f"cannot extract a measure with r={r}")
    n = w.n
    mt = moment_matrix(w, t)
    evals, evecs = np.linalg.eigh(mt)
    order = np.argsort(evals)[::-1]
    evals, evecs = evals[order], evecs[:, order]
    if evals[r - 1] <= 0:
        raise ExtractionError(
            f"moment matrix has fewer than r={r} positive eigenvalues"
        )
    factor = evecs[:, :r] * np.sqrt(evals[:r])  # (p, r)

    bt = basis(n, t)
    deg_low = [i for i, alpha in enumerate(bt) if sum(alpha) <= t - 1]
    pivots = _echelon_pivots(factor, deg_low, r, pivot_tol)
    if len(pivots) < r:
        raise ExtractionError(
            f"echelon degeneracy: only {len(pivots)} pivots of {r} above {pivot_tol}"
        )
    # express every row in the pivot-row coordinate system
    coords = sla.solve(factor[pivots].T, factor.T).T  # rows: coords[i] s.t. factor = coords @ factor[pivots]

    mult = []
    for j in range(n):
        nj = np.empty((r, r))
        for row, piv in enumerate(pivots):
            shifted = add(bt[piv], tuple(1 if i == j else 0 for i in range(n)))
            nj[row] = coords[bt.position(shifted)]
        mult.append(nj)

    rng = np.random.default_rng(seed)
    redraws = 0
    atoms = None
    for attempt in range(MAX_REDRAWS + 1):
        lam = rng.standard_normal(n)
        lam /= np.linalg.norm(lam)
        combined = sum(l * nj for l, nj in zip(lam, mult))
        tmat, qmat = sla.schur(combined, output="real")
        diag = np.diag(tmat)
        off = np.diag(tmat, -1) if r > 1 else np.zeros(0)
        complex_pairs = np.any(np.abs(off) > 1e-7 * (1.0 + np.max(np.abs(diag))))
        separation = (
            np.min(np.abs(np.subtract.outer(diag, diag))[~np.eye(r, dtype=bool)])
            if r > 1
            else np.inf
        )
        if complex_pairs or separation < 1e-6 * (1.0 + float(np.max(np.abs(diag)))):
            redraws += 1
            continue
        atoms = np.empty((r, n))
        for i in range(r):
            q = qmat[:, i]
            for j in range(n):
                atoms[i, j] = q @ mult[j] @ q
        break
    if atoms is None:
        raise ExtractionError(
            f"no separating random combination after {MAX_REDRAWS} redraws"
        )

    # least-squares weights against the full degree-<=2t moment vector
    weights = _fit_weights_vector(atoms, w.s, basis(n, w.d).indices, nonneg=False)

    # cleanup: clamp slightly negative coordinates, renormalize, drop dust
    cleaned_atoms, cleaned_weights = [], []
    for u, rho in zip(atoms, weights):
        if float(np.min(u)) < -tol_coord:
            raise ExtractionError(
                f"atom coordinate {float(np.min(u)):.3e} below -{tol_coord}"
            )
        u = np.clip(u, 0.0, None)
        norm = float(np.linalg.norm(u))
        if abs(norm - 1.0) > 0.1:
            raise ExtractionError(f"atom norm {norm:.3f} too far from the sphere")
        cleaned_atoms.append(u / norm)
        cleaned_weights.append(rho)
    atoms = np.array(cleaned_atoms)
    weights = np.array(cleaned_weights)
    rho_min = WEIGHT_DUST * float(np.max(weights, initial=0.0))
    keep = weights > rho_min
    atoms = atoms[keep]
    if atoms.shape[0] == 0:
        raise ExtractionError("all extracted weights were numerical dust")
    weights, fit_res = fit_weights(atoms, w)
    keep = weights > rho_min
    return AtomicMeasure(
        atoms=atoms[keep], weights=weights[keep], fit_residual=fit_res, redraws=redraws
    )


def _echelon_pivots(factor: np.ndarray, allowed_rows, r: int, pivot_tol: float):
    """Greedy column-echelon pivot rows, scanned in graded order.

    Selects rows (restricted to the allowed degree range) whose component
    orthogonal to the span of previously selected rows stays above the
    pivot tolerance; flatness guarantees low-degree rows suffice.
    """
    scale = float(np.max(np.abs(factor), initial=0.0)) or 1.0
    chosen: list[int] = []
    q_basis = np.zeros((factor.shape[1], 0))
    for i in allowed_rows:
        if len(chosen) == r:
            break
        v = factor[i]
        resid = v - q_basis @ (q_basis.T @ v)
        norm = float(np.linalg.norm(resid))
        if norm >= pivot_tol * scale:
            chosen.append(i)
            q_basis = np.column_stack([q_basis, resid / norm])
    return chosen


def _vandermonde(atoms: np.ndarray, alphas) -> np.ndarray:
    exps = np.array(list(alphas), dtype=float)
    return np.stack(
        [np.prod(u[None, :] ** exps, axis=1) for u in atoms], axis=1
    )  # (|alphas|, r)


def _fit_weights_vector(atoms, target_vec, alphas, nonneg: bool):
    phi = _vandermonde(atoms, alphas)
    if nonneg:
        w, _ = nnls(phi, target_vec)
        return w
    w, *_ = np.linalg.lstsq(phi, target_vec, rcond=None)
    return w


def fit_weights(atoms: np.ndarray, target) -> tuple[np.ndarray, float]:
    """Nonnegative least-squares weights for given atoms.

    ``target`` is a Tms (fit against the full moment vector) or a pair
    (vector, index list) for fitting against an identifying vector.
    Returns the weights and the fit residual norm.
    """
    atoms = np.atleast_2d(np.asarray(atoms, dtype=float))
    if isinstance(target, Tms):
        vec = target.s
        alphas = basis(target.n, target.d).indices
    else:
        vec, alphas = target
        vec = np.asarray(vec, dtype=float)
    phi = _vandermonde(atoms, alphas)
    weights, res = nnls(phi, vec)
    return weights, float(res)


def polish(
    atoms: np.ndarray,
    weights: np.ndarray,
    target_vec: np.ndarray,
    alphas,
    m: int,
    max_iters: int = 60,
) -> tuple[np.ndarray, np.ndarray, float]:
    """Levenberg-Marquardt refinement of a weighted atomic decomposition.

    Minimizes the misfit of sum_i rho_i u_i^alpha against the target
    vector over weights and atom coordinates.  Coordinates are
    parametrized as squares (u = v*v), which keeps the orthant constraint
    exact without projections; atoms are re-normalized to the unit sphere
    on exit with the scale absorbed into the weights, followed by a
    nonnegative refit of the weights.  Deterministic; never returns a
    worse fit than the input.
    """
    alphas = list(alphas)
    exps = np.array(alphas, dtype=float)  # (|E|, n)
    target_vec = np.asarray(target_vec, dtype=float)
    v = np.sqrt(np.clip(np.asarray(atoms, dtype=float), 0.0, None))
    rho = np.asarray(weights, dtype=float).copy()
    r, n = v.shape

    def misfit(v_mat, rho_vec):
        return _vandermonde(v_mat * v_mat, alphas) @ rho_vec - target_vec

    def max_abs(vec):
        return float(np.max(np.abs(vec), initial=0.0))

    best = (v.copy(), rho.copy(), max_abs(misfit(v, rho)))
    lam = 1e-8
    floor = 1e-15 * (1.0 + max_abs(target_vec))
    for _ in range(max_iters):
        u = v * v
        resid = misfit(v, rho)
        jac = np.empty((len(alphas), r * (n + 1)))
        jac[:, :r] = np.stack(
            [np.prod(ui[None, :] ** exps, axis=1) for ui in u], axis=1
        )
        col = r
        shifted = np.empty_like(exps)
        for i in range(r):
            for j in range(n):
                np.copyto(shifted, exps)
                shifted[:, j] = np.maximum(shifted[:, j] - 1.0, 0.0)
                dpow = exps[:, j] * np.prod(u[i][None, :] ** shifted, axis=1)
                jac[:, col] = rho[i] * dpow * 2.0 * v[i, j]
                col += 1
        jtj = jac.T @ jac
        damping = lam * (np.trace(jtj) / jtj.shape[0] + 1e-30)
        try:
            step = np.linalg.solve(
                jtj + damping * np.eye(jtj.shape[0]), -jac.T @ resid
            )
        except np.linalg.LinAlgError:
            break
        rho_new = rho + step[:r]
        v_new = v + step[r:].reshape(r, n)
        res_new = max_abs(misfit(v_new, rho_new))
        if res_new < best[2]:
            best = (v_new.copy(), rho_new.copy(), res_new)
            v, rho = v_new, rho_new
            lam = max(lam * 0.3, 1e-14)
            if res_new <= floor:
                break
        else:
            lam *= 10.0
            if lam > 1e8:
                break
    v, rho, _ = best
    u = v * v
    norms = np.linalg.norm(u, axis=1)
    keep = (norms > 1e-14) & (rho * norms**m > 0)
    u = u[keep] / norms[keep][:, None]
    if u.shape[0] == 0:
        return u, np.zeros(0), max_abs(target_vec)
    rho, _ = _nnls_weights(u, target_vec, alphas)
    dust = WEIGHT_DUST * float(np.max(rho, initial=0.0))
    keep = rho > dust
    u, rho = u[keep], rho[keep]
    res = max_abs(_vandermonde(u, alphas) @ rho - target_vec) if u.size else max_abs(target_vec)
    return u, rho, res


def _nnls_weights(atoms, target_vec, alphas):
    phi = _vandermonde(atoms, alphas)
    w, res = nnls(phi, target_vec)
    return w, float(res)
