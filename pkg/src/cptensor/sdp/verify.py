"""From-scratch verification of solver outcomes.

Both checks recompute every condition directly from the program data; they
share no state with the solver beyond the reported numbers, so a passing
verification is meaningful evidence independent of solver internals.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .program import ConicProgram
from .solver import Certificate, ConicOutcome, SolveStatus

STRICT_MARGIN = 1e-9  # required positivity of b'y relative to certificate size


@dataclass
class VerificationReport:
    ok: bool
    residuals: dict = field(default_factory=dict)

    def __bool__(self) -> bool:
        return self.ok


def verify_optimum(
    prog: ConicProgram, outcome: ConicOutcome, tol: float = 1e-7
) -> VerificationReport:
    """Recompute primal/dual feasibility and the duality gap of an optimum."""
    if outcome.status != SolveStatus.OPTIMAL or outcome.x is None:
        return VerificationReport(False, {"reason": "outcome is not an optimum"})
    x = outcome.x
    y = outcome.y if outcome.y is not None else np.zeros(prog.num_eq)
    z = outcome.z_blocks or []
    if len(z) != len(prog.blocks):
        return VerificationReport(False, {"reason": "dual block count mismatch"})

    b_norm = 1.0 + float(np.max(np.abs(prog.eq_rhs), initial=0.0))
    c_norm = 1.0 + float(np.max(np.abs(prog.objective), initial=0.0))

    eq_res = (
        float(np.max(np.abs(prog.eq_apply(x) - prog.eq_rhs), initial=0.0))
        if prog.num_eq
        else 0.0
    )
    prim_eig = 0.0
    for mat in prog.block_values(x):
        w = np.linalg.eigvalsh(0.5 * (mat + mat.T))
        prim_eig = min(prim_eig, float(w[0]))

    dual_res = float(
        np.max(
            np.abs(prog.objective - (prog.eq_apply_t(y) if prog.num_eq else 0.0) - prog.adjoint(z)),
            initial=0.0,
        )
    )
    dual_eig = 0.0
    z_scale = 1.0
    for mat in z:
        w = np.linalg.eigvalsh(0.5 * (mat + mat.T))
        dual_eig = min(dual_eig, float(w[0]))
        z_scale = max(z_scale, float(np.max(np.abs(mat), initial=0.0)))

    pobj = float(prog.objective @ x)
    dobj = float(prog.eq_rhs @ y) - sum(
        float(np.sum(blk.constant_matrix() * zj)) for blk, zj in zip(prog.blocks, z)
    )
    gap = abs(pobj - dobj) / max(1.0, abs(pobj), abs(dobj))

    x_scale = 1.0 + float(np.max(np.abs(x), initial=0.0))
    ok = (
        eq_res <= tol * b_norm
        and prim_eig >= -tol * x_scale
        and dual_res <= tol * c_norm
        and dual_eig >= -tol * z_scale
        and gap <= tol
    )
    return VerificationReport(
        ok,
        {
            "equality_residual": eq_res,
            "primal_min_eig": prim_eig,
            "dual_residual": dual_res,
            "dual_min_eig": dual_eig,
            "relative_gap": gap,
            "primal_objective": pobj,
            "dual_objective": dobj,
        },
    )


def verify_infeasibility(
    prog: ConicProgram, certificate: Certificate, tol: float = 1e-7
) -> VerificationReport:
    """Check an improving-ray infeasibility certificate from scratch.

    For kind "primal-infeasible" the ray (y, S_j) must satisfy S_j PSD,
    A' y + sum_j adjoint_j(S_j) = 0 within tol, and
    b' y - sum_j <D_j, S_j> strictly positive relative to the certificate
    size.  A zero certificate therefore never verifies.
    """
    if certificate is None:
        return VerificationReport(False, {"reason": "no certificate"})
    if certificate.kind == "primal-infeasible":
        y = certificate.y
        blocks = certificate.blocks
        if y is None or blocks is None or len(blocks) != len(prog.blocks):
            return VerificationReport(False, {"reason": "certificate shape mismatch"})
        if y.shape != (prog.num_eq,):
            return VerificationReport(
                False, {"reason": f"y has shape {y.shape}, expected ({prog.num_eq},)"}
            )
        scale = max(
            float(np.max(np.abs(y), initial=0.0)),
            max((float(np.max(np.abs(s), initial=0.0)) for s in blocks), default=0.0),
        )
        if scale == 0.0:
            return VerificationReport(False, {"reason": "zero certificate"})
        eig_min = 0.0
        for s, blk in zip(blocks, prog.blocks):
            if s.shape != (blk.size, blk.size):
                return VerificationReport(False, {"reason": "block size mismatch"})
            w = np.linalg.eigvalsh(0.5 * (s + s.T))
            eig_min = min(eig_min, float(w[0]))
        adj = prog.adjoint(blocks)
        if prog.num_eq:
            adj = adj + prog.eq_apply_t(y)
        adj_res = float(np.max(np.abs(adj), initial=0.0))
        margin = float(prog.eq_rhs @ y) - sum(
            float(np.sum(blk.constant_matrix() * s))
            for blk, s in zip(prog.blocks, blocks)
        )
        ok = (
            adj_res <= tol * scale
            and eig_min >= -tol * scale
            and margin > STRICT_MARGIN * scale
        )
        return VerificationReport(
            ok,
            {
                "adjoint_residual": adj_res,
                "min_eig": eig_min,
                "margin": margin,
                "scale": scale,
            },
        )
    if certificate.kind == "dual-infeasible":
        ray = certificate.ray
        if ray is None or ray.shape != (prog.num_vars,):
            return VerificationReport(False, {"reason": "certificate shape mismatch"})
        scale = float(np.max(np.abs(ray), initial=0.0))
        if scale == 0.0:
            return VerificationReport(False, {"reason": "zero certificate"})
        eq_res = (
            float(np.max(np.abs(prog.eq_apply(ray)), initial=0.0)) if prog.num_eq else 0.0
        )
        eig_min = 0.0
        for blk in prog.blocks:
            mat = blk.evaluate_linear(ray)
            w = np.linalg.eigvalsh(0.5 * (mat + mat.T))
            eig_min = min(eig_min, float(w[0]))
        gain = -float(prog.objective @ ray)
        ok = (
            eq_res <= tol * scale
            and eig_min >= -tol * scale
            and gain > STRICT_MARGIN * scale
        )
        return VerificationReport(
            ok,
            {
                "equality_residual": eq_res,
                "min_eig": eig_min,
                "objective_gain": gain,
                "scale": scale,
            },
        )
    return VerificationReport(False, {"reason": f"unknown kind {certificate.kind!r}"})
