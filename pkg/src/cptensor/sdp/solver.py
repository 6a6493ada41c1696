"""Primal-dual interior-point solver on the homogeneous self-dual embedding.

Solves   min c'x  s.t.  A x = b,  D_j + sum_i x_i B_{j,i}  PSD  (x free)

together with its dual, by Newton steps on the self-dual model with
Nesterov-Todd scaling and a Mehrotra predictor-corrector.  The embedding
makes infeasibility an outcome rather than an error: when the homogenizing
variable tau vanishes while kappa stays positive, a Farkas-type improving
ray is extracted and verified.

All linear algebra is dense; the per-iteration Schur complement over the
free variables is accumulated by the compiled kernels in
:mod:`cptensor.sdp.kernels`.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
import scipy.linalg as sla

from .kernels import mirror_upper, schur_block_accumulate
from .program import ConicProgram, LmiBlock, ProgramError, presolve_equalities


class SolveStatus(str, Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"
    INDETERMINATE = "indeterminate"


@dataclass
class SolverOptions:
    """Tolerances and iteration controls.

    The solver targets tol_gap/tol_feas; if progress stalls it accepts a
    point meeting tol_accept and flags the outcome with a warning.
    Infeasibility is declared once tau/kappa stays below ``infeas_ratio``
    for ``infeas_streak`` consecutive iterations and the extracted ray
    checks out at ``tol_infeas``.
    """

    tol_gap: float = 1e-8
    tol_feas: float = 1e-8
    tol_accept: float = 1e-7
    tol_infeas: float = 1e-8
    max_iters: int = 200
    step_scale: float = 0.99
    infeas_ratio: float = 1e-8
    infeas_streak: int = 5
    verbose: bool = False


@dataclass
class Certificate:
    """Improving-ray certificate attached to non-optimal outcomes.

    kind "primal-infeasible": (y, blocks) with blocks PSD,
    A'y + adjoint(blocks) = 0 and b'y - <D, blocks> = 1 after normalization.
    kind "dual-infeasible": a ray with A ray = 0, linear block images PSD
    and c'ray = -1 after normalization.
    """

    kind: str
    y: np.ndarray | None = None
    blocks: list | None = None
    ray: np.ndarray | None = None
    residuals: dict = field(default_factory=dict)


@dataclass
class SolveStats:
    iterations: int = 0
    solve_time: float = 0.0
    mu: float = float("nan")
    primal_res: float = float("nan")
    dual_res: float = float("nan")
    rel_gap: float = float("nan")
    tau: float = float("nan")
    kappa: float = float("nan")
    accepted_at_relaxed_tol: bool = False
    message: str = ""
    history: list = field(default_factory=list)


@dataclass
class ConicOutcome:
    status: SolveStatus
    x: np.ndarray | None = None
    objective: float | None = None
    y: np.ndarray | None = None
    z_blocks: list | None = None
    s_blocks: list | None = None
    certificate: Certificate | None = None
    stats: SolveStats = field(default_factory=SolveStats)


# ----------------------------------------------------------------------
# block helpers


def _block_dot(a: list, b: list) -> float:
    return float(sum(np.sum(x * y) for x, y in zip(a, b)))


def _chol_psd(mat: np.ndarray) -> np.ndarray:
    """Cholesky factor with escalating jitter for nearly singular input."""
    scale = max(float(np.trace(mat)) / max(mat.shape[0], 1), 1e-300)
    jitter = 0.0
    for _ in range(12):
        try:
            return np.linalg.cholesky(mat + jitter * np.eye(mat.shape[0]))
        except np.linalg.LinAlgError:
            jitter = max(jitter * 100.0, 1e-15 * scale)
    raise np.linalg.LinAlgError("matrix not positive definite even with jitter")


class _BlockData:
    """Per-block preprocessed cell arrays for the Schur kernel."""

    def __init__(self, blk: LmiBlock, num_vars: int):
        self.size = blk.size
        self.block = blk
        mask = blk.vars >= 0
        order = np.argsort(blk.vars[mask], kind="stable")
        v = blk.vars[mask][order]
        self.cr = np.ascontiguousarray(blk.rows[mask][order])
        self.cc = np.ascontiguousarray(blk.cols[mask][order])
        self.cw = np.ascontiguousarray(blk.coeffs[mask][order])
        gvar, counts = np.unique(v, return_counts=True)
        self.gvar = gvar.astype(np.int64)
        self.ptr = np.zeros(gvar.shape[0] + 1, dtype=np.int64)
        np.cumsum(counts, out=self.ptr[1:])
        self.has_const = False
        self.phi = np.zeros((blk.size, blk.size))


class _Scaling:
    """Nesterov-Todd scaling point of one (S, Z) block pair."""

    def __init__(self, S: np.ndarray, Z: np.ndarray):
        Ls = _chol_psd(S)
        Lz = _chol_psd(Z)
        U, lam, Vt = np.linalg.svd(Lz.T @ Ls)
        lam = np.maximum(lam, 1e-300)
        root = np.sqrt(lam)
        self.r = Ls @ (Vt.T / root)
        self.rti = Lz @ (U / root)
        self.lam = lam
        self.v_inv = self.rti @ self.rti.T  # inverse of r r'

    def scale_s(self, M: np.ndarray) -> np.ndarray:
        """W^{-T}: congruence by rti' on the s side."""
        return self.rti.T @ M @ self.rti

    def scale_z(self, M: np.ndarray) -> np.ndarray:
        """W: congruence by r' on the z side."""
        return self.r.T @ M @ self.r

    def unscale_to_s(self, M: np.ndarray) -> np.ndarray:
        """W^T: map a scaled-space matrix back to the s side."""
        return self.r @ M @ self.r.T

    def vc(self, M: np.ndarray) -> np.ndarray:
        """(W'W)^{-1}: congruence by the inverse scaling matrix."""
        return self.v_inv @ M @ self.v_inv


def solve(prog: ConicProgram, opts: SolverOptions | None = None) -> ConicOutcome:
    """Solve a conic program, returning an optimum or a verified certificate."""
    opts = opts or SolverOptions()
    if not prog.blocks:
        raise ProgramError("program needs at least one LMI block")
    t0 = time.time()

    pre = presolve_equalities(prog)
    if pre.conflict is not None:
        i, j = pre.conflict
        y = np.zeros(prog.num_eq)
        if i == j:
            y[i] = np.sign(prog.eq_rhs[i])
        else:
            sign = np.sign(prog.eq_rhs[i] - prog.eq_rhs[j])
            y[i] = sign
            y[j] = -sign
        margin = float(prog.eq_rhs @ y)
        cert = Certificate(
            kind="primal-infeasible",
            y=y / margin,
            blocks=[np.zeros((b.size, b.size)) for b in prog.blocks],
            residuals={"adjoint": 0.0, "margin": 1.0, "source": "presolve"},
        )
        stats = SolveStats(message="conflicting equality rows found in presolve")
        stats.solve_time = time.time() - t0
        return ConicOutcome(status=SolveStatus.INFEASIBLE, certificate=cert, stats=stats)

    A_full = prog.eq_dense()
    A = np.ascontiguousarray(A_full[pre.keep]) if pre.keep.size else np.zeros((0, prog.num_vars))
    b_full = prog.eq_rhs
    b = b_full[pre.keep] if pre.keep.size else np.zeros(0)

    # data scaling: objective and right-hand side are normalized; constants
    # in the blocks scale with b
    c_scale = max(1.0, float(np.max(np.abs(prog.objective), initial=0.0)))
    consts = [blk.constant_matrix() for blk in prog.blocks]
    b_scale = max(
        1.0,
        float(np.max(np.abs(b), initial=0.0)),
        max((float(np.max(np.abs(d), initial=0.0)) for d in consts), default=0.0),
    )
    c = prog.objective / c_scale
    b = b / b_scale
    consts = [d / b_scale for d in consts]

    result = _solve_scaled(prog, A, b, c, consts, opts, t0)

    # undo the scaling on the way out
    if result.x is not None:
        result.x = result.x * b_scale
        result.objective = float(prog.objective @ result.x)
    if result.y is not None:
        y_full = np.zeros(prog.num_eq)
        y_full[pre.keep] = result.y * c_scale
        result.y = y_full
    if result.z_blocks is not None:
        result.z_blocks = [z * c_scale for z in result.z_blocks]
    if result.s_blocks is not None:
        result.s_blocks = [s * b_scale for s in result.s_blocks]
    cert = result.certificate
    if cert is not None and cert.y is not None and cert.y.shape[0] != prog.num_eq:
        y_full = np.zeros(prog.num_eq)
        y_full[pre.keep] = cert.y
        cert.y = y_full
    return result


def _solve_scaled(prog, A, b, c, consts, opts, t0) -> ConicOutcome:
    N = prog.num_vars
    m = A.shape[0]
    blocks = [_BlockData(blk, N) for blk in prog.blocks]
    for bd, d in zip(blocks, consts):
        bd.has_const = bool(np.any(d))
    sizes = [bd.size for bd in blocks]
    nu = float(sum(sizes))
    any_const = any(bd.has_const for bd in blocks)

    def eval_linear(x):
        return [bd.block.evaluate_linear(x) for bd in blocks]

    def adjoint(mats):
        out = np.zeros(N)
        for bd, mat in zip(blocks, mats):
            bd.block.adjoint_into(mat, out)
        return out

    # HSD state
    x = np.zeros(N)
    y = np.zeros(m)
    s = [np.eye(sz) for sz in sizes]
    z = [np.eye(sz) for sz in sizes]
    tau, kappa = 1.0, 1.0

    H = np.zeros((N, N))
    b_norm = 1.0 + float(np.max(np.abs(b), initial=0.0))
    c_norm = 1.0 + float(np.max(np.abs(c), initial=0.0))
    d_norms = [1.0 + float(np.max(np.abs(d), initial=0.0)) for d in consts]

    stats = SolveStats()
    streak = 0
    best_metric = np.inf
    best_point = None
    stall_count = 0
    status = SolveStatus.INDETERMINATE
    message = "maximum iterations reached"

    if opts.verbose:
        print(" it        pobj        dobj       pres       dres     relgap"
              "        mu       tau     kappa   step")

    metrics = None
    for it in range(opts.max_iters):
        Bx = eval_linear(x)
        rd = c * tau - (A.T @ y if m else 0.0) - adjoint(z)
        rp = A @ x - b * tau if m else np.zeros(0)
        rs = [sj - bxj - dj * tau for sj, bxj, dj in zip(s, Bx, consts)]
        dz_const = sum(float(np.sum(d * zj)) for d, zj in zip(consts, z))
        rg = kappa + float(c @ x) - float(b @ y if m else 0.0) + dz_const
        gap = _block_dot(s, z)
        mu = (gap + tau * kappa) / (nu + 1.0)

        pobj = float(c @ x) / tau
        dobj = (float(b @ y if m else 0.0) - dz_const) / tau
        pres = max(
            float(np.max(np.abs(rp), initial=0.0)) / b_norm,
            max(
                float(np.max(np.abs(rsj))) / dn
                for rsj, dn in zip(rs, d_norms)
            ),
        ) / tau
        dres = float(np.max(np.abs(rd), initial=0.0)) / c_norm / tau
        relgap = (gap / tau**2) / max(1.0, abs(pobj), abs(dobj))
        metrics = (pres, dres, relgap)

        stats.history.append(
            dict(it=it, pobj=pobj, dobj=dobj, pres=pres, dres=dres,
                 relgap=relgap, mu=mu, tau=tau, kappa=kappa)
        )
        if opts.verbose:
            print(f"{it:3d}  {pobj:10.3e}  {dobj:10.3e}  {pres:9.2e}  {dres:9.2e}"
                  f"  {relgap:9.2e}  {mu:8.1e}  {tau:8.1e}  {kappa:8.1e}")

        # -- optimality
        if pres <= opts.tol_feas and dres <= opts.tol_feas and relgap <= opts.tol_gap:
            status = SolveStatus.OPTIMAL
            message = "converged"
            break

        # -- infeasibility: tau/kappa collapse sustained over several iterations
        streak = streak + 1 if tau < opts.infeas_ratio * kappa else 0
        if streak >= opts.infeas_streak:
            cert = _extract_certificate(
                A, b, c, consts, adjoint, eval_linear, x, y, z, opts.tol_infeas
            )
            if cert is not None:
                status = (
                    SolveStatus.INFEASIBLE
                    if cert.kind == "primal-infeasible"
                    else SolveStatus.UNBOUNDED
                )
                message = "homogenizing variable collapsed; certificate verified"
                stats.iterations = it
                _finalize(stats, mu, metrics, tau, kappa, t0)
                return ConicOutcome(status=status, certificate=cert, stats=stats)
            message = "tau/kappa collapsed but no certificate verified"
            status = SolveStatus.INDETERMINATE
            break

        # -- stall bookkeeping; remember the best iterate seen so far
        metric_now = max(pres, dres, relgap)
        if metric_now <= best_metric:
            best_point = (
                x.copy(), y.copy(), [zj.copy() for zj in z],
                [sj.copy() for sj in s], tau, kappa, metrics, mu,
            )
        if metric_now < 0.97 * best_metric:
            best_metric = metric_now
            stall_count = 0
        else:
            stall_count += 1
        if stall_count >= 10 or mu < 1e-16:
            current = (x, y, z, s, tau, kappa, metrics, mu)
            outcome = _resolve_stall(
                A, b, c, consts, adjoint, eval_linear, best_point, current,
                opts, stats, t0,
            )
            if outcome is not None:
                outcome.stats.iterations = it
                return outcome
            message = "progress stalled"
            status = SolveStatus.INDETERMINATE
            break

        # -- Nesterov-Todd scalings and Schur complement
        scalings = [_Scaling(sj, zj) for sj, zj in zip(s, z)]
        H[:, :] = 0.0
        for bd, sc in zip(blocks, scalings):
            schur_block_accumulate(
                H, sc.v_inv, bd.ptr, bd.cr, bd.cc, bd.cw, bd.gvar, bd.phi
            )
        mirror_upper(H)

        try:
            solve_k, h_chol = _factor_kkt(H, A)
        except np.linalg.LinAlgError:
            message = "KKT factorization failed"
            status = SolveStatus.INDETERMINATE
            break

        if any_const:
            vcd = [sc.vc(d) for sc, d in zip(scalings, consts)]
            bt_vcd = adjoint(vcd)
            h_vh = sum(float(np.sum(d * v)) for d, v in zip(consts, vcd))
        else:
            bt_vcd = np.zeros(N)
            h_vh = 0.0
        c_plus = c + bt_vcd
        c_minus = c - bt_vcd

        p1, q1 = solve_k(-c_plus, b)
        denom = kappa + tau * h_vh - tau * float(c_minus @ p1) + tau * float(b @ q1 if m else 0.0)

        def solve_once(f_d, f_p, f_s, f_g, g_scaled, d_k):
            """One pass of the block elimination for arbitrary right-hand
            sides; g_scaled is the scaled-space complementarity target."""
            E = [
                sc.unscale_to_s(g) - fs
                for sc, g, fs in zip(scalings, g_scaled, f_s)
            ]
            vce = [sc.vc(e) for sc, e in zip(scalings, E)]
            f1 = f_d + adjoint(vce)
            f3 = d_k - tau * f_g + tau * sum(
                float(np.sum(d * v)) for d, v in zip(consts, vce)
            )
            p0, q0 = solve_k(f1, f_p)
            dtau = (f3 + tau * float(c_minus @ p0) - tau * float(b @ q0 if m else 0.0)) / denom
            dx = p0 + dtau * p1
            dy = q0 + dtau * q1 if m else np.zeros(0)
            bdx = eval_linear(dx)
            dz = [
                sc.vc(e - bx_j - d * dtau)
                for sc, e, bx_j, d in zip(scalings, E, bdx, consts)
            ]
            ds = [bx_j + d * dtau + fs for bx_j, d, fs in zip(bdx, consts, f_s)]
            dkappa = (d_k - kappa * dtau) / tau
            return [dx, dy, dz, ds, dtau, dkappa]

        def solve_refined(f_d, f_p, f_s, f_g, g_scaled, d_k, passes=2):
            """Elimination plus refinement against the full Newton system,
            with residuals evaluated through the true block operators."""
            sol = solve_once(f_d, f_p, f_s, f_g, g_scaled, d_k)
            for _ in range(passes):
                dx, dy, dz, ds, dtau, dkappa = sol
                bdx = eval_linear(dx)
                res_d = f_d - (c * dtau - (A.T @ dy if m else 0.0) - adjoint(dz))
                res_p = f_p - (A @ dx - b * dtau) if m else np.zeros(0)
                res_s = [
                    fs - (dsj - bx_j - d * dtau)
                    for fs, dsj, bx_j, d in zip(f_s, ds, bdx, consts)
                ]
                res_g = f_g - (
                    dkappa
                    + float(c @ dx)
                    - float(b @ dy if m else 0.0)
                    + sum(float(np.sum(d * zj)) for d, zj in zip(consts, dz))
                )
                res_e = [
                    g - (sc.scale_s(dsj) + sc.scale_z(dzj))
                    for g, sc, dsj, dzj in zip(g_scaled, scalings, ds, dz)
                ]
                res_k = d_k - (kappa * dtau + tau * dkappa)
                corr = solve_once(res_d, res_p, res_s, res_g, res_e, res_k)
                sol = [
                    sol[0] + corr[0],
                    sol[1] + corr[1],
                    [a + b_ for a, b_ in zip(sol[2], corr[2])],
                    [a + b_ for a, b_ in zip(sol[3], corr[3])],
                    sol[4] + corr[4],
                    sol[5] + corr[5],
                ]
            return tuple(sol)

        def newton(eta, dc_lam, dk):
            g_scaled = [
                2.0 * dcl / np.add.outer(sc.lam, sc.lam)
                for sc, dcl in zip(scalings, dc_lam)
            ]
            return solve_refined(
                -eta * rd,
                -eta * rp,
                [-eta * r for r in rs],
                -eta * rg,
                g_scaled,
                dk,
            )

        # predictor: aim at zero residuals and zero complementarity
        dc_aff = [np.diag(-sc.lam**2) for sc in scalings]
        aff = newton(1.0, dc_aff, -tau * kappa)
        alpha_aff, s_scaled_aff, z_scaled_aff = _max_step(
            scalings, s, z, aff, tau, kappa
        )

        ga = _block_dot(s, z) + tau * kappa
        dsz = (
            _block_dot(aff[3], z)
            + _block_dot(s, aff[2])
            + aff[4] * kappa
            + tau * aff[5]
        )
        d2 = _block_dot(aff[3], aff[2]) + aff[4] * aff[5]
        mu_aff = (ga + alpha_aff * dsz + alpha_aff**2 * d2) / (nu + 1.0)
        sigma = min(1.0, max(0.0, (mu_aff / mu))) ** 3

        # corrector with second-order terms from the predictor
        dc_corr = []
        for sc, dst, dzt in zip(scalings, s_scaled_aff, z_scaled_aff):
            cross = 0.5 * (dst @ dzt + dzt @ dst)
            dc_corr.append(sigma * mu * np.eye(sc.lam.shape[0]) - np.diag(sc.lam**2) - cross)
        dk_corr = sigma * mu - tau * kappa - aff[4] * aff[5]
        direction = newton(1.0 - sigma, dc_corr, dk_corr)

        alpha, _, _ = _max_step(scalings, s, z, direction, tau, kappa)
        alpha = min(1.0, opts.step_scale * alpha)
        if alpha <= 1e-12:
            message = "step length collapsed"
            current = (x, y, z, s, tau, kappa, metrics, mu)
            outcome = _resolve_stall(
                A, b, c, consts, adjoint, eval_linear, best_point, current,
                opts, stats, t0,
            )
            if outcome is not None:
                outcome.stats.iterations = it
                return outcome
            status = SolveStatus.INDETERMINATE
            break

        dx, dy, dz, ds, dtau, dkappa = direction
        x += alpha * dx
        y += alpha * dy
        for sj, dsj in zip(s, ds):
            sj += alpha * dsj
            np.copyto(sj, 0.5 * (sj + sj.T))
        for zj, dzj in zip(z, dz):
            zj += alpha * dzj
            np.copyto(zj, 0.5 * (zj + zj.T))
        tau += alpha * dtau
        kappa += alpha * dkappa
        stats.iterations = it + 1
    else:
        it = opts.max_iters - 1

    _finalize(stats, mu, metrics, tau, kappa, t0)

    if status == SolveStatus.OPTIMAL:
        xh = x / tau
        return ConicOutcome(
            status=status,
            x=xh,
            objective=float(c @ xh),
            y=y / tau,
            z_blocks=[zj / tau for zj in z],
            s_blocks=[sj / tau for sj in s],
            stats=stats,
        )

    # last chance on indeterminate exits: relaxed acceptance or certificates
    outcome = _resolve_stall(
        A, b, c, consts, adjoint, eval_linear, best_point,
        (x, y, z, s, tau, kappa, metrics, stats.mu), opts, stats, t0,
    )
    if outcome is not None:
        return outcome
    stats.message = message
    return ConicOutcome(status=SolveStatus.INDETERMINATE, stats=stats)


def _finalize(stats, mu, metrics, tau, kappa, t0):
    stats.mu = mu
    if metrics is not None:
        stats.primal_res, stats.dual_res, stats.rel_gap = metrics
    stats.tau = tau
    stats.kappa = kappa
    stats.solve_time = time.time() - t0


def _factor_kkt(H: np.ndarray, A: np.ndarray):
    """Factor the reduced KKT system; returns a two-RHS solver."""
    N = H.shape[0]
    m = A.shape[0]
    scale = float(np.mean(np.abs(np.diag(H)))) + 1e-300
    ridge = 0.0
    for attempt in range(6):
        try:
            Hf = H if ridge == 0.0 else H + ridge * scale * np.eye(N)
            L = sla.cholesky(Hf, lower=True, check_finite=False)
            break
        except np.linalg.LinAlgError:
            ridge = max(ridge * 100.0, 1e-14)
    else:
        raise np.linalg.LinAlgError("Schur complement not positive definite")

    if m:
        W = sla.solve_triangular(L, A.T, lower=True, check_finite=False)
        M = W.T @ W
        mscale = float(np.mean(np.abs(np.diag(M)))) + 1e-300
        mridge = 0.0
        for attempt in range(6):
            try:
                Mf = M if mridge == 0.0 else M + mridge * mscale * np.eye(m)
                LM = sla.cholesky(Mf, lower=True, check_finite=False)
                break
            except np.linalg.LinAlgError:
                mridge = max(mridge * 100.0, 1e-14)
        else:
            raise np.linalg.LinAlgError("equality Schur complement singular")
    else:
        W = None
        LM = None

    def solve_k(f: np.ndarray, g: np.ndarray):
        """Solve H u - A' v = f, A u = g."""
        t = sla.solve_triangular(L, f, lower=True, check_finite=False)
        if m:
            v = sla.cho_solve((LM, True), g - W.T @ t, check_finite=False)
            t = t + W @ v
        else:
            v = np.zeros(0)
        u = sla.solve_triangular(L, t, lower=True, trans=1, check_finite=False)
        return u, v

    return solve_k, L


def _max_step(scalings, s, z, direction, tau, kappa):
    """Largest alpha keeping all cone variables in the cone, and the scaled
    step matrices (reused for the corrector cross terms)."""
    dx, dy, dz, ds, dtau, dkappa = direction
    alpha = np.inf
    s_scaled, z_scaled = [], []
    for sc, dsj, dzj in zip(scalings, ds, dz):
        inv_root = 1.0 / np.sqrt(sc.lam)
        dst = sc.scale_s(dsj)
        dzt = sc.scale_z(dzj)
        s_scaled.append(dst)
        z_scaled.append(dzt)
        for mat in (dst, dzt):
            scaled = inv_root[:, None] * mat * inv_root[None, :]
            wmin = float(np.linalg.eigvalsh(0.5 * (scaled + scaled.T))[0])
            if wmin < 0:
                alpha = min(alpha, -1.0 / wmin)
    if dtau < 0:
        alpha = min(alpha, -tau / dtau)
    if dkappa < 0:
        alpha = min(alpha, -kappa / dkappa)
    return float(alpha), s_scaled, z_scaled


def _extract_certificate(A, b, c, consts, adjoint, eval_linear, x, y, z, tol):
    """Try the primal-infeasibility ray, then the dual one; None if neither
    meets the tolerance."""
    m = A.shape[0]
    margin = float(b @ y if m else 0.0) - sum(
        float(np.sum(d * zj)) for d, zj in zip(consts, z)
    )
    if margin > 0:
        yc = (y / margin) if m else np.zeros(0)
        zc = [zj / margin for zj in z]
        res = float(
            np.max(np.abs((A.T @ yc if m else 0.0) + adjoint(zc)), initial=0.0)
        )
        scale = max(
            float(np.max(np.abs(yc), initial=0.0)),
            max(float(np.max(np.abs(zj), initial=0.0)) for zj in zc),
            1.0,
        )
        if res <= tol * scale:
            return Certificate(
                kind="primal-infeasible",
                y=yc,
                blocks=zc,
                residuals={"adjoint": res, "margin": 1.0, "scale": scale},
            )
    ray_gain = -float(c @ x)
    if ray_gain > 0:
        xc = x / ray_gain
        eq_res = float(np.max(np.abs(A @ xc), initial=0.0)) if m else 0.0
        eig_min = 0.0
        for mat in eval_linear(xc):
            eig_min = min(eig_min, float(np.linalg.eigvalsh(0.5 * (mat + mat.T))[0]))
        scale = max(float(np.max(np.abs(xc), initial=0.0)), 1.0)
        if eq_res <= tol * scale and eig_min >= -tol * scale:
            return Certificate(
                kind="dual-infeasible",
                ray=xc,
                residuals={"equality": eq_res, "min_eig": eig_min, "scale": scale},
            )
    return None


def _resolve_stall(
    A, b, c, consts, adjoint, eval_linear, best_point, current, opts, stats, t0
):
    """On stalled progress: accept the best iterate seen if it meets the
    relaxed tolerance, otherwise look for a certificate in the current
    (possibly diverging) iterate and then in the best one."""
    if best_point is not None:
        x, y, z, s, tau, kappa, metrics, mu = best_point
        pres, dres, relgap = metrics
        if (
            pres <= opts.tol_accept
            and dres <= opts.tol_accept
            and relgap <= opts.tol_accept
        ):
            stats.accepted_at_relaxed_tol = True
            stats.message = "accepted at relaxed tolerance after stall"
            _finalize(stats, mu, metrics, tau, kappa, t0)
            xh = x / tau
            return ConicOutcome(
                status=SolveStatus.OPTIMAL,
                x=xh,
                objective=float(c @ xh),
                y=y / tau,
                z_blocks=[zj / tau for zj in z],
                s_blocks=[sj / tau for sj in s],
                stats=stats,
            )
    for point in (current, best_point):
        if point is None:
            continue
        x, y, z, s, tau, kappa, metrics, mu = point
        cert = _extract_certificate(
            A, b, c, consts, adjoint, eval_linear, x, y, z, opts.tol_infeas
        )
        if cert is not None:
            stats.message = "stalled; certificate verified"
            _finalize(stats, mu, metrics, tau, kappa, t0)
            status = (
                SolveStatus.INFEASIBLE
                if cert.kind == "primal-infeasible"
                else SolveStatus.UNBOUNDED
            )
            return ConicOutcome(status=status, certificate=cert, stats=stats)
    return None
