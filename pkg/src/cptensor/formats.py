"""JSON interchange formats for tensors and decision results.

A tensor document carries either an explicit entry list (1-based index
tuples) or the identifying vector in graded-lex order, never both.  A
result document round-trips everything needed to re-verify the outcome:
decomposition, certificate payload, per-level stats and the full option
echo including the seed.
"""

from __future__ import annotations

import json
from typing import Any

import numpy as np

from . import __version__
from .multiindex import count_eq
from .pipeline import CpOptions, CpOutcome, CpStatus, LevelStats
from .sdp import Certificate, SolverOptions
from .tensor import Decomposition, SymmetricTensor, TensorError, from_entries


class FormatError(ValueError):
    """Raised for malformed tensor or result documents."""


# ----------------------------------------------------------------------
# tensor documents


def tensor_to_doc(
    tensor: SymmetricTensor,
    name: str | None = None,
    provenance: str | None = None,
    as_entries: bool = False,
) -> dict:
    doc: dict[str, Any] = {"order": tensor.m, "dim": tensor.n}
    if as_entries:
        entries = []
        for alpha, value in zip(tensor.index_set, tensor.a):
            if value != 0.0:
                indices = []
                for pos, exp in enumerate(alpha):
                    indices.extend([pos + 1] * exp)
                entries.append({"index": indices, "value": float(value)})
        doc["entries"] = entries
    else:
        doc["identifying_vector"] = [float(v) for v in tensor.a]
    meta = {}
    if name:
        meta["name"] = name
    if provenance:
        meta["provenance"] = provenance
    if meta:
        doc["metadata"] = meta
    return doc


def doc_to_tensor(doc: dict) -> SymmetricTensor:
    try:
        m = int(doc["order"])
        n = int(doc["dim"])
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"missing or malformed order/dim fields: {exc}") from None
    has_entries = "entries" in doc
    has_vector = "identifying_vector" in doc
    if has_entries == has_vector:
        raise FormatError(
            "exactly one of 'entries' and 'identifying_vector' must be present"
        )
    if has_vector:
        vec = np.asarray(doc["identifying_vector"], dtype=float)
        expected = count_eq(n, m)
        if vec.shape != (expected,):
            raise FormatError(
                f"identifying_vector has length {vec.shape[0]}, expected {expected} "
                f"for order {m}, dim {n}"
            )
        return SymmetricTensor(m, n, vec)
    pairs = []
    for i, item in enumerate(doc["entries"]):
        try:
            idx = [int(v) for v in item["index"]]
            val = float(item["value"])
        except (KeyError, TypeError, ValueError) as exc:
            raise FormatError(f"entry {i}: malformed index/value: {exc}") from None
        if len(idx) != m:
            raise FormatError(f"entry {i}: index has {len(idx)} parts, expected {m}")
        if any(not 1 <= v <= n for v in idx):
            raise FormatError(f"entry {i}: index {idx} outside 1..{n}")
        pairs.append((tuple(idx), val))
    try:
        return from_entries(m, n, pairs)
    except TensorError as exc:
        raise FormatError(str(exc)) from None


def read_tensor(path: str) -> SymmetricTensor:
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: invalid JSON at line {exc.lineno}: {exc.msg}") from None
    except OSError as exc:
        raise FormatError(f"{path}: {exc}") from None
    return doc_to_tensor(doc)


def write_json(doc: dict, path: str | None) -> str:
    text = json.dumps(doc, indent=2, sort_keys=True)
    if path:
        with open(path, "w") as fh:
            fh.write(text + "\n")
    return text


# ----------------------------------------------------------------------
# result documents


def options_to_doc(opts: CpOptions) -> dict:
    return {
        "degree": opts.degree,
        "k_max": opts.k_max,
        "seed": opts.seed,
        "tol_rank": opts.tol_rank,
        "tol_feas": opts.tol_feas,
        "tol_coord": opts.tol_coord,
        "tol_residual": opts.tol_residual,
        "fast_path": opts.fast_path,
        "solver": {
            "tol_gap": opts.solver.tol_gap,
            "tol_feas": opts.solver.tol_feas,
            "tol_accept": opts.solver.tol_accept,
            "tol_infeas": opts.solver.tol_infeas,
            "max_iters": opts.solver.max_iters,
        },
    }


def doc_to_options(doc: dict) -> CpOptions:
    solver_doc = doc.get("solver", {})
    return CpOptions(
        degree=doc.get("degree"),
        k_max=doc.get("k_max"),
        seed=int(doc.get("seed", 0)),
        tol_rank=float(doc.get("tol_rank", CpOptions.tol_rank)),
        tol_feas=float(doc.get("tol_feas", CpOptions.tol_feas)),
        tol_coord=float(doc.get("tol_coord", CpOptions.tol_coord)),
        tol_residual=float(doc.get("tol_residual", CpOptions.tol_residual)),
        fast_path=bool(doc.get("fast_path", True)),
        solver=SolverOptions(
            tol_gap=float(solver_doc.get("tol_gap", SolverOptions.tol_gap)),
            tol_feas=float(solver_doc.get("tol_feas", SolverOptions.tol_feas)),
            tol_accept=float(solver_doc.get("tol_accept", SolverOptions.tol_accept)),
            tol_infeas=float(solver_doc.get("tol_infeas", SolverOptions.tol_infeas)),
            max_iters=int(solver_doc.get("max_iters", SolverOptions.max_iters)),
        ),
    )


def outcome_to_doc(outcome: CpOutcome, tensor: SymmetricTensor) -> dict:
    doc: dict[str, Any] = {
        "status": outcome.status.value,
        "order": tensor.m,
        "dim": tensor.n,
        "reason": outcome.reason,
        "seed": outcome.seed,
        "version": __version__,
        "options": options_to_doc(outcome.options or CpOptions(seed=outcome.seed)),
        "stats": {
            "total_time": outcome.total_time,
            "levels": [
                {
                    "k": lv.k,
                    "solve_status": lv.solve_status,
                    "iterations": lv.iterations,
                    "solve_time": lv.solve_time,
                    "flat_t": lv.flat_t,
                    "extraction_failures": lv.extraction_failures,
                    "notes": lv.notes,
                }
                for lv in outcome.levels
            ],
        },
    }
    if outcome.decomposition is not None:
        dec = outcome.decomposition
        doc["decomposition"] = {
            "weights": [float(w) for w in dec.weights],
            "atoms": [[float(v) for v in u] for u in dec.atoms],
            "vectors": [[float(v) for v in vec] for vec in dec.vectors],
        }
        doc["level_k"] = outcome.level_k
        doc["level_t"] = outcome.level_t
        doc["residual"] = outcome.residual
    if outcome.certificate_kind is not None:
        cert_doc: dict[str, Any] = {
            "kind": outcome.certificate_kind,
            "residuals": {
                k: float(v) if isinstance(v, (int, float, np.floating)) else v
                for k, v in outcome.certificate_residuals.items()
            },
        }
        if outcome.certificate_kind == "negative-entry":
            alpha, value = outcome.negative_entry
            cert_doc["exponent"] = list(alpha)
            cert_doc["value"] = float(value)
        elif outcome.certificate is not None:
            cert_doc["level_k"] = outcome.level_k
            cert_doc["y"] = [float(v) for v in outcome.certificate.y]
            cert_doc["blocks"] = [
                [[float(v) for v in row] for row in blk]
                for blk in outcome.certificate.blocks
            ]
        doc["certificate"] = cert_doc
    return doc


def doc_to_outcome(doc: dict) -> CpOutcome:
    try:
        status = CpStatus(doc["status"])
    except (KeyError, ValueError) as exc:
        raise FormatError(f"missing or unknown status: {exc}") from None
    outcome = CpOutcome(
        status=status,
        seed=int(doc.get("seed", 0)),
        reason=doc.get("reason", ""),
        options=doc_to_options(doc.get("options", {})),
        total_time=float(doc.get("stats", {}).get("total_time", 0.0)),
    )
    outcome.levels = [
        LevelStats(
            k=int(lv["k"]),
            solve_status=lv.get("solve_status", ""),
            iterations=int(lv.get("iterations", 0)),
            solve_time=float(lv.get("solve_time", 0.0)),
            flat_t=lv.get("flat_t"),
            extraction_failures=int(lv.get("extraction_failures", 0)),
            notes=lv.get("notes", ""),
        )
        for lv in doc.get("stats", {}).get("levels", [])
    ]
    if "decomposition" in doc:
        dd = doc["decomposition"]
        m = int(doc["order"])
        n = int(doc["dim"])
        atoms = np.array(dd["atoms"], dtype=float).reshape(-1, n)
        outcome.decomposition = Decomposition(
            m, np.asarray(dd["weights"], dtype=float), atoms
        )
        outcome.level_k = doc.get("level_k")
        outcome.level_t = doc.get("level_t")
        outcome.residual = doc.get("residual")
    if "certificate" in doc:
        cd = doc["certificate"]
        outcome.certificate_kind = cd.get("kind")
        outcome.certificate_residuals = cd.get("residuals", {})
        if outcome.certificate_kind == "negative-entry":
            outcome.negative_entry = (tuple(cd["exponent"]), float(cd["value"]))
        elif "y" in cd:
            outcome.level_k = int(cd["level_k"])
            outcome.certificate = Certificate(
                kind="primal-infeasible",
                y=np.asarray(cd["y"], dtype=float),
                blocks=[np.asarray(blk, dtype=float) for blk in cd["blocks"]],
            )
    return outcome


def read_outcome(path: str) -> tuple[CpOutcome, dict]:
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: invalid JSON at line {exc.lineno}: {exc.msg}") from None
    except OSError as exc:
        raise FormatError(f"{path}: {exc}") from None
    return doc_to_outcome(doc), doc


def format_pretty(outcome: CpOutcome, tensor: SymmetricTensor) -> str:
    lines = [
        f"order m = {tensor.m}, dimension n = {tensor.n}",
        f"status: {outcome.status.value}",
        f"reason: {outcome.reason}",
    ]
    if outcome.decomposition is not None and len(outcome.decomposition):
        dec = outcome.decomposition
        lines.append(
            f"decomposition: {len(dec)} atoms at level (k={outcome.level_k}, "
            f"t={outcome.level_t}), reconstruction residual {outcome.residual:.3e}"
        )
        for rho, u in zip(dec.weights, dec.atoms):
            coords = ", ".join(f"{v:.6f}" for v in u)
            lines.append(f"  weight {rho:.6f}  atom ({coords})")
    elif outcome.decomposition is not None:
        lines.append("decomposition: empty (zero tensor)")
    if outcome.certificate_kind == "negative-entry":
        alpha, value = outcome.negative_entry
        lines.append(f"witness: entry class {alpha} = {value:.6g} < 0")
    elif outcome.certificate_kind == "dual-ray":
        res = outcome.certificate_residuals
        lines.append(
            f"certificate: improving dual ray at level k={outcome.level_k} "
            f"(adjoint residual {res.get('adjoint_residual', float('nan')):.2e})"
        )
    for lv in outcome.levels:
        lines.append(
            f"  level k={lv.k}: {lv.solve_status} in {lv.iterations} iterations "
            f"({lv.solve_time:.2f}s)"
            + (f", flat at t={lv.flat_t}" if lv.flat_t else "")
        )
    lines.append(f"total time: {outcome.total_time:.2f}s  seed: {outcome.seed}")
    return "\n".join(lines)
