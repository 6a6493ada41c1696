"""Bundled reference instances and seeded random instance generators."""

from __future__ import annotations

import json
from importlib import resources

import numpy as np

from .pipeline import CpOptions, CpStatus, check_cp
from .tensor import SymmetricTensor, entrywise_nonnegative, from_entries, from_rank_one_sum

FIXTURE_IDS = ("sec2", "ex4.1", "ex4.2", "ex4.3", "ex4.4", "ex4.5", "ex4.6", "ex4.7")


class FixtureError(ValueError):
    """Unknown fixture id or malformed bundled data."""


def fixture_ids() -> tuple[str, ...]:
    return FIXTURE_IDS


def load_fixture(fixture_id: str) -> tuple[SymmetricTensor, dict]:
    """Bundled tensor plus its metadata (name, provenance, construction)."""
    if fixture_id not in FIXTURE_IDS:
        raise FixtureError(
            f"unknown fixture id {fixture_id!r}; known: {', '.join(FIXTURE_IDS)}"
        )
    data = resources.files("cptensor.data").joinpath(f"{fixture_id}.json")
    doc = json.loads(data.read_text())
    m, n = int(doc["m"]), int(doc["n"])
    kind = doc["kind"]
    if kind == "identifying_vector":
        tensor = SymmetricTensor(m, n, np.asarray(doc["identifying_vector"], dtype=float))
    elif kind == "generators":
        tensor = from_rank_one_sum(doc["generators"], m, n=n)
    elif kind == "entries":
        tensor = from_entries(m, n, [(tuple(idx), float(v)) for idx, v in doc["entries"]])
    else:
        raise FixtureError(f"fixture {fixture_id}: unknown kind {kind!r}")
    meta = {"name": doc.get("name", fixture_id), "provenance": doc.get("provenance", "")}
    return tensor, meta


def cp_random(m: int, n: int, r: int, seed: int) -> SymmetricTensor:
    """Random completely positive instance: a sum of r nonnegative rank-one
    powers with seeded uniform generators."""
    if m < 2 or n < 1 or r < 0:
        raise ValueError(f"invalid parameters m={m}, n={n}, r={r}")
    rng = np.random.default_rng(seed)
    vecs = rng.uniform(0.1, 1.5, size=(r, n))
    return from_rank_one_sum(vecs, m, n=n)


def notcp_random(
    m: int, n: int, r: int, seed: int, max_attempts: int = 50
) -> SymmetricTensor:
    """Random instance that is certifiably not completely positive.

    Draws mixed-sign generators; candidates that come out entrywise
    nonnegative are screened with the full decision pipeline and redrawn
    whenever they are (or might be) completely positive.
    """
    if m < 2 or n < 1 or r < 1:
        raise ValueError(f"invalid parameters m={m}, n={n}, r={r}")
    rng = np.random.default_rng(seed)
    for _ in range(max_attempts):
        vecs = rng.uniform(-1.0, 1.0, size=(r, n))
        tensor = from_rank_one_sum(vecs, m, n=n)
        if tensor.is_zero():
            continue
        if not entrywise_nonnegative(tensor):
            return tensor
        outcome = check_cp(tensor, CpOptions(seed=seed))
        if outcome.status == CpStatus.NOT_COMPLETELY_POSITIVE:
            return tensor
    raise FixtureError(
        f"no not-completely-positive draw in {max_attempts} attempts "
        f"for m={m}, n={n}, r={r}"
    )
