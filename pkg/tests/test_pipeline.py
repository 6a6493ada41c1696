"""End-to-end decision pipeline on small instances."""

import json
from dataclasses import replace
from pathlib import Path

import numpy as np
import pytest

from cptensor import (
    CpOptions,
    CpStatus,
    check_cp,
    from_entries,
    from_rank_one_sum,
    residual,
    verify_outcome,
)
from cptensor.sdp import SolverOptions
from cptensor.tensor import SymmetricTensor

DATA = json.loads((Path(__file__).parent / "data" / "sec2_reference.json").read_text())


def sec2_tensor():
    return SymmetricTensor(3, 3, np.array(DATA["a"]))


def cp_random(rng, m, n, r):
    vecs = rng.uniform(0.1, 1.5, (r, n))
    return from_rank_one_sum(vecs, m), vecs


class TestCompletelyPositive:
    def test_reference_cubic_three_atoms(self):
        out = check_cp(sec2_tensor())
        assert out.status == CpStatus.COMPLETELY_POSITIVE
        assert len(out.decomposition) == 3
        assert out.residual <= 1e-6
        ok, report = verify_outcome(sec2_tensor(), out)
        assert ok, report

    def test_single_rank_one_term(self):
        t = from_rank_one_sum([[1.0, 0.0]], 3)
        out = check_cp(t)
        assert out.status == CpStatus.COMPLETELY_POSITIVE
        assert len(out.decomposition) == 1
        np.testing.assert_allclose(out.decomposition.atoms[0], [1.0, 0.0], atol=1e-7)
        assert out.decomposition.weights[0] == pytest.approx(1.0, abs=1e-7)

    def test_zero_tensor_empty_decomposition(self):
        t = from_rank_one_sum([], 3, n=2)
        out = check_cp(t)
        assert out.status == CpStatus.COMPLETELY_POSITIVE
        assert len(out.decomposition) == 0
        assert out.residual == 0.0
        assert verify_outcome(t, out)[0]

    @pytest.mark.parametrize("seed", range(4))
    def test_random_nonnegative_sums(self, seed):
        rng = np.random.default_rng(200 + seed)
        m = int(rng.choice([3, 4]))
        n = int(rng.integers(2, 4))
        r = int(rng.integers(1, 4))
        t, _ = cp_random(rng, m, n, r)
        out = check_cp(t, CpOptions(seed=seed))
        assert out.status == CpStatus.COMPLETELY_POSITIVE, out.reason
        assert residual(t, out.decomposition) <= 1e-5 * (1 + t.max_abs())
        assert verify_outcome(t, out)[0]


class TestMatrixSanity:
    def test_indefinite_matrix_rejected(self):
        # eigenvalues 3 and -1: not PSD, hence not completely positive
        t = from_entries(2, 2, [((1, 1), 1.0), ((1, 2), 2.0), ((2, 2), 1.0)])
        out = check_cp(t)
        assert out.status == CpStatus.NOT_COMPLETELY_POSITIVE
        assert out.certificate_kind == "dual-ray"
        assert verify_outcome(t, out)[0]

    def test_doubly_nonnegative_two_by_two(self):
        # explicit 3-term witness: e1 e1' + e2 e2' + (1,1)(1,1)'
        t = from_entries(2, 2, [((1, 1), 2.0), ((1, 2), 1.0), ((2, 2), 2.0)])
        witness = from_rank_one_sum([[1.0, 0.0], [0.0, 1.0], [1.0, 1.0]], 2)
        np.testing.assert_array_equal(t.a, witness.a)
        out = check_cp(t)
        assert out.status == CpStatus.COMPLETELY_POSITIVE
        assert out.residual <= 1e-8
        assert verify_outcome(t, out)[0]


class TestNegativeEntryPaths:
    def make_negated(self, seed):
        rng = np.random.default_rng(seed)
        t, _ = cp_random(rng, 3, 3, 2)
        a = t.a.copy()
        # negate an entry pinned by a localizing-block diagonal (odd part
        # e_j plus an even remainder) so low-level infeasibility is forced
        target = (1, 2, 0)
        idx = list(t.index_set).index(target)
        a[idx] = -abs(a[idx]) - 0.1
        return SymmetricTensor(3, 3, a)

    def test_fast_path_negative_entry(self):
        t = self.make_negated(5)
        out = check_cp(t)
        assert out.status == CpStatus.NOT_COMPLETELY_POSITIVE
        assert out.certificate_kind == "negative-entry"
        assert out.negative_entry[1] < 0
        assert verify_outcome(t, out)[0]

    def test_sdp_route_without_fast_path(self):
        t = self.make_negated(6)
        out = check_cp(t, CpOptions(fast_path=False))
        assert out.status == CpStatus.NOT_COMPLETELY_POSITIVE
        assert out.certificate_kind == "dual-ray"
        assert verify_outcome(t, out)[0]


class TestDeterminism:
    def test_identical_runs_identical_atoms(self):
        t = sec2_tensor()
        o1 = check_cp(t, CpOptions(seed=11))
        o2 = check_cp(t, CpOptions(seed=11))
        assert o1.status == o2.status == CpStatus.COMPLETELY_POSITIVE
        np.testing.assert_allclose(
            np.sort(o1.decomposition.atoms, axis=0),
            np.sort(o2.decomposition.atoms, axis=0),
            atol=1e-9,
        )
        np.testing.assert_allclose(
            np.sort(o1.decomposition.weights), np.sort(o2.decomposition.weights),
            atol=1e-9,
        )


class TestIndeterminate:
    def test_solver_breakdown_is_reported_not_raised(self):
        t = sec2_tensor()
        opts = CpOptions(solver=SolverOptions(max_iters=2))
        out = check_cp(t, opts)
        assert out.status == CpStatus.INDETERMINATE
        assert "solver" in out.reason or "k_max" in out.reason
        assert verify_outcome(t, out)[0]  # nothing to verify


class TestVerifyOutcome:
    def test_tampered_decomposition_rejected(self):
        t = sec2_tensor()
        out = check_cp(t)
        atoms = out.decomposition.atoms.copy()
        atoms[0, 0] = -atoms[0, 0] - 0.2
        from cptensor.tensor import Decomposition

        out.decomposition = Decomposition(3, out.decomposition.weights, atoms)
        ok, report = verify_outcome(t, out)
        assert not ok

    def test_tampered_weight_rejected(self):
        t = sec2_tensor()
        out = check_cp(t)
        from cptensor.tensor import Decomposition

        weights = out.decomposition.weights.copy()
        weights[0] *= 2.0
        out.decomposition = Decomposition(3, weights, out.decomposition.atoms)
        ok, _ = verify_outcome(t, out)
        assert not ok

    def test_infeasibility_reverification_from_scratch(self):
        t = from_entries(2, 2, [((1, 1), 1.0), ((1, 2), 2.0), ((2, 2), 1.0)])
        out = check_cp(t)
        assert out.status == CpStatus.NOT_COMPLETELY_POSITIVE
        ok, report = verify_outcome(t, out)
        assert ok, report
        # tamper with the certificate
        out.certificate.y = out.certificate.y * 0.0
        ok, _ = verify_outcome(t, out)
        assert not ok


class TestOptionHandling:
    def test_bad_degree_rejected(self):
        with pytest.raises(ValueError):
            check_cp(sec2_tensor(), CpOptions(degree=3))
        with pytest.raises(ValueError):
            check_cp(sec2_tensor(), CpOptions(degree=2))

    def test_k_max_below_start_rejected(self):
        with pytest.raises(ValueError):
            check_cp(sec2_tensor(), CpOptions(k_max=1))
