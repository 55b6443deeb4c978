"""Tests for cycle sums, the monotonicity checks, and diagnostics."""

import numpy as np
import pytest
from numpy.testing import assert_allclose

from cyclorat import (
    InconsistentPairError,
    IndexOutOfRangeError,
    TooLargeError,
    brute_force_cm,
    check_cyclic_monotonicity,
    check_two_point_monotonicity,
    check_weak_stochastic_transitivity,
    cycle_sum,
    make_dataset,
)

from conftest import luce_dataset, mixed_pool_dataset, pum_dataset, random_probs_dataset


class TestCycleSum:
    def test_identical_observations_sum_to_zero(self):
        d = make_dataset("m", [[1, 2], [1, 2]], [[0.4, 0.6], [0.4, 0.6]])
        assert cycle_sum(d, [1, 2]) == 0.0

    def test_softmax_fixture_two_cycle(self, softmax_fixture):
        # <p1, v1 - v2> + <p2, v2 - v1> = -0.5 + 0.73106 by scalar arithmetic.
        assert_allclose(cycle_sum(softmax_fixture, [1, 2]), 0.23106, atol=1e-15)

    def test_violation_fixture_two_cycle(self, violation_fixture):
        # (0.3 - 0.7) + (-0.6 + 0.4) = -0.6 by scalar arithmetic.
        assert_allclose(cycle_sum(violation_fixture, [1, 2]), -0.6, atol=1e-15)

    def test_bad_indices(self, softmax_fixture):
        with pytest.raises(IndexOutOfRangeError):
            cycle_sum(softmax_fixture, [1, 3])
        with pytest.raises(IndexOutOfRangeError):
            cycle_sum(softmax_fixture, [0, 1])
        with pytest.raises(IndexOutOfRangeError):
            cycle_sum(softmax_fixture, [1])


class TestCheckCyclicMonotonicity:
    def test_softmax_fixture_passes(self, softmax_fixture):
        verdict = check_cyclic_monotonicity(softmax_fixture)
        assert verdict.is_pass
        assert verdict.witness is None
        # The only cycle is the 2-cycle with mean 0.23106 / 2.
        assert_allclose(verdict.min_cycle_mean, 0.11553, atol=1e-12)

    def test_violation_fixture_witness(self, violation_fixture):
        verdict = check_cyclic_monotonicity(violation_fixture)
        assert verdict.status == "violation"
        assert verdict.witness.indices == (1, 2)
        assert_allclose(verdict.witness.cycle_sum, -0.6, atol=1e-15)

    def test_single_observation_passes(self):
        d = make_dataset("m", [[1, 2]], [[0.4, 0.6]])
        verdict = check_cyclic_monotonicity(d)
        assert verdict.is_pass
        assert verdict.min_cycle_mean is None

    def test_witnesses_recompute_below_tolerance(self):
        rng = np.random.default_rng(11)
        found = 0
        for _ in range(60):
            d = random_probs_dataset(rng, int(rng.integers(2, 8)), int(rng.integers(2, 5)))
            verdict = check_cyclic_monotonicity(d, 1e-9)
            if verdict.status == "violation":
                found += 1
                w = verdict.witness
                recomputed = cycle_sum(d, list(w.indices))
                assert recomputed < -1e-9
                assert abs(recomputed - w.cycle_sum) <= 1e-12
        assert found > 10  # the adversarial generator must exercise the path

    def test_translation_invariance(self):
        rng = np.random.default_rng(12)
        for _ in range(25):
            d = mixed_pool_dataset(rng, int(rng.integers(2, 7)), int(rng.integers(2, 5)))
            shift = float(rng.uniform(-50, 50))
            shifted = make_dataset(
                "m",
                (d.values_matrix + shift).tolist(),
                d.probs_matrix.tolist(),
            )
            a = check_cyclic_monotonicity(d)
            b = check_cyclic_monotonicity(shifted)
            assert a.status == b.status
            if a.witness is not None:
                assert abs(cycle_sum(shifted, list(a.witness.indices)) - a.witness.cycle_sum) <= 1e-9


class TestBruteForce:
    def test_fixture_minima(self, softmax_fixture, violation_fixture):
        ok = brute_force_cm(softmax_fixture)
        assert ok.is_pass
        assert_allclose(ok.min_cycle_sum, 0.23106, atol=1e-15)
        bad = brute_force_cm(violation_fixture)
        assert bad.status == "violation"
        assert_allclose(bad.min_cycle_sum, -0.6, atol=1e-15)

    def test_size_guard(self):
        rng = np.random.default_rng(0)
        d = random_probs_dataset(rng, 9, 2)
        with pytest.raises(TooLargeError):
            brute_force_cm(d)

    def test_oracle_agreement_small_n(self):
        rng = np.random.default_rng(13)
        statuses = set()
        for _ in range(150):
            d = mixed_pool_dataset(rng, int(rng.integers(1, 7)), int(rng.integers(2, 5)))
            fast = check_cyclic_monotonicity(d, 1e-9)
            slow = brute_force_cm(d, 1e-9)
            assert fast.status == slow.status
            statuses.add(fast.status)
            if fast.status == "violation":
                assert abs(cycle_sum(d, list(fast.witness.indices)) - fast.witness.cycle_sum) <= 1e-12
                assert abs(cycle_sum(d, list(slow.witness.indices)) - slow.witness.cycle_sum) <= 1e-12
        assert statuses == {"pass", "violation"}

    def test_pum_generated_data_pass(self):
        rng = np.random.default_rng(14)
        for kind in ("negentropy", "quadratic"):
            for _ in range(10):
                d = pum_dataset(kind, rng, int(rng.integers(2, 7)), int(rng.integers(2, 5)))
                verdict = brute_force_cm(d, 1e-9)
                assert verdict.is_pass
                assert verdict.min_cycle_sum >= -1e-9

    def test_softmax_model_data_is_cyclically_monotone(self):
        # Normalized exponential strengths are the gradient of log-sum-exp,
        # so data simulated from that family must always pass.
        rng = np.random.default_rng(16)
        for _ in range(15):
            d = luce_dataset(rng, int(rng.integers(2, 7)), int(rng.integers(2, 5)))
            verdict = brute_force_cm(d, 1e-9)
            assert verdict.is_pass
            assert verdict.min_cycle_sum >= -1e-9


class TestTwoPoint:
    def test_softmax_fixture_clean(self, softmax_fixture):
        assert check_two_point_monotonicity(softmax_fixture) == []

    def test_flagged_pair(self):
        # (0.4 - 0.5) * (1 - 0) = -0.1 on the coordinate that moved.
        d = make_dataset("m", [[0, 0], [1, 0]], [[0.5, 0.5], [0.4, 0.6]])
        violations = check_two_point_monotonicity(d)
        assert len(violations) == 1
        v = violations[0]
        assert (v.first, v.second, v.alternative) == (1, 2, "a1")
        assert_allclose(v.product, -0.1, atol=1e-15)

    def test_vacuous_when_pairs_differ_everywhere(self):
        d = make_dataset("m", [[0, 0], [1, 1]], [[0.5, 0.5], [0.4, 0.6]])
        assert check_two_point_monotonicity(d) == []

    def test_cm_implies_two_point(self):
        rng = np.random.default_rng(15)
        for _ in range(20):
            base = rng.uniform(-2, 2, 3)
            rows = [base.tolist()]
            for step in (0.5, 1.0, 1.5):
                moved = base.copy()
                moved[1] += step
                rows.append(moved.tolist())
            d = make_dataset(
                "m",
                rows,
                [np.exp(r) / np.sum(np.exp(r)) for r in np.array(rows)],
            )
            assert check_cyclic_monotonicity(d, 1e-9).is_pass
            assert check_two_point_monotonicity(d, 1e-9) == []


class TestWeakStochasticTransitivity:
    def test_flagged_triple(self):
        binary = {
            ("x", "y"): 0.6,
            ("y", "z"): 0.55,
            ("x", "z"): 0.4,
        }
        assert ("x", "y", "z") in check_weak_stochastic_transitivity(binary)

    def test_consistent_triple(self):
        binary = {
            ("x", "y"): 0.6,
            ("y", "z"): 0.55,
            ("x", "z"): 0.7,
        }
        assert check_weak_stochastic_transitivity(binary) == []

    def test_half_boundary_is_satisfied(self):
        binary = {
            ("x", "y"): 0.5,
            ("y", "z"): 0.5,
            ("x", "z"): 0.5,
        }
        assert check_weak_stochastic_transitivity(binary) == []

    def test_inconsistent_pair(self):
        with pytest.raises(InconsistentPairError):
            check_weak_stochastic_transitivity({("x", "y"): 0.6, ("y", "x"): 0.6})

    def test_self_pair_rejected(self):
        with pytest.raises(InconsistentPairError):
            check_weak_stochastic_transitivity({("x", "x"): 0.5})


def test_wst_one_sided_storage_implies_complement():
    # Only one orientation stored per pair; complements are derived.
    binary = {("x", "y"): 0.6, ("y", "z"): 0.55, ("z", "x"): 0.6}
    assert ("x", "y", "z") in check_weak_stochastic_transitivity(binary)


def test_two_point_treats_sub_tolerance_drift_as_equal():
    # The off-coordinate differs by 1e-13, below the exact-equality slack,
    # so the pair still qualifies for the single-coordinate scan.
    d = make_dataset(
        "m",
        [[0.0, 0.0], [1.0, 1e-13]],
        [[0.5, 0.5], [0.4, 0.6]],
    )
    violations = check_two_point_monotonicity(d)
    assert [(v.first, v.second) for v in violations] == [(1, 2)]


def test_witness_reversal_need_not_be_negative():
    # Frozen fixture: the reported orientation certifies the violation, but
    # walking the same cycle backwards gives a positive sum.
    d = make_dataset(
        "m",
        [
            [3.864108, 1.869227],
            [-1.156596, -1.891532],
            [3.266338, 3.639459],
            [0.626552, -2.726422],
        ],
        [
            [0.667097, 0.332903],
            [0.161039, 0.838961],
            [0.498542, 0.501458],
            [0.406096, 0.593904],
        ],
    )
    verdict = check_cyclic_monotonicity(d, 1e-9)
    assert verdict.status == "violation"
    assert len(verdict.witness.indices) >= 3
    forward = cycle_sum(d, list(verdict.witness.indices))
    backward = cycle_sum(d, list(reversed(verdict.witness.indices)))
    assert forward < -1e-9
    assert backward > 0
