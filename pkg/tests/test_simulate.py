"""Tests for response simulation."""

import numpy as np
import pytest

from src.data import aggregate
from src.estimation import conditional_probs
from src.models import ModelSpec, ParameterSet
from src.simulation import SimulationPlan, simulate
from src.utils import SpecValidationError
from tests.conftest import graded_truth


def lc_plan(profile, pi=(1.0,), n=1000, **kwargs) -> SimulationPlan:
    """Plan for a standard LC model; profile[c][j] lists p(X_j = x | c)."""
    probs = np.transpose(np.asarray(profile, dtype=float), (1, 2, 0))
    spec = ModelSpec.build(len(pi), "none", (probs.shape[1],) * probs.shape[0])
    return SimulationPlan(spec=spec, params=ParameterSet(pi=np.asarray(pi), probs=probs), n=n, **kwargs)


class TestSimulate:
    def test_point_mass(self):
        plan = lc_plan([[[0.0, 1.0], [1.0, 0.0], [0.0, 1.0]]], n=250)
        rows = simulate(plan).responses.rows
        assert rows.shape == (250, 3)
        assert (rows == np.array([1, 0, 1])).all()

    def test_same_seed_same_output(self, grm_spec, grm_truth):
        plan = SimulationPlan(spec=grm_spec, params=grm_truth, n=5000, seed=42)
        a, b = simulate(plan, block_size=700), simulate(plan, block_size=700)
        np.testing.assert_array_equal(a.responses.rows, b.responses.rows)
        np.testing.assert_array_equal(a.classes, b.classes)

    def test_threads_do_not_change_output(self, grm_spec, grm_truth):
        plan = SimulationPlan(spec=grm_spec, params=grm_truth, n=5000, seed=42)
        single = simulate(plan, threads=1, block_size=512)
        pooled = simulate(plan, threads=4, block_size=512)
        np.testing.assert_array_equal(single.responses.rows, pooled.responses.rows)

    def test_different_seeds_differ(self, grm_spec, grm_truth):
        a = simulate(SimulationPlan(spec=grm_spec, params=grm_truth, n=2000, seed=1))
        b = simulate(SimulationPlan(spec=grm_spec, params=grm_truth, n=2000, seed=2))
        assert not np.array_equal(a.responses.rows, b.responses.rows)

    def test_block_sizes_cover_n(self, grm_spec, grm_truth):
        plan = SimulationPlan(spec=grm_spec, params=grm_truth, n=1001, seed=3)
        out = simulate(plan, block_size=100)
        assert out.responses.n == 1001
        assert out.classes.shape == (1001,)

    def test_pattern_frequencies(self):
        profile = [[[0.2, 0.8], [0.6, 0.4]]]
        n = 200_000
        data = aggregate(simulate(lc_plan(profile, n=n, seed=5)).responses, cats=(2, 2))
        expected = {
            (0, 0): 0.2 * 0.6, (0, 1): 0.2 * 0.4,
            (1, 0): 0.8 * 0.6, (1, 1): 0.8 * 0.4,
        }
        for pattern, count in zip(data.patterns, data.freq):
            p = expected[tuple(int(v) for v in pattern)]
            assert abs(count / n - p) < 4 * np.sqrt(p * (1 - p) / n)

    def test_category_frequencies_follow_model(self, grm_spec, grm_truth):
        n = 100_000
        out = simulate(SimulationPlan(spec=grm_spec, params=grm_truth, n=n, seed=8))
        probs = conditional_probs(grm_truth, grm_spec)
        for j in range(grm_spec.r):
            marginal = probs.item(j).T @ grm_truth.pi
            observed = np.bincount(out.responses.rows[:, j], minlength=3) / n
            np.testing.assert_allclose(observed, marginal, atol=0.01)

    def test_class_proportions(self):
        profile = [[[0.5, 0.5]], [[0.5, 0.5]]]
        out = simulate(lc_plan(profile, pi=(0.3, 0.7), n=100_000, seed=9))
        assert np.mean(out.classes == 0) == pytest.approx(0.3, abs=0.01)

    def test_missing_rate(self, grm_spec, grm_truth):
        plan = SimulationPlan(spec=grm_spec, params=grm_truth, n=50_000, seed=4, missing_rate=0.2)
        raw = simulate(plan).responses
        assert raw.missing.mean() == pytest.approx(0.2, abs=0.01)
        assert (raw.rows[raw.missing] == plan.missing_code).all()
        assert set(np.unique(raw.rows[~raw.missing])) <= {0, 1, 2}

    def test_truth_payload(self, grm_spec, grm_truth):
        plan = SimulationPlan(spec=grm_spec, params=grm_truth, n=20, seed=0)
        out = simulate(plan)
        truth = out.truth(plan)
        assert truth["n"] == 20
        assert truth["classes"] == (out.classes + 1).tolist()
        assert min(truth["classes"]) >= 1


class TestSimulationPlan:
    def test_rejects_empty(self, grm_spec, grm_truth):
        with pytest.raises(SpecValidationError):
            SimulationPlan(spec=grm_spec, params=grm_truth, n=0)

    @pytest.mark.parametrize("rate", [-0.1, 1.0])
    def test_rejects_missing_rate(self, grm_spec, grm_truth, rate):
        with pytest.raises(SpecValidationError):
            SimulationPlan(spec=grm_spec, params=grm_truth, n=10, missing_rate=rate)

    def test_rejects_class_mismatch(self, grm_spec):
        with pytest.raises(SpecValidationError):
            SimulationPlan(spec=grm_spec, params=graded_truth(grm_spec.with_k(3)), n=10)
