"""Tests for the E-step, M-steps and multi-start EM fitting."""

from itertools import product

import numpy as np
import pytest

from src.data import RawResponses, aggregate, from_patterns
from src.estimation import (
    FisherScoring,
    StartPolicy,
    StartPoint,
    conditional_probs,
    e_step,
    expected_complete_loglik,
    fit,
    log_likelihood,
    m_step_fisher,
    m_step_pi,
    posterior_memberships,
    run_em,
)
from src.models import ModelSpec, ParameterSet, deterministic_start, random_start
from src.utils import SpecValidationError
from tests.conftest import graded_truth, simulate_matrix

VARIANTS = list(product(["global", "local"], ["constrained", "free"], ["free", "rs"]))


def brute_force(params, spec, data):
    """Manifest probabilities and posteriors by enumerating classes per pattern."""
    probs = conditional_probs(params, spec).phi
    joint = np.ones((data.m, spec.k)) * params.pi
    for i in range(data.m):
        for j in range(spec.r):
            if not data.missing[i, j]:
                joint[i] *= probs[j, data.patterns[i, j], :]
    px = joint.sum(axis=1)
    return px, joint / px[:, None]


def instance(link, disc, difl, seed, k=2, r=4, l=3, n=300, missing_rate=0.0, multi=None):
    spec = ModelSpec.build(k, link, (l,) * r, disc, difl, multi)
    data = simulate_matrix(spec, graded_truth(spec), n=n, seed=seed, missing_rate=missing_rate)
    return spec, data


def random_instance(case, link, disc, difl, max_k=4, max_r=10, max_l=4, missing_rate=0.1):
    """Spec and data with k, r, l, n and the item partition drawn from the case number."""
    rng = np.random.default_rng(7000 + case)
    k = int(rng.integers(2, max_k + 1))
    r = int(rng.integers(2, max_r + 1))
    l = int(rng.integers(2, max_l + 1))
    if difl == "rs":
        cats = (l,) * r
    else:
        cats = tuple(int(c) for c in rng.integers(2, l + 1, size=r))
    s = int(rng.integers(1, min(3, r) + 1))
    multi = [sorted(int(j) for j in g) for g in np.array_split(rng.permutation(r), s)]
    n = int(rng.integers(100, 501))
    spec = ModelSpec.build(k, link, cats, disc, difl, multi)
    data = simulate_matrix(spec, graded_truth(spec), n=n, seed=case, missing_rate=missing_rate)
    return spec, data


class TestConditionalProbs:
    @pytest.mark.parametrize("link,disc,difl", VARIANTS)
    def test_columns_are_distributions(self, link, disc, difl):
        spec, data = instance(link, disc, difl, seed=1)
        phi = conditional_probs(random_start(spec, data, seed=4), spec).phi
        np.testing.assert_allclose(phi.sum(axis=1), 1.0, atol=1e-10)
        assert np.all((phi > 0) & (phi < 1))


class TestLogLikelihood:
    def test_single_binary_item(self):
        spec = ModelSpec.build(1, "none", (2,))
        data = aggregate(RawResponses(np.array([[0], [1], [1], [0], [1]])))
        params = ParameterSet(pi=np.ones(1), probs=np.full((1, 2, 1), 0.5))
        assert log_likelihood(params, spec, data) == pytest.approx(5 * np.log(0.5), abs=1e-12)

    def test_aggregation_invariance(self, grm_spec, grm_data):
        params = random_start(grm_spec, grm_data, seed=2)
        raw = grm_data.expand()
        unit_level = from_patterns(raw.rows, np.ones(raw.n), cats=grm_data.cats)
        assert log_likelihood(params, grm_spec, unit_level) == pytest.approx(
            log_likelihood(params, grm_spec, grm_data), rel=1e-12
        )

    @pytest.mark.parametrize("link", ["global", "local"])
    def test_matches_enumeration(self, link):
        for seed in range(5):
            spec, data = instance(link, "free", "free", seed=seed, k=2, r=3, l=2, n=200)
            params = random_start(spec, data, seed=seed + 10)
            px, _ = brute_force(params, spec, data)
            expected = float(data.freq @ np.log(px))
            assert log_likelihood(params, spec, data) == pytest.approx(expected, rel=1e-12)

    def test_enumeration_with_missing(self):
        spec, data = instance("local", "constrained", "free", seed=3, k=2, r=3, l=3, n=200, missing_rate=0.2)
        params = random_start(spec, data, seed=1)
        px, _ = brute_force(params, spec, data)
        assert log_likelihood(params, spec, data) == pytest.approx(float(data.freq @ np.log(px)), rel=1e-12)


class TestEStep:
    def test_single_class(self, grm_data):
        spec = ModelSpec.build(1, "global", grm_data.cats)
        counts = e_step(deterministic_start(spec, grm_data), spec, grm_data)
        np.testing.assert_allclose(counts.m_hat[:, 0], grm_data.freq)

    def test_symmetric_split(self):
        spec = ModelSpec.build(2, "none", (2, 2))
        data = aggregate(RawResponses(np.array([[0, 1], [1, 0]])))
        profile = np.array([[0.3, 0.6], [0.7, 0.4]])
        probs = np.stack([profile.T, profile.T], axis=2)
        params = ParameterSet(pi=np.array([0.5, 0.5]), probs=probs)
        counts = e_step(params, spec, data)
        np.testing.assert_allclose(counts.m_hat, [[0.5, 0.5], [0.5, 0.5]])

    @pytest.mark.parametrize("link", ["global", "local"])
    def test_matches_bayes_rule(self, link):
        spec, data = instance(link, "free", "free", seed=5, k=2, r=3, l=3, n=250)
        params = random_start(spec, data, seed=3)
        _, post = brute_force(params, spec, data)
        counts = e_step(params, spec, data)
        np.testing.assert_allclose(counts.posterior, post, rtol=1e-12, atol=1e-12)
        np.testing.assert_allclose(counts.m_hat.sum(axis=1), data.freq, rtol=1e-12)
        assert counts.m_c.sum() == pytest.approx(data.n, rel=1e-12)

    def test_missing_items_reduce_item_totals(self):
        spec, data = instance("global", "constrained", "free", seed=6, missing_rate=0.2)
        counts = e_step(random_start(spec, data, seed=1), spec, data)
        for j in range(spec.r):
            observed = data.freq[data.observed[:, j]].sum()
            assert counts.n_cj[:, j].sum() == pytest.approx(observed, rel=1e-12)
            assert counts.m_cj[j].sum() == pytest.approx(observed, rel=1e-12)


class TestMStepPi:
    def test_proportional_to_class_totals(self, grm_spec, grm_data):
        counts = e_step(random_start(grm_spec, grm_data, seed=1), grm_spec, grm_data)
        np.testing.assert_allclose(m_step_pi(counts), counts.m_c / grm_data.n)

    def test_uniform(self):
        spec = ModelSpec.build(2, "none", (2, 2))
        data = aggregate(RawResponses(np.array([[0, 1], [1, 0]])))
        probs = np.stack([np.full((2, 2), 0.5)] * 2, axis=2)
        counts = e_step(ParameterSet(pi=np.array([0.5, 0.5]), probs=probs), spec, data)
        np.testing.assert_allclose(m_step_pi(counts), [0.5, 0.5])


class TestFisherScoring:
    @pytest.mark.parametrize("case", range(50))
    def test_scores_match_finite_differences(self, case):
        link = ("global", "local")[case % 2]
        difl = ("free", "rs")[(case // 2) % 2]
        spec, data = random_instance(case, link, "free", difl, max_k=3, max_r=6)
        params = random_start(spec, data, seed=case + 20)
        counts = e_step(params, spec, data)
        scorer = FisherScoring(spec)
        packed = scorer.layout.pack(params)
        gamma = scorer.layout.gamma_full(packed.gamma_free)
        h = 1e-5

        s2, F2 = scorer.phi_scores(packed.phi, gamma, counts)
        fd = np.zeros_like(s2)
        for p in range(s2.size):
            e = np.zeros_like(s2)
            e[p] = h
            fd[p] = (scorer.objective(packed.phi + e, gamma, counts)
                     - scorer.objective(packed.phi - e, gamma, counts)) / (2 * h)
        np.testing.assert_allclose(s2, fd, rtol=1e-5, atol=1e-5 * max(1.0, np.abs(s2).max()))
        np.testing.assert_allclose(F2, F2.T, atol=1e-8)

        s, f = scorer.gamma_scores(packed.phi, gamma, counts)
        assert np.all(f >= 0)
        for j in np.flatnonzero(scorer.layout.gamma_index >= 0):
            up, down = gamma.copy(), gamma.copy()
            up[j] += h
            down[j] -= h
            fd_j = (scorer.objective(packed.phi, up, counts) - scorer.objective(packed.phi, down, counts)) / (2 * h)
            assert s[j] == pytest.approx(fd_j, rel=1e-5, abs=1e-5 * max(1.0, abs(s[j])))

    def test_objective_matches_expected_complete_loglik(self, grm_spec, grm_data):
        params = random_start(grm_spec, grm_data, seed=8)
        counts = e_step(params, grm_spec, grm_data)
        scorer = FisherScoring(grm_spec)
        packed = scorer.layout.pack(params)
        value = scorer.objective(packed.phi, scorer.layout.gamma_full(packed.gamma_free), counts)
        assert value == pytest.approx(expected_complete_loglik(params, grm_spec, counts), rel=1e-12)

    def test_does_not_decrease_objective(self):
        for link, disc, difl in VARIANTS:
            spec, data = instance(link, disc, difl, seed=2)
            params = random_start(spec, data, seed=9)
            counts = e_step(params, spec, data)
            updated = m_step_fisher(params, spec, counts)
            before = expected_complete_loglik(params, spec, counts)
            assert expected_complete_loglik(updated, spec, counts) >= before - 1e-9 * abs(before)

    def test_fixed_point(self):
        spec, data = instance("local", "constrained", "free", seed=4)
        params = deterministic_start(spec, data)
        counts = e_step(params, spec, data)
        scorer = FisherScoring(spec)
        for _ in range(100):
            params = m_step_fisher(params, spec, counts, scorer=scorer)
        again = m_step_fisher(params, spec, counts, scorer=scorer)
        np.testing.assert_allclose(again.xi, params.xi, atol=1e-8)
        np.testing.assert_allclose(again.beta, params.beta, atol=1e-8)

    def test_constraints_hold_after_step(self):
        spec, data = instance("global", "free", "rs", seed=7, multi=[[0, 1], [2, 3]])
        params = random_start(spec, data, seed=2)
        updated = m_step_fisher(params, spec, e_step(params, spec, data))
        for ref in spec.reference_items:
            assert updated.beta[ref] == 0.0
            assert updated.gamma[ref] == 1.0
        assert updated.tau[0] == 0.0


class TestEmMonotonicity:
    @pytest.mark.parametrize("case", range(200))
    def test_log_likelihood_never_decreases(self, case):
        link, disc, difl = VARIANTS[case % len(VARIANTS)]
        spec, data = random_instance(case, link, disc, difl)
        start = StartPoint(f"seed={case + 100}", random_start(spec, data, seed=case + 100), case + 100)
        run = run_em(spec, data, start, max_iter=40)
        assert np.all(np.diff(run.trace) >= -1e-10)

    def test_standard_lc_never_decreases(self):
        for seed in range(5):
            _, data = instance("global", "constrained", "free", seed=seed, k=3, r=5, missing_rate=0.1)
            spec = ModelSpec.build(3, "none", data.cats)
            start = StartPoint("random", random_start(spec, data, seed=seed), seed)
            run = run_em(spec, data, start, max_iter=60)
            assert np.all(np.diff(run.trace) >= -1e-10)


class TestFit:
    def test_single_class_lc_is_closed_form(self, grm_data):
        spec = ModelSpec.build(1, "none", grm_data.cats)
        result = fit(spec, grm_data)
        assert result.converged
        assert result.iterations <= 2
        for j in range(spec.r):
            marginal = grm_data.freq @ grm_data.indicators(j) / grm_data.n
            np.testing.assert_allclose(result.phi.phi[j, :, 0], marginal, atol=1e-12)
        assert result.np == 8

    def test_information_criteria(self, grm_spec, grm_data):
        result = fit(grm_spec, grm_data)
        assert result.aic == pytest.approx(-2 * result.lk + 2 * result.np)
        assert result.bic == pytest.approx(-2 * result.lk + np.log(grm_data.n) * result.np)

    def test_posteriors_normalized(self, grm_spec, grm_data):
        result = fit(grm_spec, grm_data)
        np.testing.assert_allclose(result.pp.sum(axis=1), 1.0, atol=1e-10)
        np.testing.assert_allclose(posterior_memberships(result, grm_data), result.pp, atol=1e-12)
        assert result.params.pi.sum() == pytest.approx(1.0, abs=1e-10)

    def test_classes_sorted_by_support_point(self, grm_spec, grm_data):
        result = fit(grm_spec.with_k(3), grm_data, StartPolicy(n_random=2, seed=5))
        assert np.all(np.diff(result.params.xi[:, 0]) >= 0)

    def test_lk_matches_final_parameters(self, grm_spec, grm_data):
        result = fit(grm_spec, grm_data)
        assert result.lk == pytest.approx(log_likelihood(result.params, grm_spec, grm_data), rel=1e-12)

    def test_best_start_wins(self, grm_spec, grm_data):
        result = fit(grm_spec, grm_data, StartPolicy(n_random=3, seed=1))
        assert len(result.starts) == 4
        best = max(row["lk"] for row in result.starts)
        assert result.lk == pytest.approx(best, rel=1e-12)

    def test_single_class_posterior_is_one(self, grm_data):
        spec = ModelSpec.build(1, "global", grm_data.cats)
        result = fit(spec, grm_data)
        np.testing.assert_allclose(result.pp, 1.0)

    def test_argmax_matches_bayes(self, grm_spec, grm_data):
        result = fit(grm_spec, grm_data)
        _, post = brute_force(result.params, grm_spec, grm_data)
        np.testing.assert_array_equal(result.pp.argmax(axis=1), post.argmax(axis=1))

    def test_threads_do_not_change_result(self, grm_spec, grm_data):
        policy = StartPolicy(n_random=3, seed=2)
        one = fit(grm_spec, grm_data, policy, threads=1)
        two = fit(grm_spec, grm_data, policy, threads=3)
        assert one.lk == two.lk
        np.testing.assert_array_equal(one.params.xi, two.params.xi)

    def test_category_mismatch(self, grm_data):
        with pytest.raises(SpecValidationError):
            fit(ModelSpec.build(2, "global", (3, 3, 3, 4)), grm_data)

    def test_user_start(self, grm_spec, grm_data, grm_truth):
        result = fit(grm_spec, grm_data, StartPolicy.from_mode(2, n_random=0, params=grm_truth))
        assert result.start == "user"

    def test_user_start_needs_params(self):
        with pytest.raises(SpecValidationError):
            StartPolicy.from_mode(2)

    def test_binary_links_agree(self):
        spec = ModelSpec.build(3, "global", (2,) * 6)
        data = simulate_matrix(spec, graded_truth(spec), n=1000, seed=9)
        glob = fit(spec, data, tol=1e-11, max_iter=20000)
        loc = fit(ModelSpec.build(3, "local", (2,) * 6), data, tol=1e-11, max_iter=20000)
        assert glob.lk == pytest.approx(loc.lk, abs=1e-6)

    def test_summary_reports_fields(self, grm_spec, grm_data):
        result = fit(grm_spec, grm_data)
        text = result.summary()
        assert f"{result.lk:.4f}" in text
        assert f"{result.bic:.3f}" in text
        payload = result.to_dict()
        assert payload["lk"] == result.lk and payload["np"] == result.np


class TestGemDepth:
    def test_sweeps_do_not_change_the_maximum(self):
        for seed in range(10):
            spec, data = instance("local", "constrained", "free", seed=seed, n=400)
            one = fit(spec, data, tol=1e-12, max_iter=20000, sweeps=1)
            five = fit(spec, data, tol=1e-12, max_iter=20000, sweeps=5)
            assert one.lk == pytest.approx(five.lk, abs=1e-6)


@pytest.mark.slow
class TestRecovery:
    def test_parameters_recovered(self):
        spec = ModelSpec.build(2, "global", (3,) * 8)
        shift = 0.1 * np.sin(np.arange(8))
        beta = np.column_stack([-0.35 + shift, 0.35 + shift])
        truth = ParameterSet(
            pi=np.array([0.4, 0.6]), xi=np.array([[-1.0], [1.0]]), beta=beta, gamma=np.ones(8)
        ).normalize(spec)
        data = simulate_matrix(spec, truth, n=2000, seed=17)
        result = fit(spec, data, StartPolicy(n_random=10, seed=0))
        np.testing.assert_allclose(result.params.pi, truth.pi, atol=0.05)
        np.testing.assert_allclose(result.params.xi, truth.xi, atol=0.15)
        np.testing.assert_allclose(result.params.beta, truth.beta, atol=0.15)
