"""Sampler: truth generation, Gibbs and exact column sampling, reproducibility."""

import numpy as np
import pytest
from scipy.stats import chisquare

from cheatdetect.model import ModelParams, all_pairs, column_probabilities_exact, enumerate_states
from cheatdetect.sampler import (
    EXACT,
    GenerationConfig,
    column_rng,
    exact_sample_column,
    generate_scores,
    generate_truth,
    gibbs_sample_column,
)

from oracles import total_variation


def state_index(columns):
    """Map +-1 columns (I, J) to enumeration-order state indices."""
    bits = (columns > 0).astype(np.int64)
    weights = 2 ** np.arange(bits.shape[0] - 1, -1, -1)
    return weights @ bits


def empirical_state_distribution(columns, n_sites):
    counts = np.bincount(state_index(columns), minlength=2 ** n_sites)
    return counts / counts.sum()


class TestGenerationConfig:
    def test_rejects_bad_dimensions(self):
        with pytest.raises(ValueError):
            GenerationConfig(I=1, J=10, p=0.1)
        with pytest.raises(ValueError):
            GenerationConfig(I=5, J=0, p=0.1)

    def test_rejects_bad_probability(self):
        with pytest.raises(ValueError):
            GenerationConfig(I=5, J=10, p=1.5)

    def test_rejects_bad_variance(self):
        with pytest.raises(ValueError):
            GenerationConfig(I=5, J=10, p=0.1, param_variance=0.0)

    def test_rejects_bad_sweeps(self):
        with pytest.raises(ValueError):
            GenerationConfig(I=5, J=10, p=0.1, mcmc_sweeps=0)

    def test_rejects_unknown_method(self):
        with pytest.raises(ValueError):
            GenerationConfig(I=5, J=10, p=0.1, mcmc_method="metropolis")


class TestGenerateTruth:
    def test_p_zero_gives_empty_support(self):
        truth = generate_truth(GenerationConfig(I=10, J=5, p=0.0, seed=1))
        assert truth.w == {}

    def test_p_one_selects_every_pair(self):
        truth = generate_truth(GenerationConfig(I=10, J=5, p=1.0, seed=1))
        assert set(truth.w) == set(all_pairs(10))
        assert all(v == 1.0 for v in truth.w.values())

    def test_thirty_examinees_have_435_candidate_pairs(self):
        assert len(all_pairs(30)) == 435
        truth = generate_truth(GenerationConfig(I=30, J=5, p=1.0, seed=3))
        assert len(truth.w) == 435

    def test_deterministic_given_seed(self):
        config = GenerationConfig(I=8, J=20, p=0.3, seed=42)
        a = generate_truth(config)
        b = generate_truth(config)
        assert np.array_equal(a.theta, b.theta)
        assert np.array_equal(a.d, b.d)
        assert a.w == b.w

    def test_field_moments_match_config(self):
        config = GenerationConfig(I=2, J=20000, p=0.0, seed=9, param_mean=0.5, param_variance=0.5)
        truth = generate_truth(config)
        assert truth.d.mean() == pytest.approx(0.5, abs=0.02)
        assert truth.d.var() == pytest.approx(0.5, abs=0.02)

    def test_coupling_value_respected(self):
        truth = generate_truth(GenerationConfig(I=6, J=5, p=1.0, coupling_value=2.5, seed=0))
        assert all(v == 2.5 for v in truth.w.values())


class TestGibbsSampling:
    def test_zero_params_site_means_vanish(self):
        params = ModelParams(np.zeros(3), np.zeros(1), {})
        rng = np.random.default_rng(2024)
        draws = np.stack(
            [gibbs_sample_column(params, 0, 5, rng) for _ in range(100_000)], axis=1
        )
        assert np.abs(draws.mean(axis=1)).max() < 0.01

    def test_matches_enumeration_within_tv(self):
        rng = np.random.default_rng(31)
        d_value = 0.7 * rng.standard_normal()
        params = ModelParams(
            0.7 * rng.standard_normal(4),
            np.full(100_000, d_value),
            {p: 0.7 * rng.standard_normal() for p in all_pairs(4)},
        )
        config = GenerationConfig(I=4, J=100_000, p=0.0, seed=77, mcmc_sweeps=50)
        scores = generate_scores(params, config)
        empirical = empirical_state_distribution(scores, 4)
        exact = column_probabilities_exact(params, 0)
        assert total_variation(empirical, exact) < 0.02

    def test_strong_coupling_aligns_pair(self):
        params = ModelParams(np.zeros(2), np.zeros(1), {(0, 1): 5.0})
        rng = np.random.default_rng(5)
        draws = np.stack(
            [gibbs_sample_column(params, 0, 20, rng) for _ in range(20_000)], axis=1
        )
        correlation = (draws[0] * draws[1]).mean()
        assert correlation > 0.99

    def test_rejects_zero_sweeps(self):
        params = ModelParams(np.zeros(2), np.zeros(1), {})
        with pytest.raises(ValueError):
            gibbs_sample_column(params, 0, 0, np.random.default_rng(0))

    def test_single_column_call_matches_batch(self):
        config = GenerationConfig(I=5, J=7, p=0.4, seed=123, mcmc_sweeps=30)
        truth = generate_truth(config)
        scores = generate_scores(truth, config)
        for j in (0, 3, 6):
            column = gibbs_sample_column(truth, j, 30, column_rng(config, j))
            assert np.array_equal(column, scores[:, j])


class TestExactSampling:
    def test_single_free_spin_frequency(self):
        params = ModelParams(np.zeros(1), np.zeros(1), {})
        rng = np.random.default_rng(11)
        draws = np.array([exact_sample_column(params, 0, rng)[0] for _ in range(10_000)])
        assert (draws == 1).mean() == pytest.approx(0.5, abs=0.01)

    def test_uncoupled_sites_factorize(self):
        params = ModelParams(np.array([0.8, -0.4]), np.zeros(1), {})
        rng = np.random.default_rng(12)
        draws = np.stack([exact_sample_column(params, 0, rng) for _ in range(50_000)], axis=1)
        p0 = (draws[0] == 1).mean()
        p1 = (draws[1] == 1).mean()
        joint = ((draws[0] == 1) & (draws[1] == 1)).mean()
        assert p0 == pytest.approx(0.5 * (1 + np.tanh(0.8)), abs=0.01)
        assert p1 == pytest.approx(0.5 * (1 + np.tanh(-0.4)), abs=0.01)
        assert joint == pytest.approx(p0 * p1, abs=0.01)

    def test_goodness_of_fit_against_enumeration(self):
        rng = np.random.default_rng(13)
        params = ModelParams(
            0.7 * rng.standard_normal(4),
            np.zeros(1),
            {p: 0.7 * rng.standard_normal() for p in all_pairs(4)},
        )
        sample_rng = np.random.default_rng(99)
        draws = np.stack(
            [exact_sample_column(params, 0, sample_rng) for _ in range(100_000)], axis=1
        )
        counts = np.bincount(state_index(draws), minlength=16)
        expected = column_probabilities_exact(params, 0) * counts.sum()
        result = chisquare(counts, expected)
        assert result.pvalue > 0.001

    def test_enumeration_guard(self):
        params = ModelParams(np.zeros(21), np.zeros(1), {})
        with pytest.raises(ValueError):
            exact_sample_column(params, 0, np.random.default_rng(0))


class TestGenerateScores:
    def test_saturated_fields_answer_correctly(self):
        config = GenerationConfig(I=3, J=1000, p=0.0, seed=4)
        params = ModelParams(np.full(3, 10.0), np.zeros(1000), {})
        scores = generate_scores(params, config)
        assert (scores == 1).mean() > 0.999

    def test_bit_identical_reproduction(self):
        config = GenerationConfig(I=6, J=300, p=0.2, seed=21)
        truth = generate_truth(config)
        assert np.array_equal(generate_scores(truth, config), generate_scores(truth, config))

    def test_every_entry_is_sign(self):
        config = GenerationConfig(I=5, J=200, p=0.3, seed=8)
        truth = generate_truth(config)
        scores = generate_scores(truth, config)
        assert scores.shape == (5, 200)
        assert np.isin(scores, (-1, 1)).all()

    def test_dimension_mismatch_rejected(self):
        config = GenerationConfig(I=5, J=10, p=0.0, seed=0)
        params = ModelParams(np.zeros(4), np.zeros(10), {})
        with pytest.raises(ValueError):
            generate_scores(params, config)

    def test_columns_are_independent(self):
        config = GenerationConfig(I=4, J=10_000, p=0.5, seed=17, mcmc_sweeps=30)
        truth = generate_truth(config)
        scores = generate_scores(truth, config).astype(float)
        for i in range(4):
            row = scores[i]
            a = row[:-1] - row[:-1].mean()
            b = row[1:] - row[1:].mean()
            correlation = (a * b).mean() / np.sqrt((a * a).mean() * (b * b).mean())
            assert abs(correlation) < 0.05

    def test_exact_method_matches_enumeration(self):
        rng = np.random.default_rng(19)
        theta = 0.7 * rng.standard_normal(4)
        w = {p: 0.7 * rng.standard_normal() for p in all_pairs(4)}
        config = GenerationConfig(I=4, J=100_000, p=0.0, seed=23, mcmc_method=EXACT)
        params = ModelParams(theta, np.full(100_000, 0.3), w)
        scores = generate_scores(params, config)
        empirical = empirical_state_distribution(scores, 4)
        exact = column_probabilities_exact(params, 0)
        assert total_variation(empirical, exact) < 0.02

    def test_chunking_does_not_change_output(self, monkeypatch):
        import cheatdetect.sampler as sampler_module

        config = GenerationConfig(I=5, J=600, p=0.3, seed=33, mcmc_sweeps=10)
        truth = generate_truth(config)
        full = generate_scores(truth, config)
        monkeypatch.setattr(sampler_module, "_CHUNK_COLUMNS", 64)
        assert np.array_equal(generate_scores(truth, config), full)


class TestStateIndexHelper:
    def test_roundtrip_with_enumeration(self):
        states = enumerate_states(4)
        assert np.array_equal(state_index(states.T), np.arange(16))
