import itertools
import math

import numpy as np
import pytest
import torch

from errors import ConfigurationError
from explain.shapley import coalition_values, shap_exact, shap_sampled, shapley_weights
from policy.params import PolicyParams

WEIGHTS = np.array([0.7, -1.3, 2.0])


def linear_policy(obs):
    w = torch.as_tensor(WEIGHTS, dtype=obs.dtype)
    return (obs * w).sum(-1, keepdim=True)


def interaction_policy(obs):
    return torch.stack([obs[:, 0] * obs[:, 1], torch.tanh(obs[:, 2] + obs[:, 0])], dim=-1)


class TestExactShapley:
    def test_constant_policy(self, constant_policy, background):
        result = shap_exact(constant_policy, np.array([0.1, 0.2, 0.3]), background)
        np.testing.assert_array_equal(result.phi, np.zeros(3))
        assert result.baseline == pytest.approx(result.output)

    def test_linear_closed_form(self, background):
        state = np.array([0.4, -0.2, 0.9])
        result = shap_exact(linear_policy, state, background)
        np.testing.assert_allclose(result.phi, WEIGHTS * (state - background.mean(axis=0)), atol=1e-9)

    def test_matches_brute_force_enumeration(self, background):
        state = np.array([0.5, -0.6, 0.3])
        f = lambda x: interaction_policy(torch.as_tensor(x)).numpy().sum(axis=1)

        def value(subset):
            mixed = background.copy()
            mixed[:, list(subset)] = state[list(subset)]
            return f(mixed).mean()

        n = 3
        expected = np.zeros(n)
        for j in range(n):
            others = [k for k in range(n) if k != j]
            for size in range(n):
                for subset in itertools.combinations(others, size):
                    weight = math.factorial(size) * math.factorial(n - size - 1) / math.factorial(n)
                    expected[j] += weight * (value(subset + (j,)) - value(subset))

        result = shap_exact(interaction_policy, state, background)
        np.testing.assert_allclose(result.phi, expected, atol=1e-12)
        assert result.phi_per_action.shape == (2, 3)

    def test_efficiency(self, background):
        params = PolicyParams.initialize(3, 1, hidden_size=16, seed=5)
        result = shap_exact(params, np.array([0.03, 0.7, 0.0]), background)
        assert abs(result.efficiency_gap) < 1e-6

    @pytest.mark.parametrize("obs_dim, act_dim", [(3, 1), (7, 3), (9, 3)])
    def test_efficiency_on_many_states(self, obs_dim, act_dim):
        """40 states per layout against a 16-row background, up to 512 coalitions each"""
        rng = np.random.default_rng(obs_dim)
        network = PolicyParams.initialize(obs_dim, act_dim, hidden_size=16, seed=obs_dim).to_network()

        def sample(n):
            return np.hstack([
                rng.normal(0.0, 0.05, size=(n, 1)),
                rng.uniform(0.0, 1.0, size=(n, obs_dim - 1 - act_dim)),
                rng.uniform(0.0, 1.0, size=(n, act_dim)),
            ])

        bg = sample(16)
        for state in sample(40):
            result = shap_exact(network, state, bg)
            assert abs(result.efficiency_gap) < 1e-6

    def test_dummy_feature(self, background):
        params = PolicyParams.initialize(3, 1, hidden_size=16, seed=6)
        params.tensors["fc1.weight"][:, 2] = 0.0
        result = shap_exact(params, np.array([0.02, 0.4, 1.0]), background)
        assert result.phi[2] == 0.0

    def test_symmetry(self):
        policy = lambda obs: torch.tanh(obs[:, :1] + obs[:, 1:2]) + 0.3 * obs[:, 2:3]
        column = np.random.default_rng(2).normal(size=(40, 1))
        bg = np.hstack([column, column, np.random.default_rng(3).normal(size=(40, 1))])
        result = shap_exact(policy, np.array([0.5, 0.5, -0.1]), bg)
        assert result.phi[0] == pytest.approx(result.phi[1], abs=1e-9)

    def test_too_many_features(self):
        with pytest.raises(ConfigurationError, match="shap_sampled"):
            shap_exact(lambda x: x[:, :1], np.zeros(13), np.zeros((2, 13)))

    def test_weights_sum_over_coalitions(self):
        n = 5
        w = shapley_weights(n)
        assert sum(math.comb(n - 1, s) * w[s] for s in range(n)) == pytest.approx(1.0)

    def test_waterfall_ends_at_output(self, background):
        result = shap_exact(linear_policy, np.array([0.4, -0.2, 0.9]), background, labels=["PR", "F", "CL1"])
        steps = result.waterfall()
        assert steps[0]["start"] == result.baseline
        assert steps[-1]["end"] == pytest.approx(result.output)
        assert abs(steps[0]["phi"]) >= abs(steps[-1]["phi"])
        assert {s["feature"] for s in steps} == {"PR", "F", "CL1"}


class TestCoalitionValues:
    def test_empty_and_full_coalitions(self, background):
        state = np.array([0.4, -0.2, 0.9])
        values = coalition_values(lambda x: x.sum(axis=1, keepdims=True), state, background, np.array([0, 7]))
        assert values[0, 0] == pytest.approx(background.sum(axis=1).mean())
        assert values[1, 0] == pytest.approx(state.sum())


class TestSampledShapley:
    def test_constant_policy(self, constant_policy, background):
        result = shap_sampled(constant_policy, np.array([0.1, 0.2, 0.3]), background, 100, seed=0)
        np.testing.assert_array_equal(result.phi, np.zeros(3))

    def test_agrees_with_exact(self, background):
        params = PolicyParams.initialize(3, 1, hidden_size=16, seed=8)
        state = np.array([0.05, 0.8, 0.3])
        exact = shap_exact(params, state, background)
        sampled = shap_sampled(params, state, background, 2000, seed=1)
        assert np.all(np.abs(sampled.phi - exact.phi) <= 3 * sampled.stderr + 1e-12)
        assert abs(sampled.efficiency_gap) < 1e-9

    def test_seeded_estimate_is_reproducible(self, background):
        a = shap_sampled(interaction_policy, np.array([0.5, -0.6, 0.3]), background, 300, seed=9)
        b = shap_sampled(interaction_policy, np.array([0.5, -0.6, 0.3]), background, 300, seed=9)
        np.testing.assert_array_equal(a.phi, b.phi)
        np.testing.assert_array_equal(a.stderr, b.stderr)

    def test_standard_error_halves_with_four_times_the_samples(self, background):
        state = np.array([0.5, -0.6, 0.3])
        small = shap_sampled(interaction_policy, state, background, 400, seed=2)
        large = shap_sampled(interaction_policy, state, background, 1600, seed=3)
        ratio = small.stderr / large.stderr
        assert np.all((ratio > 1.4) & (ratio < 2.6))

    def test_minimum_permutations(self, background):
        with pytest.raises(ConfigurationError):
            shap_sampled(linear_policy, np.zeros(3), background, 10)

    def test_record_carries_standard_errors(self, background):
        record = shap_sampled(linear_policy, np.zeros(3), background, 60, seed=0).to_dict()
        assert record["method"] == "permutation"
        assert len(record["stderr"]) == 3
        assert record["n_permutations"] == 60
