import numpy as np
import pytest

from ppo.gae import compute_gae


class TestComputeGae:
    def test_single_terminal_step(self):
        adv, ret = compute_gae([1.5], [0.4], [1.0], last_value=0.0, gamma=0.995, lam=0.97)
        assert adv[0] == pytest.approx(1.1)
        assert ret[0] == pytest.approx(1.5)

    def test_myopic_limit(self):
        rewards, values = np.array([1.0, -2.0, 0.5]), np.array([0.3, 0.1, -0.2])
        adv, _ = compute_gae(rewards, values, np.zeros(3), last_value=5.0, gamma=0.0, lam=0.97)
        np.testing.assert_allclose(adv, rewards - values)

    def test_matches_telescoped_sum(self):
        gamma, lam = 0.995, 0.97
        rewards = np.array([0.2, -0.1, 0.7])
        values = np.array([0.5, 0.4, 0.9])
        last_value = 0.3
        next_values = np.append(values[1:], last_value)
        deltas = rewards + gamma * next_values - values
        expected = [sum((gamma * lam) ** k * deltas[t + k] for k in range(3 - t)) for t in range(3)]
        adv, ret = compute_gae(rewards, values, np.zeros(3), last_value, gamma, lam)
        np.testing.assert_allclose(adv, expected, rtol=1e-12)
        np.testing.assert_allclose(ret, adv + values)

    def test_random_episodes_match_brute_force(self):
        """50-step segments with random episode boundaries inside"""
        rng = np.random.default_rng(0)
        for _ in range(100):
            gamma, lam = rng.uniform(0.9, 1.0), rng.uniform(0.8, 1.0)
            rewards, values = rng.normal(size=50), rng.normal(size=50)
            dones = (rng.uniform(size=50) < 0.1).astype(float)
            last_value = rng.normal()

            next_values = np.append(values[1:], last_value) * (1.0 - dones)
            deltas = rewards + gamma * next_values - values
            expected = np.zeros(50)
            for t in range(50):
                for k in range(50 - t):
                    expected[t] += (gamma * lam) ** k * deltas[t + k]
                    if dones[t + k]:
                        break

            adv, ret = compute_gae(rewards, values, dones, last_value, gamma, lam)
            np.testing.assert_allclose(adv, expected, rtol=1e-12, atol=1e-12)
            np.testing.assert_allclose(ret, adv + values, rtol=1e-12, atol=1e-12)

    def test_lambda_one_is_monte_carlo_return_minus_value(self):
        rng = np.random.default_rng(1)
        gamma = 0.995
        for _ in range(20):
            rewards, values = rng.normal(size=50), rng.normal(size=50)
            dones = np.zeros(50)
            dones[-1] = 1.0
            discounted = np.array([sum(gamma ** k * rewards[t + k] for k in range(50 - t)) for t in range(50)])
            adv, ret = compute_gae(rewards, values, dones, last_value=rng.normal(), gamma=gamma, lam=1.0)
            np.testing.assert_allclose(adv, discounted - values, rtol=1e-12, atol=1e-11)
            np.testing.assert_allclose(ret, discounted, rtol=1e-12, atol=1e-11)

    def test_no_bootstrap_across_episode_boundary(self):
        adv, _ = compute_gae([1.0, 1.0], [0.0, 0.0], [1.0, 0.0], last_value=10.0, gamma=0.9, lam=1.0)
        assert adv[0] == pytest.approx(1.0)
        assert adv[1] == pytest.approx(1.0 + 0.9 * 10.0)

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            compute_gae([1.0, 2.0], [0.0], [0.0, 0.0], 0.0, 0.9, 0.9)
