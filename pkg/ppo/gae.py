"""
Generalized advantage estimation
"""
from typing import Sequence, Tuple

import numpy as np


def compute_gae(
    rewards: Sequence[float],
    values: Sequence[float],
    dones: Sequence[float],
    last_value: float,
    gamma: float,
    lam: float,
) -> Tuple[np.ndarray, np.ndarray]:
    """λ-weighted advantages and return targets (advantages + values)

    dones[t] marks that the episode ended after step t, so nothing is
    bootstrapped across it. last_value is V of the state after the final step.
    """
    rewards = np.asarray(rewards, dtype=np.float64)
    values = np.asarray(values, dtype=np.float64)
    dones = np.asarray(dones, dtype=np.float64)
    if not rewards.shape == values.shape == dones.shape:
        raise ValueError(
            f"rewards, values and dones must have equal lengths, got "
            f"{rewards.shape}, {values.shape}, {dones.shape}"
        )
    advantages = np.zeros_like(rewards)
    gae = 0.0
    next_value = float(last_value)
    for t in reversed(range(rewards.size)):
        nonterminal = 1.0 - dones[t]
        delta = rewards[t] + gamma * next_value * nonterminal - values[t]
        gae = delta + gamma * lam * nonterminal * gae
        advantages[t] = gae
        next_value = values[t]
    return advantages, advantages + values
