"""
Rollout workers and the chunked batch used for truncated backpropagation through time
"""
import logging
from dataclasses import dataclass, field
from typing import List, Sequence

import numpy as np
import torch

from environment.compressed_air_env import CompressedAirEnv
from environment.demand import DemandProfile
from environment.dynamics import PRESSURE_OUT_OF_BAND
from environment.reward import underpressure_penalty
from environment.scenarios import Scenario
from errors import NumericalError
from policy.network import DTYPE, RecurrentState, squash
from policy.params import PolicyParams
from ppo.config import TrainConfig
from ppo.gae import compute_gae

logger = logging.getLogger("Rollout")

NUMERICAL_FAILURE = "numerical_failure"


@dataclass
class WorkerRollout:
    """One worker's contiguous trajectory segment"""

    obs: np.ndarray
    raw_actions: np.ndarray
    log_probs: np.ndarray
    means: np.ndarray
    rewards: np.ndarray
    values: np.ndarray
    dones: np.ndarray
    episode_starts: np.ndarray
    hidden: np.ndarray
    cell: np.ndarray
    last_value: float
    step_rewards: np.ndarray
    episode_returns: List[float] = field(default_factory=list)
    divergences: int = 0


class RolloutWorker:
    """Owns one environment; acts with a read-only parameter snapshot per iteration

    Environment, recurrent state and the sampling generator persist across
    iterations so consecutive segments continue the same episodes.
    """

    def __init__(self, index: int, scenario: Scenario, profile: DemandProfile, seed: int):
        self.index = index
        self.scenario = scenario
        self.env = CompressedAirEnv(scenario, profile, random_start=True)
        self.obs, _ = self.env.reset(seed=seed)
        self.generator = torch.Generator().manual_seed(seed)
        self.hidden = None
        self.cell = None
        self.episode_start = True
        self.episode_return = 0.0
        # an empty tank is scored as the worst underpressure the reward can express
        self.failure_reward = -underpressure_penalty(0.0, scenario.system.p_min, scenario.reward.alpha_underpressure)

    def collect(self, params: PolicyParams, n_steps: int, gamma: float) -> WorkerRollout:
        network = params.to_network()
        network.eval()
        h = params.hidden_size
        if self.hidden is None:
            zero = network.zero_state(1)
            self.hidden, self.cell = zero.hidden, zero.cell

        f, x = params.obs_dim, params.act_dim
        buf = {
            "obs": np.zeros((n_steps, f)), "raw_actions": np.zeros((n_steps, x)),
            "means": np.zeros((n_steps, x)), "log_probs": np.zeros(n_steps),
            "rewards": np.zeros(n_steps), "step_rewards": np.zeros(n_steps),
            "values": np.zeros(n_steps), "dones": np.zeros(n_steps),
            "episode_starts": np.zeros(n_steps), "hidden": np.zeros((n_steps, h)),
            "cell": np.zeros((n_steps, h)),
        }
        episode_returns: List[float] = []
        divergences = 0

        with torch.no_grad():
            for t in range(n_steps):
                obs_t = torch.as_tensor(self.obs, dtype=DTYPE).unsqueeze(0)
                buf["obs"][t] = self.obs
                buf["hidden"][t] = self.hidden[0].numpy()
                buf["cell"][t] = self.cell[0].numpy()
                buf["episode_starts"][t] = float(self.episode_start)

                out = network(obs_t, RecurrentState(self.hidden, self.cell))
                std = out.log_std.exp()
                noise = torch.randn(out.raw_mean.shape, generator=self.generator, dtype=DTYPE)
                raw = out.raw_mean + std * noise
                log_prob = network.distribution(out.raw_mean).log_prob(raw).sum(-1)

                try:
                    next_obs, reward, terminated, truncated, info = self.env.step(squash(raw)[0].numpy())
                except NumericalError as e:
                    logger.warning(f"⚠️  worker {self.index}: {e}")
                    next_obs, reward, terminated, truncated = self.obs, self.failure_reward, True, False
                    info = {"reason": NUMERICAL_FAILURE}
                self.episode_return += reward

                learn_reward = reward
                if truncated and not terminated:
                    next_t = torch.as_tensor(next_obs, dtype=DTYPE).unsqueeze(0)
                    learn_reward += gamma * float(network(next_t, out.recurrent).value[0])

                buf["raw_actions"][t] = raw[0].numpy()
                buf["means"][t] = out.raw_mean[0].numpy()
                buf["log_probs"][t] = float(log_prob[0])
                buf["values"][t] = float(out.value[0])
                buf["rewards"][t] = learn_reward
                buf["step_rewards"][t] = reward
                done = terminated or truncated
                buf["dones"][t] = float(done)

                if done:
                    if info["reason"] in (PRESSURE_OUT_OF_BAND, NUMERICAL_FAILURE):
                        divergences += 1
                        logger.warning(f"⚠️  worker {self.index}: episode diverged, resetting")
                    episode_returns.append(self.episode_return)
                    self.episode_return = 0.0
                    self.obs, _ = self.env.reset()
                    zero = network.zero_state(1)
                    self.hidden, self.cell = zero.hidden, zero.cell
                    self.episode_start = True
                else:
                    self.obs = next_obs
                    self.hidden, self.cell = out.recurrent.hidden, out.recurrent.cell
                    self.episode_start = False

            obs_t = torch.as_tensor(self.obs, dtype=DTYPE).unsqueeze(0)
            last_value = float(network(obs_t, RecurrentState(self.hidden, self.cell)).value[0])

        return WorkerRollout(last_value=last_value, episode_returns=episode_returns,
                             divergences=divergences, **buf)


@dataclass
class RolloutBatch:
    """Sequences of length T from all workers, shaped [N_chunks, T, ...]

    mask is 0 on padding; hidden0/cell0 are the recurrent snapshots at each
    chunk start; advantages are normalized over the valid entries.
    """

    obs: torch.Tensor
    raw_actions: torch.Tensor
    old_log_probs: torch.Tensor
    old_means: torch.Tensor
    old_log_std: torch.Tensor
    rewards: torch.Tensor
    values: torch.Tensor
    dones: torch.Tensor
    episode_starts: torch.Tensor
    hidden0: torch.Tensor
    cell0: torch.Tensor
    advantages: torch.Tensor
    returns: torch.Tensor
    mask: torch.Tensor

    @property
    def n_chunks(self) -> int:
        return int(self.obs.shape[0])

    @property
    def n_steps(self) -> int:
        return int(self.mask.sum().item())


def _chunk(array: np.ndarray, seq_len: int) -> np.ndarray:
    n = array.shape[0]
    pad = (-n) % seq_len
    if pad:
        array = np.concatenate([array, np.zeros((pad,) + array.shape[1:])])
    return array.reshape((-1, seq_len) + array.shape[1:])


def build_batch(rollouts: Sequence[WorkerRollout], old_log_std: torch.Tensor, config: TrainConfig) -> RolloutBatch:
    """GAE per worker segment, then split into fixed-length chunks in worker order"""
    seq_len = config.sequence_length
    parts = {k: [] for k in (
        "obs", "raw_actions", "log_probs", "means", "rewards", "values", "dones",
        "episode_starts", "advantages", "returns", "mask", "hidden0", "cell0",
    )}
    for r in rollouts:
        advantages, returns = compute_gae(r.rewards, r.values, r.dones, r.last_value,
                                          config.gamma, config.gae_lambda)
        n = r.rewards.size
        for key, values in (
            ("obs", r.obs), ("raw_actions", r.raw_actions), ("log_probs", r.log_probs),
            ("means", r.means), ("rewards", r.rewards), ("values", r.values),
            ("dones", r.dones), ("episode_starts", r.episode_starts),
            ("advantages", advantages), ("returns", returns), ("mask", np.ones(n)),
        ):
            parts[key].append(_chunk(values, seq_len))
        parts["hidden0"].append(r.hidden[::seq_len])
        parts["cell0"].append(r.cell[::seq_len])

    data = {k: torch.as_tensor(np.concatenate(v), dtype=DTYPE) for k, v in parts.items()}
    mask = data["mask"]
    valid = data["advantages"][mask > 0]
    data["advantages"] = (data["advantages"] - valid.mean()) / (valid.std() + 1e-8) * mask
    return RolloutBatch(
        obs=data["obs"], raw_actions=data["raw_actions"], old_log_probs=data["log_probs"],
        old_means=data["means"], old_log_std=old_log_std.detach().clone(),
        rewards=data["rewards"], values=data["values"], dones=data["dones"],
        episode_starts=data["episode_starts"], hidden0=data["hidden0"], cell0=data["cell0"],
        advantages=data["advantages"], returns=data["returns"], mask=mask,
    )
