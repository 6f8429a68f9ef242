"""
PPO training loop: parallel rollouts, epoch updates, checkpoints, early stopping
"""
import copy
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Union

import numpy as np
import pandas as pd
import torch

from environment.scenarios import Scenario
from policy.params import PolicyParams, build_network, count_parameters, save_params
from ppo.config import TrainConfig
from ppo.rollout import RolloutWorker, WorkerRollout, build_batch
from ppo.update import ppo_update

logger = logging.getLogger("PPO")

CURVE_COLUMNS = ["iteration", "mean_reward", "policy_loss", "value_loss", "kl", "clip_fraction"]
CURVE_NAME = "learning_curve.csv"


@dataclass
class TrainResult:
    params: PolicyParams
    curve: pd.DataFrame
    checkpoints: Dict[str, Path] = field(default_factory=dict)
    stopped_early: bool = False
    best_reward: float = -math.inf


def checkpoint_name(iteration: int) -> str:
    return f"checkpoint_iter{iteration:04d}.pt"


def should_stop_early(rewards: List[float], window: int, patience: int, min_improvement: float) -> bool:
    """True when the windowed mean reward has not improved by min_improvement
    (relative) against its value `patience` iterations ago"""
    if len(rewards) < window + patience:
        return False
    series = pd.Series(rewards).rolling(window).mean()
    now, then = series.iloc[-1], series.iloc[-1 - patience]
    return bool(now - then < min_improvement * abs(then))


class PPOTrainer:
    """The optimizer owns the network; workers only see published snapshots"""

    def __init__(self, scenario: Scenario, config: Optional[TrainConfig] = None, seed: int = 0,
                 out_dir: Optional[Union[str, Path]] = None):
        self.scenario = scenario
        self.config = config or scenario.train
        self.seed = seed
        self.out_dir = Path(out_dir) if out_dir is not None else None
        self.environment_hash = scenario.environment_hash()

        self.network = build_network(
            scenario.obs_dim, scenario.act_dim, self.config.hidden_size, self.config.log_std_init, seed
        )
        self.optimizer = torch.optim.Adam(self.network.parameters(), lr=self.config.learning_rate)
        self.generator = torch.Generator().manual_seed(seed)
        self.kl_coeff = self.config.kl_coeff

        base_seed = scenario.demand.seed
        self.workers = [
            RolloutWorker(i, scenario, scenario.build_demand(seed=base_seed + i), seed=seed * 1000 + i)
            for i in range(self.config.rollout_workers)
        ]
        logger.info(
            f"🏭 {scenario.name}: {len(self.workers)} workers × {self.config.steps_per_worker} steps, "
            f"obs {scenario.obs_dim} → act {scenario.act_dim}, "
            f"{count_parameters(PolicyParams.from_network(self.network))} parameters"
        )

    def _collect(self, params: PolicyParams) -> List[WorkerRollout]:
        n = self.config.steps_per_worker
        gamma = self.config.gamma
        if len(self.workers) == 1:
            return [self.workers[0].collect(params, n, gamma)]
        with ThreadPoolExecutor(max_workers=len(self.workers)) as pool:
            futures = [pool.submit(w.collect, params, n, gamma) for w in self.workers]
            return [f.result() for f in futures]

    def _adapt_kl(self, kl: float) -> None:
        target = self.config.kl_target
        if target is None:
            return
        if kl > 2.0 * target:
            self.kl_coeff *= 2.0
        elif kl < 0.5 * target:
            self.kl_coeff *= 0.5

    def _save(self, name: str, iteration: int, reward: float) -> Path:
        return save_params(
            PolicyParams.from_network(self.network),
            self.out_dir / name,
            self.environment_hash,
            metadata={"iteration": iteration, "mean_reward": reward, "seed": self.seed,
                      "scenario": self.scenario.name},
        )

    def train(self) -> TrainResult:
        config = self.config
        records: List[Dict[str, float]] = []
        rewards: List[float] = []
        checkpoints: Dict[str, Path] = {}
        best = -math.inf
        stopped_early = False

        for iteration in range(1, config.max_iterations + 1):
            params = PolicyParams.from_network(self.network)
            rollouts = self._collect(params)
            batch = build_batch(rollouts, params.tensors["log_std"], config)

            saved_params = copy.deepcopy(self.network.state_dict())
            saved_optim = copy.deepcopy(self.optimizer.state_dict())
            epoch_metrics = []
            for _ in range(config.epochs_per_iteration):
                metrics = ppo_update(self.network, self.optimizer, batch, config, self.generator, self.kl_coeff)
                if metrics["aborted"]:
                    self.network.load_state_dict(saved_params)
                    self.optimizer.load_state_dict(saved_optim)
                    logger.warning(f"⚠️  iteration {iteration}: update aborted, keeping previous parameters")
                    epoch_metrics = []
                    break
                epoch_metrics.append(metrics)

            returns = [r for w in rollouts for r in w.episode_returns]
            if returns:
                mean_reward = float(np.mean(returns))
            else:
                # no episode finished this iteration: scale the mean step reward to an episode
                step_rewards = np.concatenate([w.step_rewards for w in rollouts])
                mean_reward = float(step_rewards.mean() * self.scenario.episode_length)

            summary = {k: float(np.mean([m[k] for m in epoch_metrics])) if epoch_metrics else float("nan")
                       for k in ("policy_loss", "value_loss", "kl", "clip_fraction")}
            if epoch_metrics:
                self._adapt_kl(summary["kl"])
            records.append({"iteration": iteration, "mean_reward": mean_reward, **summary})
            rewards.append(mean_reward)
            logger.info(
                f"iter {iteration:4d}: reward {mean_reward:10.3f}  kl {summary['kl']:.5f}  "
                f"value_loss {summary['value_loss']:.4f}  clip {summary['clip_fraction']:.3f}"
            )

            if self.out_dir is not None:
                if iteration in config.checkpoint_iterations:
                    checkpoints[checkpoint_name(iteration)] = self._save(checkpoint_name(iteration), iteration, mean_reward)
                if mean_reward > best:
                    checkpoints["best.pt"] = self._save("best.pt", iteration, mean_reward)
            best = max(best, mean_reward)

            if should_stop_early(rewards, config.early_stop_window, config.early_stop_patience,
                                 config.early_stop_min_improvement):
                logger.info(f"🛑 early stop at iteration {iteration}: reward has plateaued")
                stopped_early = True
                break

        curve = pd.DataFrame(records, columns=CURVE_COLUMNS)
        if self.out_dir is not None:
            self.out_dir.mkdir(parents=True, exist_ok=True)
            checkpoints["final.pt"] = self._save("final.pt", len(records), rewards[-1] if rewards else float("nan"))
            curve.to_csv(self.out_dir / CURVE_NAME, index=False)
        return TrainResult(
            params=PolicyParams.from_network(self.network),
            curve=curve,
            checkpoints=checkpoints,
            stopped_early=stopped_early,
            best_reward=best,
        )


def train(scenario: Scenario, config: Optional[TrainConfig] = None, seed: int = 0,
          out_dir: Optional[Union[str, Path]] = None) -> TrainResult:
    """Train a recurrent PPO policy for the scenario; max_iterations=0 returns the initial parameters"""
    return PPOTrainer(scenario, config, seed, out_dir).train()
