"""
Clipped-surrogate PPO update over recurrent sequence chunks
"""
import copy
import logging
from typing import Dict, Optional

import torch

from policy.network import RecurrentActorCritic, RecurrentState
from ppo.config import TrainConfig
from ppo.rollout import RolloutBatch

logger = logging.getLogger("PPO")


def surrogate_objective(ratio: torch.Tensor, advantages: torch.Tensor, clip: float) -> torch.Tensor:
    """min(r·A, clip(r, 1−ε, 1+ε)·A), elementwise"""
    return torch.min(ratio * advantages, torch.clamp(ratio, 1.0 - clip, 1.0 + clip) * advantages)


def gaussian_kl(old_mean: torch.Tensor, old_log_std: torch.Tensor,
                new_mean: torch.Tensor, new_log_std: torch.Tensor) -> torch.Tensor:
    """KL(old || new) of diagonal Gaussians, summed over the action dimension"""
    old_var = torch.exp(2.0 * old_log_std)
    new_var = torch.exp(2.0 * new_log_std)
    kl = new_log_std - old_log_std + (old_var + (old_mean - new_mean) ** 2) / (2.0 * new_var) - 0.5
    return kl.sum(-1)


def _masked_mean(values: torch.Tensor, mask: torch.Tensor) -> torch.Tensor:
    return (values * mask).sum() / mask.sum().clamp_min(1.0)


def ppo_update(
    network: RecurrentActorCritic,
    optimizer: torch.optim.Optimizer,
    batch: RolloutBatch,
    config: TrainConfig,
    generator: torch.Generator,
    kl_coeff: Optional[float] = None,
) -> Dict[str, float]:
    """One epoch of minibatch gradient steps over shuffled chunks

    Minimizes −surrogate + β·KL + c_v·value_loss − c_e·entropy. A non-finite
    loss restores the parameters held at the start of the epoch and reports
    aborted=True.
    """
    beta = config.kl_coeff if kl_coeff is None else kl_coeff
    saved_params = copy.deepcopy(network.state_dict())
    saved_optim = copy.deepcopy(optimizer.state_dict())

    totals = {"policy_loss": 0.0, "value_loss": 0.0, "kl": 0.0, "clip_fraction": 0.0}
    weight = 0.0
    order = torch.randperm(batch.n_chunks, generator=generator)
    step = config.chunks_per_minibatch
    for start in range(0, batch.n_chunks, step):
        idx = order[start:start + step]
        mask = batch.mask[idx]
        raw_mean, values = network.forward_sequence(
            batch.obs[idx], RecurrentState(batch.hidden0[idx], batch.cell0[idx]), batch.episode_starts[idx]
        )
        dist = network.distribution(raw_mean)
        log_prob = dist.log_prob(batch.raw_actions[idx]).sum(-1)
        ratio = torch.exp(log_prob - batch.old_log_probs[idx])

        policy_loss = -_masked_mean(surrogate_objective(ratio, batch.advantages[idx], config.clip), mask)
        kl = _masked_mean(gaussian_kl(batch.old_means[idx], batch.old_log_std, raw_mean, network.log_std), mask)
        value_loss = _masked_mean((values - batch.returns[idx]) ** 2, mask)
        entropy = _masked_mean(dist.entropy().sum(-1), mask)
        loss = policy_loss + beta * kl + config.vf_coeff * value_loss - config.entropy_coeff * entropy

        if not torch.isfinite(loss):
            network.load_state_dict(saved_params)
            optimizer.load_state_dict(saved_optim)
            logger.error("❌ non-finite loss, update aborted and parameters restored")
            return {**totals, "aborted": True}

        optimizer.zero_grad()
        loss.backward()
        if config.grad_clip is not None:
            torch.nn.utils.clip_grad_norm_(network.parameters(), config.grad_clip)
        optimizer.step()

        n = float(mask.sum())
        with torch.no_grad():
            clipped = _masked_mean(((ratio - 1.0).abs() > config.clip).to(mask.dtype), mask)
        totals["policy_loss"] += float(policy_loss) * n
        totals["value_loss"] += float(value_loss) * n
        totals["kl"] += float(kl) * n
        totals["clip_fraction"] += float(clipped) * n
        weight += n

    metrics = {k: v / max(weight, 1.0) for k, v in totals.items()}
    metrics["aborted"] = False
    return metrics
