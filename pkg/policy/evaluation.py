"""
Deterministic evaluation and exact input gradients

Policies are either a RecurrentActorCritic / PolicyParams, or any torch
callable mapping observations [N, F] to setpoints [N, X]; the latter lets
analyses run on hand-built reference policies.
"""
from typing import Callable, Union

import numpy as np
import torch

from errors import ConfigurationError
from policy.network import DTYPE, RecurrentActorCritic
from policy.params import PolicyParams

TorchPolicy = Callable[[torch.Tensor], torch.Tensor]
PolicyLike = Union[PolicyParams, RecurrentActorCritic, TorchPolicy]

EVAL_CHUNK = 65536


def as_torch_policy(policy: PolicyLike) -> TorchPolicy:
    if isinstance(policy, PolicyParams):
        policy = policy.to_network()
    if isinstance(policy, RecurrentActorCritic):
        return policy.deterministic_action
    if callable(policy):
        return policy
    raise ConfigurationError(f"cannot evaluate object of type {type(policy).__name__} as a policy")


def _as_batch(obs: np.ndarray) -> torch.Tensor:
    return torch.as_tensor(np.atleast_2d(np.asarray(obs, dtype=np.float64)), dtype=DTYPE)


def deterministic_action(policy: PolicyLike, obs: np.ndarray) -> np.ndarray:
    """Mean setpoints for one observation [F] or a batch [N, F]"""
    fn = as_torch_policy(policy)
    single = np.ndim(obs) == 1
    batch = _as_batch(obs)
    with torch.no_grad():
        out = torch.cat([fn(batch[i:i + EVAL_CHUNK]) for i in range(0, batch.shape[0], EVAL_CHUNK)])
    out = out.numpy()
    return out[0] if single else out


def numpy_policy(policy: PolicyLike) -> Callable[[np.ndarray], np.ndarray]:
    """Batched numpy view [N, F] -> [N, X] of a policy"""
    fn = as_torch_policy(policy)
    return lambda obs: deterministic_action(fn, obs)


def input_gradient(policy: PolicyLike, obs: np.ndarray) -> np.ndarray:
    """∂(Σ_k a_k)/∂s_j by reverse mode, for one observation or row-wise for a batch"""
    fn = as_torch_policy(policy)
    single = np.ndim(obs) == 1
    batch = _as_batch(obs).requires_grad_(True)
    total = fn(batch).sum()
    (grad,) = torch.autograd.grad(total, batch)
    grad = grad.numpy()
    return grad[0] if single else grad
