"""
Immutable parameter snapshots and the policy file format
"""
import logging
import math
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Optional, Tuple, Union

import torch

from errors import PolicyFileError
from policy.network import DTYPE, RecurrentActorCritic

logger = logging.getLogger("Policy")

FORMAT_VERSION = 1


def build_network(obs_dim: int, act_dim: int, hidden_size: int = 128, log_std_init: float = -0.5,
                  seed: Optional[int] = None) -> RecurrentActorCritic:
    """Freshly initialised network; a seeded build leaves the global torch RNG untouched"""
    if seed is None:
        return RecurrentActorCritic(obs_dim, act_dim, hidden_size, log_std_init)
    with torch.random.fork_rng(devices=[]):
        torch.manual_seed(seed)
        return RecurrentActorCritic(obs_dim, act_dim, hidden_size, log_std_init)


@dataclass(frozen=True, eq=False)
class PolicyParams:
    """Named tensors of a RecurrentActorCritic plus the dimensions that shape them"""

    obs_dim: int
    act_dim: int
    hidden_size: int
    tensors: Dict[str, torch.Tensor] = field(repr=False)

    @classmethod
    def from_network(cls, network: RecurrentActorCritic) -> "PolicyParams":
        return cls(
            obs_dim=network.obs_dim,
            act_dim=network.act_dim,
            hidden_size=network.hidden_size,
            tensors={k: v.detach().clone() for k, v in network.state_dict().items()},
        )

    @classmethod
    def initialize(cls, obs_dim: int, act_dim: int, hidden_size: int = 128,
                   log_std_init: float = -0.5, seed: Optional[int] = None) -> "PolicyParams":
        return cls.from_network(build_network(obs_dim, act_dim, hidden_size, log_std_init, seed))

    @classmethod
    def zeros(cls, obs_dim: int, act_dim: int, hidden_size: int = 128) -> "PolicyParams":
        params = cls.initialize(obs_dim, act_dim, hidden_size)
        return cls(obs_dim, act_dim, hidden_size, {k: torch.zeros_like(v) for k, v in params.tensors.items()})

    def to_network(self) -> RecurrentActorCritic:
        network = RecurrentActorCritic(self.obs_dim, self.act_dim, self.hidden_size)
        network.load_state_dict(self.tensors, strict=True)
        return network

    @property
    def shapes(self) -> Dict[str, Tuple[int, ...]]:
        return {k: tuple(v.shape) for k, v in self.tensors.items()}

    def is_finite(self) -> bool:
        return all(bool(torch.isfinite(v).all()) for v in self.tensors.values())

    def equals(self, other: "PolicyParams") -> bool:
        return (
            (self.obs_dim, self.act_dim, self.hidden_size) == (other.obs_dim, other.act_dim, other.hidden_size)
            and self.tensors.keys() == other.tensors.keys()
            and all(torch.equal(v, other.tensors[k]) for k, v in self.tensors.items())
        )


def save_params(params: PolicyParams, path: Union[str, Path], environment_hash: str,
                metadata: Optional[Dict[str, Union[str, int, float]]] = None) -> Path:
    """Write a self-describing parameter file; written to a temp name then renamed"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    payload = {
        "format_version": FORMAT_VERSION,
        "environment_hash": environment_hash,
        "obs_dim": params.obs_dim,
        "act_dim": params.act_dim,
        "hidden_size": params.hidden_size,
        "shapes": {k: list(s) for k, s in params.shapes.items()},
        "metadata": dict(metadata or {}),
        "tensors": params.tensors,
    }
    tmp = path.with_name(path.name + ".tmp")
    torch.save(payload, tmp)
    os.replace(tmp, path)
    logger.debug(f"Saved policy parameters to {path}")
    return path


def load_params(path: Union[str, Path], expected_hash: Optional[str] = None) -> PolicyParams:
    """Read a parameter file, refusing anything that does not match the scenario"""
    path = Path(path)
    if not path.is_file():
        raise PolicyFileError(f"policy file not found: {path}")
    try:
        payload = torch.load(path, map_location="cpu", weights_only=True)
    except Exception as e:
        raise PolicyFileError(f"{path}: cannot parse policy file ({e})") from e

    required = {"format_version", "environment_hash", "obs_dim", "act_dim", "hidden_size", "shapes", "tensors"}
    if not isinstance(payload, dict):
        raise PolicyFileError(f"{path}: not a policy file")
    if not required <= payload.keys():
        raise PolicyFileError(f"{path}: not a policy file (missing {sorted(required - payload.keys())})")
    if payload["format_version"] != FORMAT_VERSION:
        raise PolicyFileError(f"{path}: format version {payload['format_version']}, expected {FORMAT_VERSION}")
    if expected_hash is not None and payload["environment_hash"] != expected_hash:
        raise PolicyFileError(
            f"{path}: trained for scenario hash {payload['environment_hash']}, "
            f"current scenario has {expected_hash} (different XCYF layout, limits or reward)"
        )

    tensors = {k: v.to(DTYPE) for k, v in payload["tensors"].items()}
    recorded = {k: tuple(s) for k, s in payload["shapes"].items()}
    actual = {k: tuple(v.shape) for k, v in tensors.items()}
    if recorded != actual:
        raise PolicyFileError(f"{path}: tensor shapes do not match the recorded shape table")

    params = PolicyParams(
        obs_dim=int(payload["obs_dim"]),
        act_dim=int(payload["act_dim"]),
        hidden_size=int(payload["hidden_size"]),
        tensors=tensors,
    )
    try:
        params.to_network()
    except RuntimeError as e:
        raise PolicyFileError(f"{path}: tensors do not fit the declared network ({e})") from e
    if not params.is_finite():
        raise PolicyFileError(f"{path}: parameters contain non-finite values")
    return params


def count_parameters(params: PolicyParams) -> int:
    return sum(math.prod(s) for s in params.shapes.values())
