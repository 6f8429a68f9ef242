"""
Actor-critic network: two fully connected tanh layers, an LSTM cell, and
a squashed-Gaussian action head next to a value head.
"""
from dataclasses import dataclass
from typing import Optional, Tuple

import torch
from torch import nn
from torch.distributions import Normal

from errors import ConfigurationError

DTYPE = torch.float64


def squash(raw: torch.Tensor) -> torch.Tensor:
    """Map the unbounded head output to setpoints in [0, 1]"""
    return 0.5 * (torch.tanh(raw) + 1.0)


@dataclass
class RecurrentState:
    """LSTM hidden and cell vectors, shape [batch, hidden]"""

    hidden: torch.Tensor
    cell: torch.Tensor

    @classmethod
    def zeros(cls, batch: int, size: int) -> "RecurrentState":
        return cls(torch.zeros(batch, size, dtype=DTYPE), torch.zeros(batch, size, dtype=DTYPE))

    def masked(self, keep: torch.Tensor) -> "RecurrentState":
        """Zero the rows where keep is 0 (episode boundaries)"""
        keep = keep.to(DTYPE).unsqueeze(-1)
        return RecurrentState(self.hidden * keep, self.cell * keep)

    def detach(self) -> "RecurrentState":
        return RecurrentState(self.hidden.detach().clone(), self.cell.detach().clone())


@dataclass
class PolicyOutput:
    action_mean: torch.Tensor
    raw_mean: torch.Tensor
    log_std: torch.Tensor
    value: torch.Tensor
    recurrent: RecurrentState


class RecurrentActorCritic(nn.Module):
    def __init__(self, obs_dim: int, act_dim: int, hidden_size: int = 128, log_std_init: float = -0.5):
        super().__init__()
        self.obs_dim = obs_dim
        self.act_dim = act_dim
        self.hidden_size = hidden_size
        self.fc1 = nn.Linear(obs_dim, hidden_size)
        self.fc2 = nn.Linear(hidden_size, hidden_size)
        self.lstm = nn.LSTMCell(hidden_size, hidden_size)
        self.action_head = nn.Linear(hidden_size, act_dim)
        self.value_head = nn.Linear(hidden_size, 1)
        self.log_std = nn.Parameter(torch.full((act_dim,), float(log_std_init)))
        self.to(DTYPE)

    def zero_state(self, batch: int = 1) -> RecurrentState:
        return RecurrentState.zeros(batch, self.hidden_size)

    def _check_width(self, obs: torch.Tensor) -> None:
        if obs.shape[-1] != self.obs_dim:
            raise ConfigurationError(
                f"observation width {obs.shape[-1]} does not match policy input width {self.obs_dim}"
            )

    def _encode(self, obs: torch.Tensor) -> torch.Tensor:
        return torch.tanh(self.fc2(torch.tanh(self.fc1(obs))))

    def forward(self, obs: torch.Tensor, recurrent: Optional[RecurrentState] = None) -> PolicyOutput:
        """One step for a batch of observations [B, F]"""
        self._check_width(obs)
        if recurrent is None:
            recurrent = self.zero_state(obs.shape[0])
        hidden, cell = self.lstm(self._encode(obs), (recurrent.hidden, recurrent.cell))
        raw_mean = self.action_head(hidden)
        return PolicyOutput(
            action_mean=squash(raw_mean),
            raw_mean=raw_mean,
            log_std=self.log_std,
            value=self.value_head(hidden).squeeze(-1),
            recurrent=RecurrentState(hidden, cell),
        )

    def forward_sequence(
        self, obs: torch.Tensor, recurrent: RecurrentState, episode_starts: torch.Tensor
    ) -> Tuple[torch.Tensor, torch.Tensor]:
        """Unroll over [B, T, F]; the state is reset before steps flagged in episode_starts

        Returns raw action means [B, T, X] and values [B, T].
        """
        self._check_width(obs)
        features = self._encode(obs)
        hidden, cell = recurrent.hidden, recurrent.cell
        means, values = [], []
        for t in range(obs.shape[1]):
            keep = (1.0 - episode_starts[:, t].to(DTYPE)).unsqueeze(-1)
            hidden, cell = self.lstm(features[:, t], (hidden * keep, cell * keep))
            means.append(self.action_head(hidden))
            values.append(self.value_head(hidden).squeeze(-1))
        return torch.stack(means, dim=1), torch.stack(values, dim=1)

    def distribution(self, raw_mean: torch.Tensor) -> Normal:
        """Gaussian over the pre-squash action; log-std is state independent"""
        return Normal(raw_mean, self.log_std.exp().expand_as(raw_mean))

    def deterministic_action(self, obs: torch.Tensor) -> torch.Tensor:
        """Mean setpoints at zero recurrent state, the mode every explain analysis uses"""
        return self.forward(obs).action_mean
