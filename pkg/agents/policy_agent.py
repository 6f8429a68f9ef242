"""
Closed-loop controller backed by a trained policy
"""
from typing import Any, Dict, Optional

import numpy as np
import torch

from agents.base_agent import BaseAgent
from environment.observation import Observation
from plant.state import PlantState
from policy.network import DTYPE, RecurrentState
from policy.params import PolicyParams


class PolicyAgent(BaseAgent):
    """Deterministic (mean) actions; the LSTM state is carried between steps of an episode"""

    def __init__(self, params: PolicyParams, source: Optional[str] = None):
        super().__init__("PolicyAgent", params.act_dim)
        self.network = params.to_network()
        self.network.eval()
        self.source = source
        self.recurrent: RecurrentState = self.network.zero_state(1)

    def reset(self) -> None:
        self.recurrent = self.network.zero_state(1)

    def act(self, observation: Observation, state: PlantState) -> np.ndarray:
        obs = torch.as_tensor(observation.as_array(), dtype=DTYPE).unsqueeze(0)
        with torch.no_grad():
            out = self.network(obs, self.recurrent)
        self.recurrent = out.recurrent
        return out.action_mean[0].numpy()

    def describe(self) -> Dict[str, Any]:
        return {"controller": "policy", "policy": self.source}
