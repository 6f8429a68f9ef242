"""
Base class for every controller that drives the compressed-air plant
"""
from typing import Any, Dict

import numpy as np

from environment.observation import Observation
from plant.state import PlantState


class BaseAgent:
    """Maps (observation, plant state) to one setpoint in [0, 1] per compressor"""

    def __init__(self, name: str, n_compressors: int):
        self.name = name
        self.n_compressors = n_compressors

    def reset(self) -> None:
        """Clear per-episode memory; stateless agents need nothing"""

    def act(self, observation: Observation, state: PlantState) -> np.ndarray:
        raise NotImplementedError

    def describe(self) -> Dict[str, Any]:
        """Short description for run summaries"""
        return {"controller": self.name}
