import numpy as np

from agents.base_agent import BaseAgent
from environment.observation import Observation
from plant.state import PlantState


class RandomAgent(BaseAgent):
    """Uniform random setpoints; the reference floor for training progress"""

    def __init__(self, n_compressors: int, seed: int = 0):
        super().__init__("RandomAgent", n_compressors)
        self.seed = seed
        self.rng = np.random.default_rng(seed)

    def reset(self) -> None:
        self.rng = np.random.default_rng(self.seed)

    def act(self, observation: Observation, state: PlantState) -> np.ndarray:
        return self.rng.uniform(0.0, 1.0, size=self.n_compressors)

    def describe(self):
        return {"controller": "random", "seed": self.seed}
