"""
gymnasium wrapper around env_step
"""
import logging
from typing import Any, Dict, Optional, Tuple

import gymnasium as gym
import numpy as np
from gymnasium import spaces

from environment.demand import DemandProfile
from environment.dynamics import EPISODE_END, StepOutcome, env_step
from environment.observation import make_observation
from environment.scenarios import Scenario
from errors import ConfigurationError, UsageError
from plant.state import PlantState

logger = logging.getLogger("Env")


class CompressedAirEnv(gym.Env):
    """Single-owner episodic environment over one demand profile

    With random_start the episode window is drawn from the profile on every
    reset; otherwise it starts at options["start"] (default 0). episode_length
    overrides the scenario value, e.g. to replay a whole day.
    """

    metadata = {"render_modes": []}

    def __init__(self, scenario: Scenario, profile: DemandProfile, random_start: bool = False,
                 episode_length: Optional[int] = None):
        super().__init__()
        self.scenario = scenario
        self.profile = profile
        self.random_start = random_start
        self.episode_length = episode_length or scenario.episode_length
        if self.episode_length + scenario.horizon > len(profile):
            raise ConfigurationError(
                f"demand profile ({len(profile)} samples) is shorter than one episode "
                f"({self.episode_length} steps + {scenario.horizon}-step forecast)"
            )
        x = scenario.system.n_compressors
        self.observation_space = spaces.Box(low=-np.inf, high=np.inf, shape=(scenario.obs_dim,), dtype=np.float64)
        self.action_space = spaces.Box(low=0.0, high=1.0, shape=(x,), dtype=np.float64)

        self.state: Optional[PlantState] = None
        self.episode_end = 0
        self.done = True

    def reset(self, *, seed: Optional[int] = None, options: Optional[Dict[str, Any]] = None) -> Tuple[np.ndarray, Dict[str, Any]]:
        super().reset(seed=seed)
        options = options or {}
        last_start = len(self.profile) - self.episode_length - self.scenario.horizon
        if "start" in options:
            start = int(options["start"])
        elif self.random_start:
            start = int(self.np_random.integers(0, last_start + 1))
        else:
            start = 0
        if not 0 <= start <= last_start:
            raise ConfigurationError(f"episode start {start} outside [0, {last_start}]")

        pressure = options.get("pressure", self.scenario.start_pressure)
        self.state = PlantState.initial(self.scenario.system, pressure, step_index=start)
        self.episode_end = start + self.episode_length
        self.done = False
        obs = make_observation(self.state, self.profile, self.scenario.horizon, self.scenario.system.p_ref)
        return obs.as_array(), {"state": self.state}

    def step(self, action) -> Tuple[np.ndarray, float, bool, bool, Dict[str, Any]]:
        outcome = self.step_outcome(action)
        terminated = outcome.terminated and outcome.reason != EPISODE_END
        truncated = outcome.reason == EPISODE_END
        info = {
            "state": outcome.state,
            "breakdown": outcome.reward,
            "flows": outcome.flows,
            "powers": outcome.powers,
            "violations": outcome.violations,
            "demand": outcome.demand,
            "reason": outcome.reason,
        }
        return outcome.observation.as_array(), outcome.reward.total, terminated, truncated, info

    def step_outcome(self, action) -> StepOutcome:
        """Like step() but returns the full StepOutcome"""
        if self.done or self.state is None:
            raise UsageError("episode already terminated; call reset() first")
        demand_now = float(self.profile.samples[self.state.step_index])
        outcome = env_step(self.state, action, demand_now, self.scenario, self.profile, self.episode_end)
        if outcome.diverged:
            logger.warning(f"⚠️  pressure {outcome.state.pressure:.3f} bar left the guard band; ending episode")
        self.state = outcome.state
        self.done = outcome.terminated
        return outcome
