"""
Random observations over the valid ranges, shared by saliency and SHAP
"""
from typing import Optional, Sequence, Union

import numpy as np

from environment.observation import normalize_pressure
from environment.scenarios import Scenario


class ObservationSampler:
    """Pressure uniform in [p_min, p_max], forecast entries uniform in [0, 1],
    variable-speed levels uniform in [0, 1], fixed-speed levels in {0, 1}"""

    def __init__(self, scenario: Scenario):
        self.scenario = scenario
        system = scenario.system
        self.fixed = np.array([c.is_fixed_speed for c in system.compressors])

    def __call__(self, n: int, seed: Optional[int] = None) -> np.ndarray:
        return self.sample(n, seed)

    def sample(self, n: int, seed: Optional[int] = None) -> np.ndarray:
        system = self.scenario.system
        rng = np.random.default_rng(seed)
        pressure = rng.uniform(system.p_min, system.p_max, size=n)
        forecast = rng.uniform(0.0, 1.0, size=(n, self.scenario.horizon))
        levels = rng.uniform(0.0, 1.0, size=(n, system.n_compressors))
        levels[:, self.fixed] = np.round(levels[:, self.fixed])
        return np.column_stack([normalize_pressure(pressure, system.p_ref), forecast, levels])


def build_observation(
    scenario: Scenario,
    pressure: float,
    forecast: Union[float, Sequence[float]],
    levels: Optional[Sequence[float]] = None,
) -> np.ndarray:
    """Observation vector from a pressure in bar, a normalized forecast (scalar
    fills the whole horizon) and compressor levels (default all off)"""
    n = scenario.system.n_compressors
    forecast = np.broadcast_to(np.asarray(forecast, dtype=np.float64), (scenario.horizon,))
    levels = np.zeros(n) if levels is None else np.asarray(levels, dtype=np.float64)
    if levels.shape != (n,):
        raise ValueError(f"levels must have {n} entries, got {levels.shape}")
    return np.concatenate(([normalize_pressure(pressure, scenario.system.p_ref)], forecast, levels))


def default_levels(scenario: Scenario, template: Optional[Sequence[float]] = None) -> np.ndarray:
    if template is None:
        return np.zeros(scenario.system.n_compressors)
    return np.asarray(template, dtype=np.float64)
