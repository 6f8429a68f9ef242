"""
Agent observation: normalized pressure, demand forecast and compressor levels
"""
from dataclasses import dataclass
from typing import List

import numpy as np

from environment.demand import DemandProfile
from errors import EndOfDataError
from plant.state import PlantState


@dataclass(frozen=True)
class Observation:
    pressure_norm: float
    forecast: np.ndarray
    levels: np.ndarray

    def as_array(self) -> np.ndarray:
        """Flat vector in feature order: pressure, forecast..., levels..."""
        return np.concatenate(([self.pressure_norm], self.forecast, self.levels)).astype(np.float64)

    @classmethod
    def from_array(cls, values: np.ndarray, horizon: int) -> "Observation":
        values = np.asarray(values, dtype=np.float64)
        return cls(
            pressure_norm=float(values[0]),
            forecast=values[1:1 + horizon].copy(),
            levels=values[1 + horizon:].copy(),
        )

    @property
    def width(self) -> int:
        return 1 + self.forecast.size + self.levels.size


def normalize_pressure(pressure: float, p_ref: float) -> float:
    return (pressure - p_ref) / p_ref


def make_observation(state: PlantState, profile: DemandProfile, horizon: int, p_ref: float) -> Observation:
    """Observation at state.step_index; the forecast starts at the current step"""
    start = state.step_index
    if start < 0 or start + horizon > len(profile):
        raise EndOfDataError(
            f"demand profile of length {len(profile)} has no {horizon}-step window at index {start}"
        )
    return Observation(
        pressure_norm=normalize_pressure(state.pressure, p_ref),
        forecast=profile.samples[start:start + horizon] / profile.ceiling,
        levels=np.asarray(state.levels, dtype=np.float64),
    )


def feature_labels(horizon: int, n_compressors: int) -> List[str]:
    """PR, F (or F1..FY), CL1..CLX"""
    forecast = ["F"] if horizon == 1 else [f"F{k + 1}" for k in range(horizon)]
    return ["PR"] + forecast + [f"CL{i + 1}" for i in range(n_compressors)]
