"""
Pressure-band cascade controller: the reference the learned policy is compared against

Below p_low units are engaged in cascade order until their capacity covers
the demand estimate; inside the band variable-speed units follow a
proportional law on (p_high - p) and fixed-speed units hold their state;
at or above p_high everything stops. A fixed-speed unit therefore only
starts below p_low and only stops at p_high, a hysteresis of half the band
width either side of the band midpoint.
"""
from typing import Any, Dict, List, Optional, Sequence

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from agents.base_agent import BaseAgent
from environment.observation import Observation
from plant.config import CompressorSpec
from plant.physics import FIXED_SPEED_THRESHOLD
from plant.state import PlantState


class BandControllerConfig(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    p_low: float = Field(default=7.9, gt=0)
    p_high: float = Field(default=8.1, gt=0)
    cascade_order: Optional[List[int]] = None
    gain: Optional[float] = Field(default=None, gt=0, description="setpoint fraction per bar")

    @model_validator(mode="after")
    def _check_band(self) -> "BandControllerConfig":
        if not self.p_low < self.p_high:
            raise ValueError(f"band needs p_low < p_high, got {self.p_low} / {self.p_high}")
        return self

    @property
    def effective_gain(self) -> float:
        return self.gain if self.gain is not None else 1.0 / (self.p_high - self.p_low)

    @property
    def hysteresis(self) -> float:
        return (self.p_high - self.p_low) / 2.0


def cascade_indices(config: BandControllerConfig, specs: Sequence[CompressorSpec]) -> List[int]:
    """Compressor positions in engagement order; default is fixed-speed base load first"""
    if config.cascade_order is not None:
        position = {spec.id: i for i, spec in enumerate(specs)}
        return [position[unit_id] for unit_id in config.cascade_order]
    return sorted(range(len(specs)), key=lambda i: (not specs[i].is_fixed_speed, specs[i].id))


def baseline_action(
    state: PlantState,
    config: BandControllerConfig,
    specs: Sequence[CompressorSpec],
    demand_estimate: float,
) -> np.ndarray:
    """Setpoints from pressure, demand estimate and the previous on/off state in state.levels"""
    p = state.pressure
    setpoints = np.zeros(len(specs))
    if p >= config.p_high:
        return setpoints

    was_on = [spec.is_fixed_speed and state.levels[i] >= FIXED_SPEED_THRESHOLD for i, spec in enumerate(specs)]

    if p < config.p_low:
        supply = 0.0
        for rank, i in enumerate(cascade_indices(config, specs)):
            if rank > 0 and supply >= demand_estimate:
                break
            setpoints[i] = 1.0
            supply += specs[i].max_flow
        for i, on in enumerate(was_on):
            if on:
                setpoints[i] = 1.0
        return setpoints

    proportional = float(np.clip((config.p_high - p) * config.effective_gain, 0.0, 1.0))
    for i, spec in enumerate(specs):
        if spec.is_fixed_speed:
            setpoints[i] = 1.0 if was_on[i] else 0.0
        else:
            setpoints[i] = proportional
    return setpoints


class BandAgent(BaseAgent):
    """Band controller reading its demand estimate from the first forecast entry"""

    def __init__(self, config: BandControllerConfig, specs: Sequence[CompressorSpec], demand_ceiling: float):
        super().__init__("BandAgent", len(specs))
        self.config = config
        self.specs = list(specs)
        self.demand_ceiling = demand_ceiling

    def act(self, observation: Observation, state: PlantState) -> np.ndarray:
        demand_estimate = float(observation.forecast[0]) * self.demand_ceiling
        return baseline_action(state, self.config, self.specs, demand_estimate)

    def describe(self) -> Dict[str, Any]:
        return {
            "controller": "baseline",
            "p_low": self.config.p_low,
            "p_high": self.config.p_high,
            "gain": self.config.effective_gain,
        }
