"""
Reward terms: energy cost, pressure penalties and the rolling switch counter
"""
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from plant.config import CompressorSpec
from plant.physics import FIXED_SPEED_THRESHOLD
from plant.state import PlantState


class RewardConfig(BaseModel):
    """Reward weights; electricity_price mirrors SystemConfig when left unset"""

    model_config = ConfigDict(frozen=True, extra="forbid")

    alpha_penalty: float = Field(default=1.0, ge=0)
    alpha_underpressure: float = Field(default=10.0, ge=0)
    switch_penalty_weight: float = Field(default=0.05, ge=0)
    electricity_price: Optional[float] = Field(default=None, ge=0)


@dataclass(frozen=True)
class RewardBreakdown:
    energy_cost: float
    pressure_penalty: float
    switching_penalty: float
    total: float

    @classmethod
    def from_components(
        cls, energy_cost: float, pressure_penalty: float, switching_penalty: float
    ) -> "RewardBreakdown":
        total = -(energy_cost + pressure_penalty + switching_penalty)
        return cls(energy_cost, pressure_penalty, switching_penalty, total)

    def to_dict(self) -> dict:
        return {
            "energy_cost": self.energy_cost,
            "pressure_penalty": self.pressure_penalty,
            "switching_penalty": self.switching_penalty,
            "reward": self.total,
        }


def energy_cost(powers: Sequence[float], config: RewardConfig, dt: float) -> float:
    """Σ P_i · dt/3600 · price, in €"""
    price = config.electricity_price or 0.0
    return float(np.sum(np.asarray(powers, dtype=float)) * (dt / 3600.0) * price)


def pressure_penalty(p_actual: float, p_ref: float, alpha: float) -> float:
    """Proportional penalty on pressure above the reference"""
    return alpha * max(0.0, p_actual / p_ref - 1.0)


def underpressure_penalty(p_actual: float, p_min: float, beta: float) -> float:
    """Proportional penalty on pressure below the permissible minimum"""
    return beta * max(0.0, 1.0 - p_actual / p_min)


def update_switch_counter(
    state: PlantState,
    new_levels: Sequence[float],
    specs: Sequence[CompressorSpec],
    dt: float,
) -> Tuple[Tuple[float, ...], np.ndarray]:
    """Refill each fixed-speed allowance, then charge one unit per on/off transition

    Returns the new allowances (aligned with specs) and the per-unit
    violation count for this step.
    """
    allowances = []
    violations = np.zeros(len(specs), dtype=int)
    for i, spec in enumerate(specs):
        if not spec.is_fixed_speed:
            allowances.append(0.0)
            continue
        limit = float(spec.max_switches_per_hour)
        allowance = min(limit, state.switch_allowance[i] + limit * dt / 3600.0)
        was_on = state.levels[i] >= FIXED_SPEED_THRESHOLD
        is_on = new_levels[i] >= FIXED_SPEED_THRESHOLD
        if was_on != is_on:
            if allowance >= 1.0:
                allowance -= 1.0
            else:
                violations[i] = 1
                allowance = 0.0
        allowances.append(allowance)
    return tuple(allowances), violations
