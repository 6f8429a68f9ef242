"""
One control step of the plant: flows, pressure update, reward and termination
"""
import math
from dataclasses import dataclass
from typing import TYPE_CHECKING, Optional, Sequence

import numpy as np

from environment.demand import DemandProfile
from environment.observation import Observation, make_observation
from environment.reward import (
    RewardBreakdown,
    energy_cost,
    pressure_penalty,
    underpressure_penalty,
    update_switch_counter,
)
from errors import DomainError, NumericalError, UsageError
from plant.physics import compressor_flow, compressor_power, pressure_step
from plant.state import PlantState

if TYPE_CHECKING:
    from environment.scenarios import Scenario

# Hard termination band as multiples of p_min / p_max
LOWER_GUARD = 0.5
UPPER_GUARD = 1.5

PRESSURE_OUT_OF_BAND = "pressure_out_of_band"
EPISODE_END = "episode_end"


@dataclass(frozen=True)
class StepOutcome:
    state: PlantState
    observation: Observation
    reward: RewardBreakdown
    terminated: bool
    reason: Optional[str]
    flows: np.ndarray
    powers: np.ndarray
    violations: np.ndarray
    demand: float

    @property
    def diverged(self) -> bool:
        return self.reason == PRESSURE_OUT_OF_BAND


def env_step(
    state: PlantState,
    action: Sequence[float],
    demand_now: float,
    scenario: "Scenario",
    profile: DemandProfile,
    episode_end: int,
) -> StepOutcome:
    """Apply per-compressor setpoints for one dt and score the result

    episode_end is the absolute profile index at which the episode stops.
    """
    system = scenario.system
    if state.step_index >= episode_end:
        raise UsageError(f"episode already ended at step {episode_end}")
    action = np.asarray(action, dtype=float)
    if action.shape != (system.n_compressors,):
        raise DomainError(f"expected {system.n_compressors} setpoints, got shape {action.shape}")
    if not math.isfinite(demand_now) or demand_now < 0:
        raise DomainError(f"demand must be finite and non-negative, got {demand_now}")

    flows = np.array([compressor_flow(spec, float(a)) for spec, a in zip(system.compressors, action)])
    fractions = flows / system.max_flows
    powers = np.array([compressor_power(spec, float(f)) for spec, f in zip(system.compressors, fractions)])

    net_volume = (flows.sum() - demand_now) * system.dt
    pressure = pressure_step(state, net_volume, system)
    if not math.isfinite(pressure) or pressure <= 0:
        raise NumericalError(f"pressure left the physical range: {pressure}")

    allowances, violations = update_switch_counter(state, fractions, system.compressors, system.dt)

    reward_cfg = scenario.reward
    breakdown = RewardBreakdown.from_components(
        energy_cost(powers, reward_cfg, system.dt),
        pressure_penalty(pressure, system.p_ref, reward_cfg.alpha_penalty)
        + underpressure_penalty(pressure, system.p_min, reward_cfg.alpha_underpressure),
        float(violations.sum()) * reward_cfg.switch_penalty_weight,
    )

    next_state = PlantState(
        pressure=pressure,
        levels=tuple(float(f) for f in fractions),
        switch_allowance=allowances,
        step_index=state.step_index + 1,
    )

    reason = None
    if not LOWER_GUARD * system.p_min <= pressure <= UPPER_GUARD * system.p_max:
        reason = PRESSURE_OUT_OF_BAND
    elif next_state.step_index >= episode_end:
        reason = EPISODE_END

    observation = make_observation(next_state, profile, scenario.horizon, system.p_ref)
    return StepOutcome(
        state=next_state,
        observation=observation,
        reward=breakdown,
        terminated=reason is not None,
        reason=reason,
        flows=flows,
        powers=powers,
        violations=violations,
        demand=float(demand_now),
    )
