"""
Closed-loop simulation of any agent against the plant, with per-step trace and summary
"""
import logging
from dataclasses import dataclass
from typing import Any, Dict, List, Optional

import numpy as np
import pandas as pd

from agents.base_agent import BaseAgent
from environment.compressed_air_env import CompressedAirEnv
from environment.demand import DemandProfile
from environment.observation import Observation
from environment.scenarios import Scenario

logger = logging.getLogger("Coordinator")


@dataclass
class SimulationResult:
    trajectory: pd.DataFrame
    summary: Dict[str, Any]


def _switch_counts(levels: np.ndarray) -> List[int]:
    running = levels > 0.0
    return [int(n) for n in np.count_nonzero(np.diff(running, axis=0), axis=0)]


def simulate(
    agent: BaseAgent,
    scenario: Scenario,
    profile: DemandProfile,
    start: int = 0,
    steps: Optional[int] = None,
) -> SimulationResult:
    """Run one episode of `steps` (default: as much of the profile as fits)"""
    steps = steps or len(profile) - start - scenario.horizon
    env = CompressedAirEnv(scenario, profile, episode_length=steps)
    obs_array, info = env.reset(options={"start": start})
    state = info["state"]
    agent.reset()

    system = scenario.system
    x = system.n_compressors
    rows = []
    levels = [np.asarray(state.levels)]
    reason = None
    clipped = 0
    while not env.done:
        observation = Observation.from_array(obs_array, scenario.horizon)
        requested = np.asarray(agent.act(observation, state), dtype=float)
        setpoints = np.clip(requested, 0.0, 1.0)
        if not np.array_equal(setpoints, requested):
            clipped += 1
            if clipped == 1:
                logger.warning(f"⚠️  {agent.name} produced setpoints {requested} outside [0, 1]; clipping")
        outcome = env.step_outcome(setpoints)
        row = {
            "t": (outcome.state.step_index - start) * system.dt,
            "pressure": outcome.state.pressure,
            "demand": outcome.demand,
        }
        row.update({f"flow_c{i + 1}": outcome.flows[i] for i in range(x)})
        row.update({f"power_c{i + 1}": outcome.powers[i] for i in range(x)})
        row.update({f"setpoint_c{i + 1}": setpoints[i] for i in range(x)})
        row.update(outcome.reward.to_dict())
        row["violations"] = int(outcome.violations.sum())
        rows.append(row)

        state = outcome.state
        levels.append(np.asarray(state.levels))
        obs_array = outcome.observation.as_array()
        reason = outcome.reason

    trajectory = pd.DataFrame(rows)
    summary = summarize(trajectory, scenario, np.vstack(levels))
    summary["termination"] = reason
    summary["clipped_steps"] = clipped
    summary.update(agent.describe())
    logger.info(
        f"✅ {agent.name}: {summary['steps']} steps, {summary['total_energy_kwh']:.2f} kWh, "
        f"mean pressure {summary['mean_pressure']:.3f} bar"
    )
    return SimulationResult(trajectory=trajectory, summary=summary)


def summarize(trajectory: pd.DataFrame, scenario: Scenario, levels: np.ndarray) -> Dict[str, Any]:
    system = scenario.system
    power_cols = [c for c in trajectory.columns if c.startswith("power_c")]
    energy_kwh = float(trajectory[power_cols].to_numpy().sum() * system.dt / 3600.0)
    pressure = trajectory["pressure"]
    return {
        "scenario": scenario.name,
        "steps": int(len(trajectory)),
        "total_energy_kwh": energy_kwh,
        "total_energy_eur": energy_kwh * system.electricity_price,
        "cumulative_reward": float(trajectory["reward"].sum()),
        "mean_pressure": float(pressure.mean()),
        "max_pressure": float(pressure.max()),
        "min_pressure": float(pressure.min()),
        "mean_abs_deviation_from_ref": float((pressure - system.p_ref).abs().mean()),
        "steps_above_p_max": int((pressure > system.p_max).sum()),
        "steps_below_p_min": int((pressure < system.p_min).sum()),
        "fraction_within_p_max": float((pressure <= system.p_max).mean()),
        "switch_counts": _switch_counts(levels),
        "switching_violations": int(trajectory["violations"].sum()),
    }

