"""
Input perturbation: sweep the demand forecast at fixed pressures
"""
import math
from dataclasses import dataclass
from typing import Dict, Optional, Sequence

import numpy as np
import pandas as pd
from scipy.stats import spearmanr

from environment.observation import normalize_pressure
from environment.scenarios import Scenario
from explain.config import ExplainConfig
from explain.sampling import default_levels
from policy.evaluation import PolicyLike, deterministic_action

FLOW_RANGE_FACTOR = 3.0


@dataclass(frozen=True)
class SweepSpec:
    fixed_pressures: Sequence[float]
    flow_grid: np.ndarray
    levels_template: np.ndarray
    ceiling: float
    p_ref: float
    horizon: int = 1

    def __post_init__(self):
        grid = np.asarray(self.flow_grid, dtype=np.float64)
        if grid.ndim != 1 or grid.size < 2 or np.any(np.diff(grid) <= 0):
            raise ValueError("flow grid must be a strictly ascending 1-D sequence")
        if self.ceiling <= 0:
            raise ValueError("demand ceiling must be positive")

    @classmethod
    def for_scenario(cls, scenario: Scenario, config: Optional[ExplainConfig] = None,
                     levels: Optional[Sequence[float]] = None) -> "SweepSpec":
        """Flow grid spanning [0, 3·max V̇_max] at the configured pressures"""
        config = config or scenario.explain
        upper = FLOW_RANGE_FACTOR * float(np.max(scenario.system.max_flows))
        return cls(
            fixed_pressures=tuple(config.sweep_pressures),
            flow_grid=np.linspace(0.0, upper, config.sweep_points),
            levels_template=default_levels(scenario, levels if levels is not None else config.levels_template),
            ceiling=scenario.demand_ceiling,
            p_ref=scenario.system.p_ref,
            horizon=scenario.horizon,
        )


def perturbation_sweep(policy: PolicyLike, spec: SweepSpec) -> pd.DataFrame:
    """Deterministic setpoints for each (pressure, flow) pair, ordered by pressure then flow

    Every forecast entry is set to flow/ceiling, unclipped, so it may exceed 1
    at the top of the grid.
    """
    pressures = np.asarray(spec.fixed_pressures, dtype=np.float64)
    grid = np.asarray(spec.flow_grid, dtype=np.float64)
    frame = pd.DataFrame({
        "pressure": np.repeat(pressures, grid.size),
        "flow": np.tile(grid, pressures.size),
    })
    frame["forecast"] = frame["flow"] / spec.ceiling

    n = len(frame)
    obs = np.column_stack([
        normalize_pressure(frame["pressure"].to_numpy(), spec.p_ref),
        np.repeat(frame["forecast"].to_numpy()[:, None], spec.horizon, axis=1),
        np.broadcast_to(spec.levels_template, (n, len(spec.levels_template))),
    ])
    actions = np.atleast_2d(deterministic_action(policy, obs))
    for i in range(actions.shape[1]):
        frame[f"setpoint_c{i + 1}"] = actions[:, i]
    return frame


def sweep_monotonicity(frame: pd.DataFrame) -> Dict[str, float]:
    """Spearman ρ between swept flow and summed setpoints, keyed by fixed pressure

    A flat response has no rank order and reports NaN.
    """
    total = frame.filter(like="setpoint_c").sum(axis=1)
    correlations = {}
    for pressure, rows in frame.groupby("pressure", sort=True).groups.items():
        response = total.loc[rows].to_numpy()
        if np.ptp(response) == 0.0:
            rho = math.nan
        else:
            rho = float(spearmanr(frame.loc[rows, "flow"].to_numpy(), response)[0])
        correlations[f"{pressure:g}"] = rho
    return correlations
