"""
Shapley attribution at four levels: global, pattern, case and time-resolved
"""
import logging
from dataclasses import dataclass
from enum import Enum
from typing import Dict, List, Optional, Sequence

import numpy as np
import pandas as pd
from scipy.stats import pearsonr, spearmanr

from environment.observation import feature_labels
from environment.scenarios import Scenario
from errors import ConfigurationError
from explain.config import ExplainConfig
from explain.sampling import ObservationSampler, build_observation, default_levels
from explain.shapley import AttributionResult, shap
from policy.evaluation import PolicyLike, as_torch_policy

logger = logging.getLogger("Explain")

CASE_FORECASTS = (0.0, 0.5, 1.0)


class TimeScenario(str, Enum):
    DEMAND_SWEEP_CONST_P = "DemandSweepConstP"
    PRESSURE_SWEEP_CONST_D = "PressureSweepConstD"

    @classmethod
    def parse(cls, value: str) -> "TimeScenario":
        try:
            return cls(value)
        except ValueError:
            options = ", ".join(s.value for s in cls)
            raise ConfigurationError(f"unknown time-resolved scenario '{value}' (expected one of {options})")


def labels_for(scenario: Scenario) -> List[str]:
    return feature_labels(scenario.horizon, scenario.system.n_compressors)


def draw_background(scenario: Scenario, config: Optional[ExplainConfig] = None) -> np.ndarray:
    """Reference distribution for the value function, optionally subsampled"""
    config = config or scenario.explain
    background = ObservationSampler(scenario).sample(config.n_background, config.background_seed)
    if config.background_subsample and config.background_subsample < len(background):
        rng = np.random.default_rng(config.background_seed)
        index = np.sort(rng.choice(len(background), config.background_subsample, replace=False))
        background = background[index]
    return background


def _explain(f, state, background, config: ExplainConfig, labels, seed_offset: int = 0) -> AttributionResult:
    return shap(f, state, background, config.n_permutations,
                seed=config.permutation_seed + seed_offset, labels=labels)


@dataclass
class GlobalAttribution:
    labels: List[str]
    mean_abs_phi: np.ndarray
    results: List[AttributionResult]

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({"feature": self.labels, "mean_abs_phi": self.mean_abs_phi})


def global_attribution(policy: PolicyLike, scenario: Scenario,
                       config: Optional[ExplainConfig] = None) -> GlobalAttribution:
    """Mean |φ_j| over the n_test random states"""
    config = config or scenario.explain
    labels = labels_for(scenario)
    f = as_torch_policy(policy)
    background = draw_background(scenario, config)
    tests = ObservationSampler(scenario).sample(config.n_test, config.test_seed)
    results = []
    for i, state in enumerate(tests):
        results.append(_explain(f, state, background, config, labels, seed_offset=i))
        if (i + 1) % 20 == 0:
            logger.info(f"global attribution: {i + 1}/{len(tests)} states")
    mean_abs = np.mean([np.abs(r.phi) for r in results], axis=0)
    return GlobalAttribution(labels=labels, mean_abs_phi=mean_abs, results=results)


def _safe_pearson(x: np.ndarray, y: np.ndarray) -> float:
    if np.ptp(x) == 0 or np.ptp(y) == 0:
        return float("nan")
    return float(pearsonr(x, y)[0])


@dataclass
class PatternAttribution:
    frame: pd.DataFrame
    correlations: Dict[str, float]


def pattern_attribution(policy: PolicyLike, scenario: Scenario, config: Optional[ExplainConfig] = None,
                        results: Optional[Sequence[AttributionResult]] = None) -> PatternAttribution:
    """Feature value against φ per test state, with the per-feature Pearson r"""
    if results is None:
        results = global_attribution(policy, scenario, config).results
    labels = labels_for(scenario)
    records = [
        {"state": i, "feature": label, "value": float(r.state[j]), "phi": float(r.phi[j])}
        for i, r in enumerate(results)
        for j, label in enumerate(labels)
    ]
    frame = pd.DataFrame(records, columns=["state", "feature", "value", "phi"])
    correlations = {
        label: _safe_pearson(group["value"].to_numpy(), group["phi"].to_numpy())
        for label, group in frame.groupby("feature", sort=False)
    }
    return PatternAttribution(frame=frame, correlations=correlations)


@dataclass
class Case:
    name: str
    pressure: float
    forecast: float
    state: np.ndarray


def case_grid(scenario: Scenario, levels: Optional[Sequence[float]] = None) -> List[Case]:
    """{p_min, p_ref, p_max} × forecast {0 %, 50 %, 100 %}"""
    system = scenario.system
    levels = default_levels(scenario, levels if levels is not None else scenario.explain.levels_template)
    cases = []
    for p_name, pressure in (("p_min", system.p_min), ("p_ref", system.p_ref), ("p_max", system.p_max)):
        for forecast in CASE_FORECASTS:
            cases.append(Case(
                name=f"{p_name}/{int(round(forecast * 100))}%",
                pressure=pressure,
                forecast=forecast,
                state=build_observation(scenario, pressure, forecast, levels),
            ))
    return cases


def case_attribution(policy: PolicyLike, scenario: Scenario, config: Optional[ExplainConfig] = None,
                     grid: Optional[Sequence[Case]] = None) -> List[AttributionResult]:
    """One waterfall-ready attribution per case"""
    config = config or scenario.explain
    labels = labels_for(scenario)
    f = as_torch_policy(policy)
    background = draw_background(scenario, config)
    results = []
    for i, case in enumerate(grid if grid is not None else case_grid(scenario, config.levels_template)):
        result = _explain(f, case.state, background, config, labels, seed_offset=i)
        result.extra.update({"case": case.name, "pressure": case.pressure, "forecast_level": case.forecast})
        results.append(result)
    return results


def demand_ramp(length: int) -> np.ndarray:
    """0 → 1 over the first 3/8, hold for 1/4, back to 0 over the last 3/8"""
    t = np.linspace(0.0, 1.0, length)
    return np.clip(np.minimum(t / 0.375, (1.0 - t) / 0.375), 0.0, 1.0)


def pressure_wave(length: int, p_min: float, p_max: float, periods: float = 2.0) -> np.ndarray:
    mid, half = 0.5 * (p_min + p_max), 0.5 * (p_max - p_min)
    return mid + half * np.sin(2.0 * np.pi * periods * np.arange(length) / length)


def time_resolved_attribution(
    policy: PolicyLike,
    scenario: Scenario,
    kind: TimeScenario,
    length: Optional[int] = None,
    config: Optional[ExplainConfig] = None,
    constant_pressure: Optional[float] = None,
    constant_demand: float = 0.5,
) -> pd.DataFrame:
    """φ at every step of a scripted excitation; the plant is bypassed

    DemandSweepConstP ramps the normalized demand at constant pressure;
    PressureSweepConstD drives a wave-like pressure at constant demand.
    The forecast window at step t looks ahead into the scripted demand.
    """
    config = config or scenario.explain
    kind = TimeScenario.parse(kind) if isinstance(kind, str) else kind
    length = config.time_steps if length is None else length
    if length <= 0:
        raise ConfigurationError(f"length must be positive, got {length}")

    system = scenario.system
    if kind is TimeScenario.DEMAND_SWEEP_CONST_P:
        demand = demand_ramp(length)
        pressure = np.full(length, system.p_ref if constant_pressure is None else constant_pressure)
        excitation = demand
    else:
        demand = np.full(length, constant_demand)
        pressure = pressure_wave(length, system.p_min, system.p_max)
        excitation = pressure

    labels = labels_for(scenario)
    levels = default_levels(scenario, config.levels_template)
    f = as_torch_policy(policy)
    background = draw_background(scenario, config)
    rows = []
    for t in range(length):
        window = demand[np.minimum(np.arange(t, t + scenario.horizon), length - 1)]
        state = build_observation(scenario, pressure[t], window, levels)
        result = _explain(f, state, background, config, labels, seed_offset=t)
        rows.append({
            "step": t, "excitation": float(excitation[t]), "pressure": float(pressure[t]),
            "demand": float(demand[t]), "baseline": result.baseline, "output": result.output,
            **{f"phi_{label}": float(v) for label, v in zip(labels, result.phi)},
        })
    return pd.DataFrame(rows)


@dataclass
class RankingComparison:
    frame: pd.DataFrame
    spearman: float


def _unit_max(values: np.ndarray) -> np.ndarray:
    values = np.abs(np.asarray(values, dtype=np.float64))
    peak = values.max() if values.size else 0.0
    return values / peak if peak > 0 else np.zeros_like(values)


def compare_rankings(mean_abs_phi: np.ndarray, saliency: np.ndarray, labels: Sequence[str]) -> RankingComparison:
    """Both importance vectors scaled to unit max, with ranks and their Spearman correlation"""
    shap_norm, saliency_norm = _unit_max(mean_abs_phi), _unit_max(saliency)
    frame = pd.DataFrame({"feature": list(labels), "shap": shap_norm, "saliency": saliency_norm})
    frame["shap_rank"] = frame["shap"].rank(ascending=False, method="min").astype(int)
    frame["saliency_rank"] = frame["saliency"].rank(ascending=False, method="min").astype(int)
    if np.ptp(shap_norm) == 0 or np.ptp(saliency_norm) == 0:
        rho = float("nan")
    else:
        rho = float(spearmanr(shap_norm, saliency_norm)[0])
    return RankingComparison(frame=frame, spearman=rho)
