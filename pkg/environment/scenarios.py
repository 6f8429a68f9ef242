"""
Scenario configuration: YAML schema, XCYF presets and config hashing
"""
import hashlib
import json
import logging
from pathlib import Path
from typing import Any, Dict, Optional, Union

import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from agents.band_agent import BandControllerConfig
from environment.demand import DemandConfig, DemandProfile, generate_demand, read_demand_csv
from environment.reward import RewardConfig
from errors import ConfigurationError
from explain.config import ExplainConfig
from plant.config import CompressorKind, CompressorSpec, SystemConfig
from ppo.config import TrainConfig

logger = logging.getLogger("Env")


class Scenario(BaseModel):
    """Everything needed to build, train on and explain one plant configuration"""

    model_config = ConfigDict(frozen=True, extra="forbid")

    name: str
    system: SystemConfig
    reward: RewardConfig = Field(default_factory=RewardConfig)
    horizon: int = Field(default=1, ge=1)
    episode_length: int = Field(default=720, ge=1)
    initial_pressure: Optional[float] = Field(default=None, gt=0)
    band: BandControllerConfig = Field(default_factory=BandControllerConfig)
    demand: DemandConfig = Field(default_factory=DemandConfig)
    train: TrainConfig = Field(default_factory=TrainConfig)
    explain: ExplainConfig = Field(default_factory=ExplainConfig)

    @model_validator(mode="before")
    @classmethod
    def _mirror_price(cls, data: Any) -> Any:
        if not isinstance(data, dict) or "system" not in data:
            return data
        data = dict(data)
        system = data["system"]
        price = system.electricity_price if isinstance(system, SystemConfig) else system.get("electricity_price", 0.30)
        reward = data.get("reward") or {}
        if isinstance(reward, RewardConfig):
            reward = reward.model_dump()
        reward = dict(reward)
        if reward.get("electricity_price") is None:
            reward["electricity_price"] = price
        data["reward"] = reward
        return data

    @model_validator(mode="after")
    def _check_consistency(self) -> "Scenario":
        system = self.system
        if self.reward.electricity_price != system.electricity_price:
            raise ValueError(
                f"reward.electricity_price {self.reward.electricity_price} differs from "
                f"system.electricity_price {system.electricity_price}"
            )
        band = self.band
        if not system.p_min <= band.p_low < band.p_high <= system.p_max:
            raise ValueError(
                f"band controller needs p_min <= p_low < p_high <= p_max, got "
                f"{system.p_min} / {band.p_low} / {band.p_high} / {system.p_max}"
            )
        ids = {c.id for c in system.compressors}
        if band.cascade_order is not None and set(band.cascade_order) != ids:
            raise ValueError(f"band.cascade_order {band.cascade_order} must list every compressor id {sorted(ids)}")
        return self

    @property
    def obs_dim(self) -> int:
        return 1 + self.horizon + self.system.n_compressors

    @property
    def act_dim(self) -> int:
        return self.system.n_compressors

    @property
    def start_pressure(self) -> float:
        return self.initial_pressure if self.initial_pressure is not None else self.system.p_ref

    @property
    def demand_ceiling(self) -> float:
        return self.demand.ceiling if self.demand.ceiling is not None else self.system.total_capacity

    def _digest(self, payload: Dict[str, Any]) -> str:
        text = json.dumps(payload, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(text.encode()).hexdigest()[:16]

    def environment_hash(self) -> str:
        """Identifies the observation/action interface and dynamics a policy was trained for"""
        dumped = self.model_dump(mode="json")
        return self._digest({k: dumped[k] for k in ("system", "reward", "horizon", "episode_length")})

    def config_hash(self) -> str:
        return self._digest(self.model_dump(mode="json"))

    def build_demand(self, seed: Optional[int] = None, length: Optional[int] = None) -> DemandProfile:
        """Demand profile for this scenario; seed/length override the configured ones"""
        if self.demand.csv:
            return read_demand_csv(self.demand.csv, dt=self.system.dt, ceiling=self.demand_ceiling)
        return generate_demand(
            self.demand.seed if seed is None else seed,
            length or self.demand.length,
            self.demand.pattern,
            ceiling=self.demand_ceiling,
            dt=self.system.dt,
            config=self.demand,
        )


def _variable_speed(unit_id: int) -> CompressorSpec:
    return CompressorSpec(
        id=unit_id, kind=CompressorKind.VARIABLE_SPEED,
        rated_power=30.0, max_flow=0.01, min_flow_fraction=0.2,
    )


def _fixed_speed(unit_id: int) -> CompressorSpec:
    return CompressorSpec(
        id=unit_id, kind=CompressorKind.FIXED_SPEED,
        rated_power=30.0, max_flow=0.01, max_switches_per_hour=6.0,
    )


def _three_compressor(name: str, horizon: int) -> Scenario:
    system = SystemConfig(compressors=[_fixed_speed(1), _variable_speed(2), _variable_speed(3)])
    return Scenario(name=name, system=system, horizon=horizon)


PRESETS = {
    "1C1F": lambda: Scenario(name="1C1F", system=SystemConfig(compressors=[_variable_speed(1)]), horizon=1),
    "3C1F": lambda: _three_compressor("3C1F", 1),
    "3C3F": lambda: _three_compressor("3C3F", 3),
    "3C5F": lambda: _three_compressor("3C5F", 5),
}


def get_preset(name: str) -> Scenario:
    try:
        return PRESETS[name.upper()]()
    except KeyError:
        raise ConfigurationError(f"unknown scenario '{name}', presets are {sorted(PRESETS)}") from None


def scenario_from_dict(data: Dict[str, Any]) -> Scenario:
    try:
        return Scenario.model_validate(data)
    except ValidationError as e:
        raise ConfigurationError(f"invalid scenario config:\n{e}") from e


def load_scenario(path: Union[str, Path]) -> Scenario:
    """Read a YAML scenario file; unknown keys are errors"""
    path = Path(path)
    if not path.is_file():
        raise ConfigurationError(f"config file not found: {path}")
    try:
        data = yaml.safe_load(path.read_text())
    except yaml.YAMLError as e:
        raise ConfigurationError(f"{path}: invalid YAML ({e})") from e
    if not isinstance(data, dict):
        raise ConfigurationError(f"{path}: top level must be a mapping")
    logger.info(f"Loaded scenario config {path}")
    return scenario_from_dict(data)


def resolve_scenario(name: Optional[str] = None, config_path: Optional[Union[str, Path]] = None) -> Scenario:
    """A config file wins over a preset name; default preset is 1C1F"""
    if config_path:
        return load_scenario(config_path)
    return get_preset(name or "1C1F")


def with_overrides(scenario: Scenario, **sections: Dict[str, Any]) -> Scenario:
    """Copy of scenario with selected sections updated, re-validated"""
    data = scenario.model_dump()
    for key, values in sections.items():
        if isinstance(data.get(key), dict):
            data[key] = {**data[key], **values}
        else:
            data[key] = values
    return scenario_from_dict(data)
