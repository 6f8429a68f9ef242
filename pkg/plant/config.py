"""
Plant topology: compressor ratings and system-level parameters
"""
from enum import Enum
from typing import Any, List, Optional

import numpy as np
from numpy.polynomial import polynomial as P
from pydantic import BaseModel, ConfigDict, Field, model_validator

# Idle share of rated power in the default affine power curve
DEFAULT_IDLE_FRACTION = 0.15


class CompressorKind(str, Enum):
    FIXED_SPEED = "fixed_speed"
    VARIABLE_SPEED = "variable_speed"


class CompressorSpec(BaseModel):
    """One compressor: flow capacity and power-to-flow curve

    power_curve holds ascending polynomial coefficients in flow fraction,
    so [5, 25] means P(f) = 5 + 25 f kW.
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    id: int = Field(ge=0)
    kind: CompressorKind
    rated_power: float = Field(gt=0, description="kW")
    max_flow: float = Field(gt=0, description="m³/s at tank conditions")
    min_flow_fraction: float = Field(default=0.2, gt=0, le=1)
    power_curve: List[float] = Field(default_factory=list)
    max_switches_per_hour: Optional[float] = Field(default=None, gt=0)

    @model_validator(mode="before")
    @classmethod
    def _fill_defaults(cls, data: Any) -> Any:
        if not isinstance(data, dict):
            return data
        data = dict(data)
        rated = data.get("rated_power")
        if not data.get("power_curve") and rated is not None:
            data["power_curve"] = [
                DEFAULT_IDLE_FRACTION * rated,
                (1.0 - DEFAULT_IDLE_FRACTION) * rated,
            ]
        kind = data.get("kind")
        if kind in (CompressorKind.FIXED_SPEED, CompressorKind.FIXED_SPEED.value):
            data.setdefault("min_flow_fraction", 1.0)
            data.setdefault("max_switches_per_hour", 6.0)
        return data

    @model_validator(mode="after")
    def _check_curve(self) -> "CompressorSpec":
        full_load = float(P.polyval(1.0, self.power_curve))
        if abs(full_load - self.rated_power) > 1e-9 * self.rated_power:
            raise ValueError(
                f"compressor {self.id}: power_curve(1.0) = {full_load} kW "
                f"but rated_power = {self.rated_power} kW"
            )
        if np.any(P.polyval(np.linspace(0.0, 1.0, 101), self.power_curve) < 0):
            raise ValueError(f"compressor {self.id}: power_curve is negative on [0, 1]")
        if self.kind is CompressorKind.FIXED_SPEED and self.max_switches_per_hour is None:
            raise ValueError(f"compressor {self.id}: fixed-speed units need max_switches_per_hour")
        return self

    @property
    def is_fixed_speed(self) -> bool:
        return self.kind is CompressorKind.FIXED_SPEED


class SystemConfig(BaseModel):
    """Storage, pressure limits and timing of the whole plant (pressures in bar absolute)"""

    model_config = ConfigDict(frozen=True, extra="forbid")

    compressors: List[CompressorSpec] = Field(min_length=1)
    storage_volume: float = Field(default=5.0, gt=0, description="m³")
    p_min: float = Field(default=7.0, gt=0)
    p_max: float = Field(default=8.5, gt=0)
    p_ref: float = Field(default=8.0, gt=0)
    dt: float = Field(default=5.0, gt=0, description="seconds")
    electricity_price: float = Field(default=0.30, ge=0, description="€/kWh")

    @model_validator(mode="after")
    def _check_pressures(self) -> "SystemConfig":
        if not self.p_min < self.p_ref <= self.p_max:
            raise ValueError(
                f"pressure limits must satisfy p_min < p_ref <= p_max, got "
                f"{self.p_min} / {self.p_ref} / {self.p_max}"
            )
        ids = [c.id for c in self.compressors]
        if len(set(ids)) != len(ids):
            raise ValueError(f"compressor ids must be unique, got {ids}")
        return self

    @property
    def n_compressors(self) -> int:
        return len(self.compressors)

    @property
    def max_flows(self) -> np.ndarray:
        return np.array([c.max_flow for c in self.compressors], dtype=float)

    @property
    def total_capacity(self) -> float:
        """Sum of maximum flows; the default demand ceiling"""
        return float(self.max_flows.sum())
