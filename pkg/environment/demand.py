"""
Consumer demand profiles: synthetic generation and CSV ingestion/export
"""
import logging
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Optional, Union

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict, Field

from errors import ConfigurationError

logger = logging.getLogger("Env")

SECONDS_PER_DAY = 86400.0
CSV_COLUMNS = ["timestamp", "flow_m3s"]


class DemandPattern(str, Enum):
    DAILY_WAVE = "daily_wave"
    STEP_LOADS = "step_loads"
    MIXED = "mixed"

    @classmethod
    def parse(cls, text: str) -> "DemandPattern":
        """Accept 'Mixed', 'mixed', 'DailyWave', 'daily_wave', ..."""
        key = text.replace("_", "").replace("-", "").lower()
        for pattern in cls:
            if pattern.value.replace("_", "") == key:
                return pattern
        raise ConfigurationError(
            f"unknown demand pattern '{text}', expected one of "
            f"{[p.value for p in cls]}"
        )


class DemandConfig(BaseModel):
    """Shape of the synthetic demand generator, or a CSV source"""

    model_config = ConfigDict(frozen=True, extra="forbid")

    pattern: DemandPattern = DemandPattern.MIXED
    length: int = Field(default=17280, gt=0)
    seed: int = 0
    csv: Optional[str] = None
    ceiling: Optional[float] = Field(default=None, gt=0)
    base_fraction: float = Field(default=0.5, ge=0, le=1)
    amplitude: float = Field(default=0.25, ge=0)
    step_fraction: float = Field(default=0.2, ge=0)
    mean_step_duration: float = Field(default=600.0, gt=0, description="seconds")
    noise: float = Field(default=0.03, ge=0)


@dataclass(frozen=True)
class DemandProfile:
    """Consumer flow in m³/s at dt spacing, with the forecast normalization ceiling"""

    samples: np.ndarray
    ceiling: float
    dt: float = 5.0

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=float)
        object.__setattr__(self, "samples", samples)
        if samples.ndim != 1 or samples.size == 0:
            raise ConfigurationError("demand profile must be a non-empty 1-D series")
        if not np.all(np.isfinite(samples)) or np.any(samples < 0):
            raise ConfigurationError("demand samples must be finite and non-negative")
        if self.ceiling < samples.max():
            raise ConfigurationError(
                f"demand ceiling {self.ceiling} is below the largest sample {samples.max()}"
            )

    def __len__(self) -> int:
        return int(self.samples.size)


def _step_loads(rng: np.random.Generator, length: int, dt: float, mean_duration: float) -> np.ndarray:
    """Piecewise-constant loads in [-1, 1] with exponential holding times"""
    out = np.empty(length)
    pos = 0
    while pos < length:
        hold = max(1, int(round(rng.exponential(mean_duration / dt))))
        out[pos:pos + hold] = rng.uniform(-1.0, 1.0)
        pos += hold
    return out


def generate_demand(
    seed: int,
    length: int,
    pattern: Union[DemandPattern, str] = DemandPattern.MIXED,
    *,
    ceiling: float,
    dt: float = 5.0,
    config: Optional[DemandConfig] = None,
) -> DemandProfile:
    """Deterministic synthetic demand clamped to [0, ceiling]

    DailyWave is a diurnal sinusoid, StepLoads random load changes around the
    base level, Mixed superimposes both plus white noise.
    """
    if length <= 0:
        raise ConfigurationError(f"demand length must be positive, got {length}")
    if isinstance(pattern, str) and not isinstance(pattern, DemandPattern):
        pattern = DemandPattern.parse(pattern)
    cfg = config or DemandConfig()
    rng = np.random.default_rng(seed)

    t = np.arange(length) * dt
    base = np.full(length, cfg.base_fraction)
    wave = cfg.amplitude * np.sin(2.0 * np.pi * t / SECONDS_PER_DAY - np.pi / 2.0)

    if pattern is DemandPattern.DAILY_WAVE:
        fraction = base + wave
    elif pattern is DemandPattern.STEP_LOADS:
        fraction = base + cfg.step_fraction * _step_loads(rng, length, dt, cfg.mean_step_duration)
    else:
        steps = cfg.step_fraction * _step_loads(rng, length, dt, cfg.mean_step_duration)
        noise = cfg.noise * rng.standard_normal(length)
        fraction = base + wave + steps + noise

    samples = np.clip(fraction * ceiling, 0.0, ceiling)
    return DemandProfile(samples=samples, ceiling=ceiling, dt=dt)


def _parse_timestamps(column: pd.Series) -> pd.Series:
    seconds = pd.to_numeric(column, errors="coerce")
    if seconds.notna().all():
        return seconds.astype(float)
    stamps = pd.to_datetime(column, errors="coerce")
    if stamps.notna().all():
        return (stamps - stamps.iloc[0]).dt.total_seconds()
    bad = int(np.flatnonzero(stamps.isna().to_numpy())[0])
    raise ConfigurationError(f"line {bad + 2}: unreadable timestamp '{column.iloc[bad]}'")


def read_demand_csv(
    path: Union[str, Path], dt: float, ceiling: Optional[float] = None
) -> DemandProfile:
    """Load a `timestamp,flow_m3s` file whose rows are exactly dt apart"""
    path = Path(path)
    if not path.is_file():
        raise ConfigurationError(f"demand file not found: {path}")
    try:
        frame = pd.read_csv(path, dtype=str, skip_blank_lines=False)
    except (pd.errors.ParserError, UnicodeDecodeError) as e:
        raise ConfigurationError(f"{path}: cannot parse demand CSV ({e})") from e
    if list(frame.columns) != CSV_COLUMNS:
        raise ConfigurationError(
            f"{path} line 1: expected header '{','.join(CSV_COLUMNS)}', got '{','.join(frame.columns)}'"
        )
    if frame.empty:
        raise ConfigurationError(f"{path}: no demand rows")

    flows = pd.to_numeric(frame["flow_m3s"], errors="coerce")
    bad = flows.isna() | (flows < 0)
    if bad.any():
        row = int(np.flatnonzero(bad.to_numpy())[0])
        raise ConfigurationError(
            f"{path} line {row + 2}: invalid flow '{frame['flow_m3s'].iloc[row]}'"
        )

    seconds = _parse_timestamps(frame["timestamp"])
    gaps = np.diff(seconds.to_numpy())
    off = np.flatnonzero(np.abs(gaps - dt) > 1e-6)
    if off.size:
        row = int(off[0]) + 1
        raise ConfigurationError(
            f"{path} line {row + 2}: row spacing {gaps[off[0]]} s, expected {dt} s"
        )

    samples = flows.to_numpy(dtype=float)
    top = float(samples.max())
    if ceiling is None:
        ceiling = top if top > 0 else 1.0
    elif top > ceiling:
        logger.warning(f"⚠️  demand peak {top:.4f} m³/s exceeds ceiling {ceiling:.4f}; raising ceiling")
        ceiling = top
    logger.info(f"Loaded {samples.size} demand samples from {path}")
    return DemandProfile(samples=samples, ceiling=ceiling, dt=dt)


def write_demand_csv(profile: DemandProfile, path: Union[str, Path]) -> Path:
    """Write a profile in the ingestion format (timestamps in seconds)"""
    path = Path(path)
    frame = pd.DataFrame({
        "timestamp": np.arange(len(profile)) * profile.dt,
        "flow_m3s": profile.samples,
    })
    frame.to_csv(path, index=False)
    return path
