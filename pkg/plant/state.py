"""
Plant state owned by one environment instance
"""
import math
from dataclasses import dataclass, replace
from typing import Tuple

from errors import DomainError
from plant.config import SystemConfig


@dataclass(frozen=True)
class PlantState:
    """Tank pressure, compressor levels and fixed-speed switching budget

    levels are flow fractions per compressor; switch_allowance is aligned
    with the compressor list and stays 0.0 for variable-speed units.
    step_index is the absolute position in the demand profile.
    """

    pressure: float
    levels: Tuple[float, ...]
    switch_allowance: Tuple[float, ...]
    step_index: int = 0

    def __post_init__(self):
        if not math.isfinite(self.pressure) or self.pressure <= 0:
            raise DomainError(f"pressure must be finite and positive, got {self.pressure}")
        if len(self.levels) != len(self.switch_allowance):
            raise DomainError("levels and switch_allowance must have one entry per compressor")
        if any(not 0.0 <= lv <= 1.0 for lv in self.levels):
            raise DomainError(f"levels must lie in [0, 1], got {self.levels}")
        if any(a < 0 for a in self.switch_allowance):
            raise DomainError(f"switch allowance cannot be negative, got {self.switch_allowance}")

    @classmethod
    def initial(cls, config: SystemConfig, pressure: float, step_index: int = 0) -> "PlantState":
        """All units off, full switching budget"""
        return cls(
            pressure=pressure,
            levels=tuple(0.0 for _ in config.compressors),
            switch_allowance=tuple(
                float(c.max_switches_per_hour) if c.is_fixed_speed else 0.0
                for c in config.compressors
            ),
            step_index=step_index,
        )

    def with_pressure(self, pressure: float) -> "PlantState":
        return replace(self, pressure=pressure)
