"""
Tank pressure dynamics and per-compressor flow/power behavior

All functions are pure. Pressures are bar absolute, flows m³/s at tank
conditions, volumes m³.
"""
import math

from numpy.polynomial import polynomial as P

from errors import DomainError
from plant.config import CompressorSpec, SystemConfig
from plant.state import PlantState

# Setpoint at or above which a fixed-speed unit runs
FIXED_SPEED_THRESHOLD = 0.5


def pressure_step(state: PlantState, net_volume: float, config: SystemConfig) -> float:
    """Ideal-gas mass balance: p + ΔV·p / V_storage"""
    p = state.pressure
    if not (math.isfinite(p) and math.isfinite(net_volume)):
        raise DomainError(f"non-finite input to pressure_step: p={p}, net_volume={net_volume}")
    return p + net_volume * p / config.storage_volume


def _check_unit_interval(name: str, value: float) -> None:
    if not math.isfinite(value) or value < 0.0 or value > 1.0:
        raise DomainError(f"{name} must lie in [0, 1], got {value}")


def compressor_flow(spec: CompressorSpec, setpoint: float) -> float:
    """Delivered flow in m³/s for a normalized setpoint"""
    _check_unit_interval("setpoint", setpoint)
    if spec.is_fixed_speed:
        return spec.max_flow if setpoint >= FIXED_SPEED_THRESHOLD else 0.0
    if setpoint < spec.min_flow_fraction:
        return 0.0
    return setpoint * spec.max_flow


def compressor_power(spec: CompressorSpec, flow_fraction: float) -> float:
    """Electrical power in kW at a given flow fraction; an idle unit draws nothing"""
    _check_unit_interval("flow_fraction", flow_fraction)
    if flow_fraction == 0.0:
        return 0.0
    return float(P.polyval(flow_fraction, spec.power_curve))
