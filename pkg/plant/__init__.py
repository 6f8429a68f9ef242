# Compressed-air plant model
from plant.config import CompressorKind, CompressorSpec, SystemConfig
from plant.physics import compressor_flow, compressor_power, pressure_step
from plant.state import PlantState

__all__ = [
    "CompressorKind",
    "CompressorSpec",
    "SystemConfig",
    "PlantState",
    "pressure_step",
    "compressor_flow",
    "compressor_power",
]
