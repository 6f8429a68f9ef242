import math

import numpy as np
import pytest
from pydantic import ValidationError

from errors import DomainError
from plant.config import CompressorKind, CompressorSpec, SystemConfig
from plant.physics import compressor_flow, compressor_power, pressure_step
from plant.state import PlantState


def _fixed(max_flow=0.05, **kwargs):
    return CompressorSpec(id=0, kind=CompressorKind.FIXED_SPEED, rated_power=30.0, max_flow=max_flow, **kwargs)


def _system(storage_volume=5.0):
    return SystemConfig(compressors=[_fixed()], storage_volume=storage_volume)


class TestPressureStep:
    """Ideal-gas tank update"""

    @pytest.mark.parametrize(
        "pressure, net_volume, expected",
        [(8.0, 0.0, 8.0), (7.0, 0.05, 7.07), (8.0, -0.10, 7.84)],
    )
    def test_examples(self, pressure, net_volume, expected):
        state = PlantState.initial(_system(), pressure)
        assert pressure_step(state, net_volume, _system()) == pytest.approx(expected, abs=1e-12)

    def test_non_finite_volume_is_rejected(self):
        state = PlantState.initial(_system(), 8.0)
        with pytest.raises(DomainError):
            pressure_step(state, math.nan, _system())

    def test_repeated_steps_compose_multiplicatively(self):
        rng = np.random.default_rng(0)
        system = _system()
        for _ in range(200):
            volumes = rng.uniform(-0.2, 0.2, size=rng.integers(1, 50))
            p0 = rng.uniform(5.0, 10.0)
            state = PlantState.initial(system, p0)
            for v in volumes:
                state = PlantState.initial(system, pressure_step(state, v, system))
            expected = p0 * np.prod(1.0 + volumes / system.storage_volume)
            assert state.pressure == pytest.approx(expected, rel=1e-12)

    def test_pressure_moves_with_the_sign_of_net_volume(self):
        rng = np.random.default_rng(1)
        system = _system()
        for p, v in zip(rng.uniform(5.0, 10.0, 500), rng.uniform(-0.5, 0.5, 500)):
            change = pressure_step(PlantState.initial(system, p), v, system) - p
            assert np.sign(change) == np.sign(v)

    def test_doubling_volume_halves_the_increment(self):
        rng = np.random.default_rng(2)
        small, large = _system(storage_volume=4.0), _system(storage_volume=8.0)
        volumes = rng.choice([-1.0, 1.0], 200) * rng.uniform(0.05, 0.5, 200)
        for p, v in zip(rng.uniform(5.0, 10.0, 200), volumes):
            state = PlantState.initial(small, p)
            assert pressure_step(state, v, large) - p == pytest.approx((pressure_step(state, v, small) - p) / 2, rel=1e-12)


class TestCompressorFlow:
    def test_fixed_speed_threshold(self):
        spec = _fixed()
        assert compressor_flow(spec, 0.0) == 0.0
        assert compressor_flow(spec, 0.7) == 0.05
        assert compressor_flow(spec, 0.5) == 0.05

    def test_variable_speed(self, fast_variable_unit):
        assert compressor_flow(fast_variable_unit, 0.6) == pytest.approx(0.03)
        assert compressor_flow(fast_variable_unit, 0.1) == 0.0

    def test_flow_is_monotone_in_setpoint(self, fast_variable_unit):
        grid = np.linspace(0.0, 1.0, 1001)
        for spec in (_fixed(), fast_variable_unit):
            flows = [compressor_flow(spec, float(s)) for s in grid]
            assert np.all(np.diff(flows) >= 0.0)
            assert flows[0] == 0.0 and flows[-1] == spec.max_flow

    @pytest.mark.parametrize("setpoint", [-0.1, 1.2, math.nan])
    def test_out_of_range_setpoint_is_not_clamped(self, fast_variable_unit, setpoint):
        with pytest.raises(DomainError):
            compressor_flow(fast_variable_unit, setpoint)


class TestCompressorPower:
    def test_idle_unit_draws_nothing(self, fast_variable_unit):
        assert compressor_power(fast_variable_unit, 0.0) == 0.0

    def test_rated_power_at_full_load(self):
        assert compressor_power(_fixed(), 1.0) == pytest.approx(30.0)

    def test_affine_curve(self, fast_variable_unit):
        assert compressor_power(fast_variable_unit, 0.4) == pytest.approx(15.0)

    def test_power_is_never_negative(self, fast_variable_unit):
        for spec in (_fixed(), fast_variable_unit):
            assert all(compressor_power(spec, float(f)) >= 0.0 for f in np.linspace(0.0, 1.0, 501))


class TestConfigValidation:
    def test_curve_must_reach_rated_power(self):
        with pytest.raises(ValidationError):
            CompressorSpec(id=0, kind="variable_speed", rated_power=30.0, max_flow=0.01, power_curve=[5.0, 20.0])

    def test_fixed_speed_defaults(self):
        spec = _fixed()
        assert spec.is_fixed_speed
        assert spec.max_switches_per_hour == 6.0
        assert spec.power_curve == pytest.approx([4.5, 25.5])

    def test_pressure_ordering(self):
        with pytest.raises(ValidationError):
            SystemConfig(compressors=[_fixed()], p_min=8.0, p_ref=7.5, p_max=8.5)

    def test_duplicate_ids(self):
        with pytest.raises(ValidationError):
            SystemConfig(compressors=[_fixed(), _fixed()])

    def test_unknown_keys_are_rejected(self):
        with pytest.raises(ValidationError):
            SystemConfig(compressors=[_fixed()], volume=5.0)


class TestPlantState:
    def test_initial_state(self):
        state = PlantState.initial(_system(), 8.0, step_index=3)
        assert state.levels == (0.0,)
        assert state.switch_allowance == (6.0,)
        assert state.step_index == 3

    @pytest.mark.parametrize("pressure", [0.0, -1.0, math.inf])
    def test_invalid_pressure(self, pressure):
        with pytest.raises(DomainError):
            PlantState(pressure=pressure, levels=(0.0,), switch_allowance=(0.0,))

    def test_level_outside_unit_interval(self):
        with pytest.raises(DomainError):
            PlantState(pressure=8.0, levels=(1.5,), switch_allowance=(0.0,))
