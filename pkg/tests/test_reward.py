import numpy as np
import pytest

from environment.reward import (
    RewardBreakdown,
    RewardConfig,
    energy_cost,
    pressure_penalty,
    underpressure_penalty,
    update_switch_counter,
)
from plant.config import CompressorSpec
from plant.state import PlantState

PRICED = RewardConfig(electricity_price=0.30)


class TestEnergyCost:
    @pytest.mark.parametrize(
        "powers, expected",
        [([0.0, 0.0, 0.0], 0.0), ([30.0], 0.0125), ([30.0, 15.0], 0.01875)],
    )
    def test_examples(self, powers, expected):
        assert energy_cost(powers, PRICED, dt=5.0) == pytest.approx(expected, abs=1e-12)


class TestPressurePenalties:
    def test_at_reference(self):
        assert pressure_penalty(8.0, 8.0, 1.0) == 0.0

    def test_overpressure(self):
        assert pressure_penalty(8.4, 8.0, 1.0) == pytest.approx(0.05)

    def test_below_reference_is_free(self):
        assert pressure_penalty(7.5, 8.0, 10.0) == 0.0

    def test_underpressure(self):
        assert underpressure_penalty(7.0, 7.0, 10.0) == 0.0
        assert underpressure_penalty(6.3, 7.0, 10.0) == pytest.approx(1.0)


class TestSwitchCounter:
    """Rolling allowance for a fixed-speed unit limited to 4 switches per hour"""

    spec = CompressorSpec(id=0, kind="fixed_speed", rated_power=30.0, max_flow=0.01, max_switches_per_hour=4.0)

    def _update(self, allowance, new_level):
        state = PlantState(pressure=8.0, levels=(0.0,), switch_allowance=(allowance,))
        return update_switch_counter(state, [new_level], [self.spec], dt=5.0)

    def test_refill_without_transition(self):
        allowances, violations = self._update(2.0, 0.0)
        assert allowances[0] == pytest.approx(2.0 + 4.0 * 5.0 / 3600.0)
        assert violations.sum() == 0

    def test_transition_spends_one(self):
        allowances, violations = self._update(1.5, 1.0)
        assert allowances[0] == pytest.approx(0.50556, abs=1e-5)
        assert violations.sum() == 0

    def test_insufficient_allowance_is_a_violation(self):
        allowances, violations = self._update(0.3, 1.0)
        assert allowances[0] == 0.0
        assert violations.sum() == 1

    def test_allowance_is_capped(self):
        allowances, _ = self._update(4.0, 0.0)
        assert allowances[0] == 4.0

    def test_variable_speed_units_have_no_budget(self, fast_variable_unit):
        state = PlantState(pressure=8.0, levels=(0.0,), switch_allowance=(0.0,))
        allowances, violations = update_switch_counter(state, [1.0], [fast_variable_unit], dt=5.0)
        assert allowances == (0.0,)
        assert np.all(violations == 0)


def test_breakdown_total_is_negative_sum():
    breakdown = RewardBreakdown.from_components(0.01, 0.2, 0.05)
    assert breakdown.total == pytest.approx(-0.26)
    assert breakdown.to_dict()["reward"] == breakdown.total
