import numpy as np
import pandas as pd
import pytest

from environment.compressed_air_env import CompressedAirEnv
from environment.demand import (
    DemandConfig,
    DemandPattern,
    DemandProfile,
    generate_demand,
    read_demand_csv,
    write_demand_csv,
)
from environment.dynamics import EPISODE_END, PRESSURE_OUT_OF_BAND, env_step
from environment.observation import feature_labels, make_observation
from environment.scenarios import PRESETS, get_preset, load_scenario, with_overrides
from errors import ConfigurationError, EndOfDataError, UsageError
from plant.physics import compressor_flow, pressure_step
from plant.state import PlantState


class TestEnvStep:
    def test_idle_plant_holds_pressure(self, single_unit_scenario, zero_demand):
        state = PlantState.initial(single_unit_scenario.system, 8.0)
        outcome = env_step(state, [0.0], 0.0, single_unit_scenario, zero_demand, episode_end=10)
        assert outcome.state.pressure == 8.0
        assert outcome.reward.energy_cost == 0.0
        assert not outcome.terminated

    def test_full_output_into_closed_tank(self, single_unit_scenario, zero_demand):
        state = PlantState.initial(single_unit_scenario.system, 7.0)
        outcome = env_step(state, [1.0], 0.0, single_unit_scenario, zero_demand, episode_end=10)
        assert outcome.state.pressure == pytest.approx(7.35)
        assert outcome.state.step_index == 1
        assert outcome.state.levels == (1.0,)

    def test_balanced_flow(self, single_unit_scenario, zero_demand):
        state = PlantState.initial(single_unit_scenario.system, 8.0)
        outcome = env_step(state, [1.0], 0.05, single_unit_scenario, zero_demand, episode_end=10)
        assert outcome.state.pressure == 8.0

    def test_overpressure_is_penalized(self, single_unit_scenario, zero_demand):
        state = PlantState.initial(single_unit_scenario.system, 8.3)
        outcome = env_step(state, [0.6], 0.01, single_unit_scenario, zero_demand, episode_end=10)
        assert outcome.reward.pressure_penalty > 0

    def test_reward_identity_holds_exactly_on_random_steps(self):
        scenario = get_preset("3C1F")
        profile = DemandProfile(samples=np.zeros(4), ceiling=scenario.demand_ceiling)
        rng = np.random.default_rng(0)
        charged = 0
        for _ in range(10_000):
            state = PlantState(
                pressure=rng.uniform(6.5, 9.5),
                levels=tuple(rng.uniform(0.0, 1.0, 3)),
                switch_allowance=(rng.uniform(0.0, 6.0), 0.0, 0.0),
            )
            outcome = env_step(state, rng.uniform(0.0, 1.0, 3), rng.uniform(0.0, 0.03), scenario, profile,
                               episode_end=1)
            r = outcome.reward
            assert r.total == -(r.energy_cost + r.pressure_penalty + r.switching_penalty)
            assert r.to_dict()["reward"] == r.total
            charged += r.switching_penalty > 0
        assert charged > 0

    def test_switch_allowance_stays_within_hourly_limit(self):
        scenario = get_preset("3C1F")
        system = scenario.system
        limit = system.compressors[0].max_switches_per_hour
        profile = DemandProfile(samples=np.zeros(2001), ceiling=scenario.demand_ceiling)
        rng = np.random.default_rng(1)
        state = PlantState.initial(system, system.p_ref)
        violations = 0
        for _ in range(2000):
            outcome = env_step(state, rng.uniform(0.0, 1.0, 3), 0.02, scenario, profile, episode_end=2000)
            allowance = outcome.state.switch_allowance
            assert 0.0 <= allowance[0] <= limit
            assert allowance[1:] == (0.0, 0.0)
            violations += int(outcome.violations.sum())
            # hold pressure at the reference so only the switching budget evolves
            state = PlantState(pressure=system.p_ref, levels=outcome.state.levels, switch_allowance=allowance,
                               step_index=outcome.state.step_index)
        assert violations > 0

    def test_pressure_trace_matches_composed_tank_updates(self):
        scenario = get_preset("1C1F")
        system = scenario.system
        profile = DemandProfile(samples=np.zeros(301), ceiling=scenario.demand_ceiling)
        rng = np.random.default_rng(2)
        state = PlantState.initial(system, system.p_ref)
        manual = system.p_ref
        growth = 1.0
        for _ in range(300):
            action = rng.uniform(0.0, 1.0, 1)
            supplied = compressor_flow(system.compressors[0], float(action[0]))
            demand = max(0.0, supplied + rng.normal(0.0, 0.002))
            outcome = env_step(state, action, demand, scenario, profile, episode_end=300)

            net_volume = (supplied - demand) * system.dt
            manual = pressure_step(PlantState.initial(system, manual), net_volume, system)
            growth *= 1.0 + net_volume / system.storage_volume
            assert outcome.state.pressure == pytest.approx(manual, rel=1e-12)
            assert outcome.state.pressure == pytest.approx(system.p_ref * growth, rel=1e-12)
            state = outcome.state
        assert outcome.reason == EPISODE_END

    def test_idle_plant_without_demand_earns_exactly_zero(self):
        scenario = get_preset("3C1F")
        profile = DemandProfile(samples=np.zeros(scenario.episode_length + scenario.horizon),
                                ceiling=scenario.demand_ceiling)
        env = CompressedAirEnv(scenario, profile)
        env.reset(options={"pressure": scenario.system.p_ref})
        total = 0.0
        while not env.done:
            _, reward, _, _, info = env.step(np.zeros(3))
            total += reward
            assert info["state"].pressure == scenario.system.p_ref
        assert total == 0.0

    def test_finished_episode(self, single_unit_scenario, zero_demand):
        state = PlantState.initial(single_unit_scenario.system, 8.0, step_index=10)
        with pytest.raises(UsageError):
            env_step(state, [0.0], 0.0, single_unit_scenario, zero_demand, episode_end=10)


class TestCompressedAirEnv:
    def test_episode_truncates_at_length(self, single_unit_scenario, zero_demand):
        env = CompressedAirEnv(single_unit_scenario, zero_demand)
        obs, info = env.reset()
        assert obs.shape == (single_unit_scenario.obs_dim,)
        for _ in range(single_unit_scenario.episode_length):
            obs, reward, terminated, truncated, info = env.step(np.array([0.0]))
        assert truncated and not terminated
        assert info["reason"] == EPISODE_END
        with pytest.raises(UsageError):
            env.step(np.array([0.0]))

    def test_runaway_pressure_terminates(self, single_unit_scenario, zero_demand):
        scenario = with_overrides(single_unit_scenario, episode_length=30)
        env = CompressedAirEnv(scenario, zero_demand)
        env.reset()
        terminated = truncated = False
        while not (terminated or truncated):
            _, _, terminated, truncated, info = env.step(np.array([1.0]))
        assert terminated
        assert info["reason"] == PRESSURE_OUT_OF_BAND

    def test_random_start_is_seeded(self, small_1c1f):
        profile = small_1c1f.build_demand()
        starts = []
        for _ in range(2):
            env = CompressedAirEnv(small_1c1f, profile, random_start=True)
            env.reset(seed=5)
            starts.append(env.state.step_index)
        assert starts[0] == starts[1]

    def test_profile_shorter_than_episode(self, single_unit_scenario):
        with pytest.raises(ConfigurationError):
            CompressedAirEnv(single_unit_scenario, DemandProfile(np.zeros(5), ceiling=1.0))


class TestObservation:
    def _profile(self):
        return DemandProfile(samples=np.array([0.0, 0.025, 0.05, 0.05]), ceiling=0.05)

    def test_normalization(self, single_unit_scenario):
        system = single_unit_scenario.system
        at_ref = make_observation(PlantState.initial(system, 8.0), self._profile(), 1, 8.0)
        above = make_observation(PlantState.initial(system, 8.3), self._profile(), 1, 8.0)
        assert at_ref.pressure_norm == 0.0
        assert above.pressure_norm == pytest.approx(0.0375)

    def test_forecast_window(self, single_unit_scenario):
        state = PlantState.initial(single_unit_scenario.system, 8.0, step_index=1)
        obs = make_observation(state, self._profile(), 2, 8.0)
        np.testing.assert_allclose(obs.forecast, [0.5, 1.0])
        assert obs.as_array().shape == (1 + 2 + 1,)

    def test_end_of_data(self, single_unit_scenario):
        state = PlantState.initial(single_unit_scenario.system, 8.0, step_index=3)
        with pytest.raises(EndOfDataError):
            make_observation(state, self._profile(), 2, 8.0)

    def test_labels(self):
        assert feature_labels(1, 3) == ["PR", "F", "CL1", "CL2", "CL3"]
        assert feature_labels(3, 1) == ["PR", "F1", "F2", "F3", "CL1"]


class TestDemand:
    def test_seeded_generation_is_deterministic(self):
        a = generate_demand(42, 1000, "Mixed", ceiling=0.03)
        b = generate_demand(42, 1000, DemandPattern.MIXED, ceiling=0.03)
        np.testing.assert_array_equal(a.samples, b.samples)

    def test_flat_daily_wave(self):
        profile = generate_demand(1, 500, "DailyWave", ceiling=0.03, config=DemandConfig(amplitude=0.0))
        assert np.ptp(profile.samples) == 0.0

    def test_mixed_day_stays_within_ceiling(self):
        profile = generate_demand(7, 17280, "mixed", ceiling=0.03)
        assert len(profile) == 17280
        assert profile.samples.min() >= 0.0
        assert profile.samples.max() <= 0.03

    def test_unknown_pattern(self):
        with pytest.raises(ConfigurationError):
            generate_demand(0, 10, "square", ceiling=1.0)

    def test_csv_round_trip(self, tmp_path):
        profile = generate_demand(3, 50, "step_loads", ceiling=0.03)
        loaded = read_demand_csv(write_demand_csv(profile, tmp_path / "d.csv"), dt=5.0, ceiling=0.03)
        np.testing.assert_allclose(loaded.samples, profile.samples)

    def test_csv_reports_line_number(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("timestamp,flow_m3s\n0,0.01\n5,abc\n10,0.02\n")
        with pytest.raises(ConfigurationError, match="line 3"):
            read_demand_csv(path, dt=5.0)

    def test_csv_spacing_must_match_dt(self, tmp_path):
        path = tmp_path / "gap.csv"
        pd.DataFrame({"timestamp": [0, 5, 15], "flow_m3s": [0.01, 0.01, 0.01]}).to_csv(path, index=False)
        with pytest.raises(ConfigurationError, match="spacing"):
            read_demand_csv(path, dt=5.0)


class TestScenarios:
    @pytest.mark.parametrize("name, obs_dim, act_dim", [("1C1F", 3, 1), ("3C1F", 5, 3), ("3C3F", 7, 3), ("3C5F", 9, 3)])
    def test_presets(self, name, obs_dim, act_dim):
        scenario = get_preset(name)
        assert (scenario.obs_dim, scenario.act_dim) == (obs_dim, act_dim)

    def test_three_compressor_composition(self):
        kinds = [c.is_fixed_speed for c in get_preset("3C1F").system.compressors]
        assert kinds == [True, False, False]

    def test_environment_hash_tracks_layout(self):
        hashes = {get_preset(name).environment_hash() for name in PRESETS}
        assert len(hashes) == len(PRESETS)

    def test_train_settings_do_not_change_environment_hash(self, small_1c1f):
        assert small_1c1f.environment_hash() == with_overrides(small_1c1f, train={"max_iterations": 9}).environment_hash()
        assert small_1c1f.config_hash() != with_overrides(small_1c1f, train={"max_iterations": 9}).config_hash()

    def test_unknown_preset(self):
        with pytest.raises(ConfigurationError):
            get_preset("4C2F")

    def test_yaml_with_unknown_key(self, tmp_path):
        path = tmp_path / "plant.yaml"
        path.write_text(
            "name: custom\n"
            "system:\n"
            "  compressors:\n"
            "    - {id: 1, kind: variable_speed, rated_power: 30, max_flow: 0.01}\n"
            "turbo: true\n"
        )
        with pytest.raises(ConfigurationError):
            load_scenario(path)

    def test_yaml_scenario(self, tmp_path):
        path = tmp_path / "plant.yaml"
        path.write_text(
            "name: custom\n"
            "horizon: 2\n"
            "system:\n"
            "  electricity_price: 0.25\n"
            "  compressors:\n"
            "    - {id: 1, kind: variable_speed, rated_power: 30, max_flow: 0.01}\n"
            "    - {id: 2, kind: fixed_speed, rated_power: 30, max_flow: 0.01}\n"
        )
        scenario = load_scenario(path)
        assert scenario.obs_dim == 5
        assert scenario.reward.electricity_price == 0.25
