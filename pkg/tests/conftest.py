import numpy as np
import pytest
import torch

from environment.demand import DemandProfile
from environment.scenarios import Scenario, get_preset, with_overrides
from plant.config import CompressorKind, CompressorSpec, SystemConfig
from policy.params import PolicyParams, save_params


@pytest.fixture
def fast_variable_unit():
    """Variable-speed unit with max_flow 0.05 m³/s and affine curve 5 + 25 f"""
    return CompressorSpec(
        id=1, kind=CompressorKind.VARIABLE_SPEED, rated_power=30.0,
        max_flow=0.05, min_flow_fraction=0.2, power_curve=[5.0, 25.0],
    )


@pytest.fixture
def single_unit_scenario(fast_variable_unit):
    return Scenario(
        name="single",
        system=SystemConfig(compressors=[fast_variable_unit], storage_volume=5.0),
        horizon=1,
        episode_length=10,
    )


@pytest.fixture
def zero_demand():
    return DemandProfile(samples=np.zeros(40), ceiling=0.05, dt=5.0)


@pytest.fixture
def small_1c1f():
    """1C1F with short episodes and a training setup sized for unit tests"""
    return with_overrides(
        get_preset("1C1F"),
        episode_length=40,
        demand={"length": 400},
        train={
            "rollout_workers": 1,
            "steps_per_iteration": 64,
            "minibatch_size": 32,
            "sequence_length": 16,
            "epochs_per_iteration": 2,
            "hidden_size": 16,
            "max_iterations": 2,
        },
        explain={"n_background": 32, "n_test": 6, "n_saliency_states": 50, "n_permutations": 200,
                 "time_steps": 12, "sweep_points": 11},
    )


@pytest.fixture
def zero_policy_file(tmp_path):
    scenario = get_preset("1C1F")
    params = PolicyParams.zeros(scenario.obs_dim, scenario.act_dim, hidden_size=16)
    return save_params(params, tmp_path / "zero.pt", scenario.environment_hash())


@pytest.fixture
def constant_policy():
    return lambda obs: torch.full((obs.shape[0], 1), 0.7, dtype=obs.dtype)


@pytest.fixture
def background():
    return np.random.default_rng(11).uniform(-1.0, 1.0, size=(64, 3))
