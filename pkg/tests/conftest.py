"""
测试公共夹具
"""

import numpy as np
import pytest

from app.core.environment import Environment
from app.core.scenario import builtin_scenario, validate_scenario
from app.models import GenerativeArm


class UnitEnvironment:
    """每次拉动奖励与成本都为 1 的确定性环境"""

    def __init__(self, n_arms: int):
        self.n_arms = n_arms
        self.reward_bound = 1.0
        self.cost_floor = 1.0
        self.cost_ceiling = 1.0

    def pull(self, arm, round_, rng):
        return 1.0, 1.0

    def oracle_arm(self, round_):
        return 1


def physical_arm(h_max=3, p=0.7, arrival=1.0, delta=6.0, intensity=1.0, distance=1.0) -> GenerativeArm:
    return GenerativeArm.model_validate(
        {
            "server": {
                "geometry": {"intensity": intensity, "tx_range": 1.0, "distance": distance, "h_max": h_max},
                "queue": {"service_rate": 2.0, "arrival_schedule": [[1, arrival]]},
                "link": {"success_schedule": [[1, p]]},
                "energy": {"a": 1.0, "a_prime": 0.5, "a_second": 0.5},
            },
            "qos": {"delta": delta},
        }
    )


def parametric_scenario(budget=300.0, policies=None, arms=None, replications=3, **extra):
    arms = arms or [
        {"reward_mean_schedule": [[1, 0.5], [100, 0.1]], "cost_mean_schedule": 1.5, "shift": 1.0},
        {"reward_mean_schedule": [[1, 0.3], [100, 0.8]], "cost_mean_schedule": [[1, 1.5], [150, 1.2]], "shift": 1.0},
    ]
    policies = policies or [{"kind": "BPRPC-SWUCB", "tau": 50}, {"kind": "UCB1"}, {"kind": "EpsGreedy"}]
    return validate_scenario(
        {
            "name": "small",
            "budget": budget,
            "replications": replications,
            "base_seed": 7,
            "environment": {"kind": "parametric", "arms": arms},
            "policies": policies,
            **extra,
        }
    )


@pytest.fixture
def unit_env():
    return UnitEnvironment


@pytest.fixture
def rng():
    return np.random.default_rng(2020)


@pytest.fixture(scope="session")
def table2():
    return builtin_scenario("table2")


@pytest.fixture(scope="session")
def table2_env(table2):
    return Environment(table2.environment)


@pytest.fixture(scope="session")
def physical():
    return builtin_scenario("physical")


@pytest.fixture
def default_arm():
    return physical_arm()


@pytest.fixture
def small_scenario():
    return parametric_scenario()
