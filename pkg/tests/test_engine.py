"""
仿真引擎测试：预算停止规则、遗憾统计与蒙特卡洛汇总
"""

import math

import numpy as np
import pytest

from app.core.bound import bound_inputs_for, lemma1_cap, theorem1_bound
from app.core.engine import (
    ReplicationTask,
    Trace,
    chosen_arm_averages,
    monte_carlo,
    oracle_episode,
    regret_curves,
    run_episode,
    run_replication,
)
from app.core.environment import Environment
from app.core.exceptions import DomainError, ReplicationMismatchError, ScenarioValidationError
from app.core.policies import create_policy
from app.models import PolicyConfig
from tests.conftest import parametric_scenario

STATIONARY_ARMS = [
    {"reward_mean_schedule": 0.5, "cost_mean_schedule": 1.5, "shift": 1.0},
    {"reward_mean_schedule": 0.4, "cost_mean_schedule": 1.5, "shift": 1.0},
]


def _trace(arms, rewards, costs=None, name="p"):
    costs = costs if costs is not None else [1.0] * len(arms)
    return Trace(np.array(arms), np.array(rewards, dtype=float), np.array(costs, dtype=float), 10.0, name)


def test_unit_cost_stopping_round(unit_env, rng):
    env = unit_env(2)
    policy = create_policy(PolicyConfig(kind="UCB1"), env, rng)
    trace = run_episode(policy, env, 10, rng)
    assert trace.stopping_round == 11
    assert trace.total_reward == 11
    assert list(trace.rounds) == list(range(1, 12))


def test_zero_budget_runs_initialization_only(unit_env, rng):
    env = unit_env(3)
    policy = create_policy(PolicyConfig(kind="KUBE"), env, rng)
    trace = run_episode(policy, env, 0, rng)
    assert trace.stopping_round == 3
    assert list(trace.arms) == [1, 2, 3]


def test_negative_budget_rejected(unit_env, rng):
    env = unit_env(2)
    with pytest.raises(DomainError):
        run_episode(create_policy(PolicyConfig(kind="KUBE"), env, rng), env, -1, rng)


def test_oracle_zero_budget_is_empty(table2_env, rng):
    assert oracle_episode(table2_env, 0, rng).stopping_round == 0


def test_oracle_episode_follows_ratio_argmax(table2_env, rng):
    trace = oracle_episode(table2_env, 1500, rng)
    expected = table2_env.oracle_arms(trace.stopping_round)
    np.testing.assert_array_equal(trace.arms, expected)


@pytest.mark.parametrize("kind", ["BPRPC-SWUCB", "KUBE", "UCB1", "UCB-based", "UCB-BV1", "EpsGreedy"])
def test_budget_contract(kind, table2_env):
    budget = 400.0
    policy = create_policy(PolicyConfig(kind=kind, tau=100), table2_env, np.random.default_rng(1))
    trace = run_episode(policy, table2_env, budget, np.random.default_rng(2))
    cumulative = trace.cumulative_cost
    assert trace.stopping_round >= table2_env.n_arms
    assert cumulative[-2] <= budget < cumulative[-1]
    assert trace.total_cost <= budget + trace.max_cost


def test_budget_contract_generative(physical):
    env = Environment(physical.environment)
    policy = create_policy(PolicyConfig(kind="BPRPC-SWUCB", tau=50), env, np.random.default_rng(1))
    trace = run_episode(policy, env, 150.0, np.random.default_rng(2))
    assert trace.cumulative_cost[-2] <= 150.0 < trace.cumulative_cost[-1]


def test_pseudo_regret_is_zero_for_oracle(table2_env, rng):
    oracle = oracle_episode(table2_env, 800, rng)
    curve = regret_curves([oracle], [oracle], "pseudo", table2_env)
    assert np.all(curve.mean == 0.0)
    assert curve.final_regret == 0.0


def test_pseudo_regret_closed_form():
    env = Environment(parametric_scenario(arms=STATIONARY_ARMS).environment)
    never_optimal = _trace([2] * 50, [0.0] * 50)
    oracle = _trace([1] * 50, [1.0] * 50)
    curve = regret_curves([never_optimal], [oracle], "pseudo", env)
    np.testing.assert_allclose(curve.mean, 0.1 * np.arange(1, 51))
    assert curve.final_regret == pytest.approx(5.0)


def test_empirical_regret_pads_shorter_trace():
    policy = _trace([1, 2, 1, 1], [1, 0, 0, 1])
    oracle = _trace([1, 1, 1], [1, 1, 1])
    curve = regret_curves([policy], [oracle], "empirical", truncation_round=4)
    np.testing.assert_allclose(curve.mean, [0, 1, 2, 1])
    assert curve.final_regret == 1.0


def test_regret_averages_and_truncates():
    a = _trace([1, 1, 1], [0, 0, 0])
    b = _trace([1, 1, 1, 1, 1], [1, 1, 1, 1, 1])
    oracle = _trace([1] * 5, [1] * 5)
    curve = regret_curves([a, b], [oracle, oracle], "empirical")
    assert curve.truncation_round == 3
    np.testing.assert_allclose(curve.mean, [0.5, 1.0, 1.5])
    assert curve.final_regret == pytest.approx(2.5)
    assert curve.final_stderr > 0


def test_mismatched_replications():
    trace = _trace([1], [1])
    with pytest.raises(ReplicationMismatchError):
        regret_curves([trace, trace], [trace], "empirical")


def test_pseudo_regret_nondecreasing(table2_env):
    policy = create_policy(PolicyConfig(kind="UCB1"), table2_env, np.random.default_rng(3))
    trace = run_episode(policy, table2_env, 1200, np.random.default_rng(4))
    oracle = oracle_episode(table2_env, 1200, np.random.default_rng(5))
    curve = regret_curves([trace], [oracle], "pseudo", table2_env)
    assert np.all(curve.mean >= 0)
    assert np.all(np.diff(curve.mean) >= -1e-12)


def test_replication_shares_environment_stream():
    scenario = parametric_scenario(policies=[{"kind": "KUBE"}, {"kind": "KUBE", "label": "KUBE-copy"}])
    result = run_replication(ReplicationTask(scenario, 0, 7))
    np.testing.assert_array_equal(result.traces["KUBE"].arms, result.traces["KUBE-copy"].arms)
    np.testing.assert_array_equal(result.traces["KUBE"].costs, result.traces["KUBE-copy"].costs)


def test_single_replication_equals_run_episode(small_scenario):
    result = monte_carlo(small_scenario, n_reps=1, parallelism=1, show_progress=False)
    replication = run_replication(ReplicationTask(small_scenario, 0, small_scenario.base_seed))
    for name, curve in result.curves.items():
        assert result.stopping[name].mean_T == replication.traces[name].stopping_round
        assert curve.final_stderr == 0.0


def test_monte_carlo_is_deterministic(small_scenario):
    first = monte_carlo(small_scenario, parallelism=1, show_progress=False)
    second = monte_carlo(small_scenario, parallelism=1, show_progress=False)
    for name in first.policy_names:
        np.testing.assert_array_equal(first.curves[name].mean, second.curves[name].mean)
        np.testing.assert_array_equal(first.choices[name].modal_arm, second.choices[name].modal_arm)
    np.testing.assert_array_equal(first.oracle_rewards, second.oracle_rewards)


def test_monte_carlo_independent_of_parallelism(small_scenario):
    serial = monte_carlo(small_scenario, n_reps=4, parallelism=1, show_progress=False)
    parallel = monte_carlo(small_scenario, n_reps=4, parallelism=2, show_progress=False)
    for name in serial.policy_names:
        np.testing.assert_array_equal(serial.curves[name].mean, parallel.curves[name].mean)
        assert serial.stopping[name] == parallel.stopping[name]


def test_monte_carlo_aggregates(small_scenario):
    result = monte_carlo(small_scenario, n_reps=5, parallelism=1, show_progress=False, regret_mode="empirical")
    assert result.regret_mode == "empirical"
    truncation = result.truncation_round
    assert truncation == min(stats.min_T for stats in result.stopping.values())
    for name in result.policy_names:
        choices = result.choices[name]
        assert len(choices.optimal_play_rate) == truncation
        assert np.all((choices.optimal_play_rate >= 0) & (choices.optimal_play_rate <= 1))
        assert set(np.unique(choices.modal_arm)) <= {1, 2}
        assert len(result.curves[name].mean) == truncation


def test_oracle_reward_below_cap(small_scenario):
    result = monte_carlo(small_scenario, n_reps=5, parallelism=1, show_progress=False)
    cap = lemma1_cap(small_scenario.budget, 1.0, 1.0)
    assert np.all(result.oracle_rewards <= cap)


def test_truncated_regret_is_last_curve_point():
    a = _trace([1, 1, 1], [0, 0, 0])
    b = _trace([1, 1, 1, 1, 1], [1, 1, 1, 1, 1])
    oracle = _trace([1] * 5, [1] * 5)
    curve = regret_curves([a, b], [oracle, oracle], "empirical")
    assert curve.truncated_regret == pytest.approx(1.5)
    assert curve.truncated_stderr == pytest.approx(1.5)
    assert curve.final_regret == pytest.approx(2.5)


def test_chosen_arm_averages():
    trace = _trace([1, 2, 1, 2, 1], [1, 0, 0, 1, 1], [1.5, 1.2, 2.0, 1.1, 1.25])
    rewards, costs = chosen_arm_averages(trace, 2, 5)
    np.testing.assert_allclose(rewards, [1.0, 0.0, 0.5, 0.5, 2 / 3])
    np.testing.assert_allclose(costs, [1.5, 1.2, 1.75, 1.15, 4.75 / 3])


def test_monte_carlo_chosen_utility(small_scenario):
    result = monte_carlo(small_scenario, n_reps=3, parallelism=1, show_progress=False)
    for choices in result.choices.values():
        assert len(choices.chosen_ratio) == result.truncation_round
        assert np.all((choices.chosen_reward >= 0) & (choices.chosen_reward <= 1))
        assert np.all(choices.chosen_cost >= 1.0)
        assert 0.0 <= choices.optimal_play_fraction(after_round=10) <= 1.0


def test_monte_carlo_rejects_zero_replications(small_scenario):
    with pytest.raises(ScenarioValidationError):
        monte_carlo(small_scenario, n_reps=0, parallelism=1, show_progress=False)


def test_stderr_shrinks_with_more_replications():
    scenario = parametric_scenario(budget=150.0, policies=[{"kind": "UCB1"}])
    small = monte_carlo(scenario, n_reps=150, parallelism=1, show_progress=False)
    large = monte_carlo(scenario, n_reps=300, parallelism=1, show_progress=False)
    ratio = large.curves["UCB1"].final_stderr / small.curves["UCB1"].final_stderr
    assert ratio == pytest.approx(1 / math.sqrt(2), abs=0.15)


@pytest.fixture(scope="module")
def table2_result(table2):
    return monte_carlo(table2, n_reps=100, show_progress=False)


@pytest.mark.slow
def test_table2_ordering_at_truncation_round(table2_result):
    # 各策略的曲线截断在所有策略、所有重复的最小停止回合，比较该回合的平均累计遗憾
    ours = table2_result.curves["BPRPC-SWUCB"]
    assert ours.truncation_round == table2_result.truncation_round
    for name, curve in table2_result.curves.items():
        if name == "BPRPC-SWUCB":
            continue
        margin = 2 * math.hypot(ours.truncated_stderr, curve.truncated_stderr)
        assert ours.truncated_regret + margin < curve.truncated_regret, name


@pytest.mark.slow
def test_table2_optimal_play_after_first_change(table2_result):
    ours = table2_result.choices["BPRPC-SWUCB"].optimal_play_fraction(after_round=500)
    for name, choices in table2_result.choices.items():
        if name != "BPRPC-SWUCB":
            assert ours > choices.optimal_play_fraction(after_round=500), name


@pytest.mark.slow
def test_table2_rewards_below_cap_and_bound(table2, table2_result):
    env = Environment(table2.environment)
    assert np.all(table2_result.oracle_rewards <= lemma1_cap(table2.budget, 1.0, 1.0))
    inputs = bound_inputs_for(env, table2.policy("BPRPC-SWUCB"), table2.budget)
    assert theorem1_bound(inputs) >= table2_result.curves["BPRPC-SWUCB"].final_regret


@pytest.mark.slow
def test_table2_regret_decreases_with_window(table2):
    from app.commands.sweep import sweep

    frame = sweep(table2, [0.6], [500, 1000, 2000], progress=False)
    regrets = frame.sort_values("tau")["mean_regret"].tolist()
    assert regrets[0] > regrets[1] > regrets[2]
