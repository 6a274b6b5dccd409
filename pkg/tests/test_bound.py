"""
理论量测试：间隔、Oracle 奖励上限与遗憾上界
"""

import math

import pytest

from app.core.bound import bound_inputs_for, gap, lemma1_cap, suggested_window, theorem1_bound
from app.core.environment import Environment
from app.core.exceptions import DomainError, NoGapError
from app.models import BoundInputs, PolicyConfig
from tests.conftest import parametric_scenario
from tests.test_environment import TABLE2_SEGMENTS


def _inputs(**overrides):
    values = dict(
        budget=15000, r_max=1.0, c_min=1.0, xi=0.6, tau=2000, n_arms=3, change_points=6, gaps=(0.1, 0.2, None)
    )
    values.update(overrides)
    return BoundInputs(**values)


@pytest.mark.parametrize(
    "budget,r_max,c_min,expected",
    [(15000, 1, 1, 15001), (0, 1, 1, 1), (10, 2, 0.5, 42)],
)
def test_lemma1_cap(budget, r_max, c_min, expected):
    assert lemma1_cap(budget, r_max, c_min) == pytest.approx(expected)


def test_lemma1_cap_domain():
    with pytest.raises(DomainError):
        lemma1_cap(10, 1, 0)


def test_gap_two_arm_stationary():
    arms = [
        {"reward_mean_schedule": 0.75, "cost_mean_schedule": 1.5, "shift": 1.0},
        {"reward_mean_schedule": 0.6, "cost_mean_schedule": 1.5, "shift": 1.0},
    ]
    env = Environment(parametric_scenario(arms=arms).environment)
    assert gap(env, 2, 100) == pytest.approx(0.1)
    with pytest.raises(NoGapError):
        gap(env, 1, 100)


def test_table2_gaps_match_segment_scan(table2_env):
    for arm in (1, 2, 3):
        differences = []
        for means in TABLE2_SEGMENTS.values():
            ratios = [mu / eta for mu, eta in means]
            best = max(ratios)
            if ratios.index(best) != arm - 1:
                differences.append(best - ratios[arm - 1])
        assert gap(table2_env, arm, 15000) == pytest.approx(min(differences))


def test_infinite_cost_ceiling_first_term():
    inputs = _inputs()
    finite = _inputs(c_max=1.0)
    # c_max = c_min 时第一项为 0
    assert theorem1_bound(inputs) - theorem1_bound(finite) == pytest.approx(15000.0)


def test_bound_monotonicity():
    base = theorem1_bound(_inputs(c_max=2.0))
    assert theorem1_bound(_inputs(c_max=4.0)) >= base
    assert theorem1_bound(_inputs(c_max=2.0, budget=20000)) >= base
    assert theorem1_bound(_inputs(c_max=2.0, change_points=7)) >= base
    assert theorem1_bound(_inputs(c_max=2.0, n_arms=4, gaps=(0.1, 0.2, None, 0.3))) >= base


def test_bound_decreasing_in_window_without_change_points():
    values = [theorem1_bound(_inputs(c_max=1.0, change_points=0, tau=tau)) for tau in (500, 1000, 2000, 4000)]
    assert all(a > b for a, b in zip(values, values[1:]))


def test_never_suboptimal_arm_uses_limit():
    # Δ 很大时趋近于 None 的取值
    large = theorem1_bound(_inputs(gaps=(1e12, 0.2, None)))
    limit = theorem1_bound(_inputs(gaps=(None, 0.2, None)))
    assert large == pytest.approx(limit, rel=1e-9)


def test_bound_inputs_validation():
    with pytest.raises(ValueError):
        _inputs(xi=0.5)
    with pytest.raises(ValueError):
        _inputs(tau=1)
    with pytest.raises(ValueError):
        _inputs(gaps=(0.1, 0.0, None))


def test_table2_bound_inputs(table2, table2_env):
    inputs = bound_inputs_for(table2_env, table2.policy("BPRPC-SWUCB"), table2.budget)
    assert inputs.change_points == 6
    assert inputs.xi == 0.6 and inputs.tau == 2000
    assert math.isinf(inputs.c_max)
    assert all(g is not None and g > 0 for g in inputs.gaps)
    assert theorem1_bound(inputs) > 0


def test_bound_inputs_override_window(table2, table2_env):
    inputs = bound_inputs_for(table2_env, PolicyConfig(kind="BPRPC-SWUCB"), table2.budget, tau=500, xi=0.8)
    assert inputs.tau == 500 and inputs.xi == 0.8


def test_suggested_window():
    expected = round(math.sqrt(15000 * math.log(15000) / 6))
    assert suggested_window(15000, 6) == expected
    with pytest.raises(DomainError):
        suggested_window(15000, 0)
