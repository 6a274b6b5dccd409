"""
核心组件模块 - 网络模型、环境、策略、仿真引擎与理论上界
"""

from .bound import bound_inputs_for, gap, lemma1_cap, suggested_window, theorem1_bound
from .cache import AnalyticCache, analytic_cache, cached_analytic
from .engine import (
    MonteCarloResult,
    RegretCurve,
    Trace,
    monte_carlo,
    oracle_episode,
    regret_curves,
    run_episode,
)
from .environment import Environment
from .policies import create_policy, oracle_select
from .scenario import builtin_scenario, dump_scenario, load_scenario

__all__ = [
    'AnalyticCache',
    'analytic_cache',
    'cached_analytic',
    'Environment',
    'create_policy',
    'oracle_select',
    'Trace',
    'RegretCurve',
    'MonteCarloResult',
    'run_episode',
    'oracle_episode',
    'regret_curves',
    'monte_carlo',
    'gap',
    'lemma1_cap',
    'theorem1_bound',
    'suggested_window',
    'bound_inputs_for',
    'load_scenario',
    'builtin_scenario',
    'dump_scenario',
]
