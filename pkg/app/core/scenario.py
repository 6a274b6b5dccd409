"""
场景加载模块 - YAML 场景文件与内置场景
"""

import logging
import os
from typing import Any, Dict

import yaml
from pydantic import ValidationError

from app.core.exceptions import ScenarioParseError, ScenarioValidationError
from app.models import Scenario, describe_validation_error

logger = logging.getLogger(__name__)

# 对比实验的六个策略，参数取 POLICY_DEFAULTS
_COMPARED_POLICIES = [
    {"kind": "BPRPC-SWUCB"},
    {"kind": "KUBE"},
    {"kind": "UCB1"},
    {"kind": "UCB-based"},
    {"kind": "UCB-BV1"},
    {"kind": "EpsGreedy"},
]

TABLE2_SCENARIO: Dict[str, Any] = {
    "name": "table2",
    "budget": 15000,
    "environment": {
        "kind": "parametric",
        "arms": [
            {
                "reward_mean_schedule": [[1, 0.5], [500, 0.1], [1000, 0.2], [2000, 0.8], [4000, 0.2]],
                "cost_mean_schedule": [[1, 1.1], [500, 1.8], [2000, 1.2], [4000, 1.5]],
                "shift": 1.0,
            },
            {
                "reward_mean_schedule": [[1, 0.4], [1000, 0.9], [2000, 0.1], [4000, 0.2], [8000, 0.8]],
                "cost_mean_schedule": [[1, 1.2], [500, 1.9], [1000, 1.1], [2000, 1.2], [4000, 1.9], [8000, 1.1]],
                "shift": 1.0,
            },
            {
                "reward_mean_schedule": [[1, 0.3], [500, 0.8], [1000, 0.3], [4000, 0.9], [8000, 0.1]],
                "cost_mean_schedule": [[1, 1.4], [500, 1.1], [1000, 1.9], [4000, 1.1], [8000, 1.6]],
                "shift": 1.0,
            },
        ],
    },
    "policies": _COMPARED_POLICIES,
}


def _server(intensity, tx_range, distance, h_max, service_rate, arrivals, success, delta=6.0) -> Dict[str, Any]:
    return {
        "server": {
            "geometry": {"intensity": intensity, "tx_range": tx_range, "distance": distance, "h_max": h_max},
            "queue": {"service_rate": service_rate, "arrival_schedule": arrivals},
            "link": {"success_schedule": success},
            "energy": {"a": 1.0, "a_prime": 0.5, "a_second": 0.5},
        },
        "qos": {"delta": delta},
    }


PHYSICAL_SCENARIO: Dict[str, Any] = {
    "name": "physical",
    "budget": 8000,
    "environment": {
        "kind": "generative",
        "arms": [
            _server(1.0, 1.0, 1.0, 3, 2.0, [[1, 1.0]], [[1, 0.7]]),
            _server(0.5, 1.0, 1.5, 4, 3.0, [[1, 0.5], [1500, 2.5]], [[1, 0.9], [3000, 0.6]]),
            _server(2.0, 1.0, 0.5, 2, 1.5, [[1, 1.0], [1000, 0.2]], [[1, 0.5], [2500, 0.95]]),
        ],
    },
    "policies": _COMPARED_POLICIES,
}

BUILTIN_SCENARIOS: Dict[str, Dict[str, Any]] = {
    "table2": TABLE2_SCENARIO,
    "physical": PHYSICAL_SCENARIO,
}


def validate_scenario(data: Any) -> Scenario:
    """
    校验场景字典

    Raises:
        ScenarioValidationError: 违反约束时，消息包含字段路径
    """
    if not isinstance(data, dict):
        raise ScenarioValidationError(f"场景必须是映射类型，实际为 {type(data).__name__}")
    try:
        return Scenario.model_validate(data)
    except ValidationError as e:
        raise ScenarioValidationError(describe_validation_error(e)) from e


def builtin_scenario(name: str) -> Scenario:
    """获取内置场景"""
    if name not in BUILTIN_SCENARIOS:
        raise ScenarioValidationError(f"未知的内置场景: {name}，可选 {sorted(BUILTIN_SCENARIOS)}")
    return validate_scenario(BUILTIN_SCENARIOS[name])


def parse_scenario(text: str) -> Scenario:
    """
    解析 YAML 文本

    Raises:
        ScenarioParseError: YAML 语法错误（带行号）
        ScenarioValidationError: 场景内容不合法
    """
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as e:
        mark = getattr(e, "problem_mark", None)
        line = mark.line + 1 if mark is not None else None
        problem = getattr(e, "problem", None) or str(e)
        raise ScenarioParseError(f"YAML 解析失败: {problem}", line=line) from e
    return validate_scenario(data)


def load_scenario(path: str) -> Scenario:
    """
    加载场景：内置名称（table2 / physical）或 YAML 文件路径

    Args:
        path: 场景名或文件路径

    Returns:
        Scenario: 校验后的场景
    """
    if path in BUILTIN_SCENARIOS and not os.path.exists(path):
        logger.info(f"📦 使用内置场景: {path}")
        return builtin_scenario(path)

    with open(path, "r", encoding="utf-8") as f:
        text = f.read()
    scenario = parse_scenario(text)
    logger.info(f"📂 加载场景: {path} (name={scenario.name}, arms={len(scenario.environment.arms)})")
    return scenario


def dump_scenario(scenario: Scenario) -> str:
    """把场景序列化为 YAML（参数表写作 [回合, 值] 对）"""
    data = scenario.model_dump(mode="json", exclude_none=True)
    return yaml.safe_dump(data, sort_keys=False, allow_unicode=True)
