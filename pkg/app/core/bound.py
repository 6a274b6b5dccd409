"""
理论量计算模块 - 次优间隔 Δ(i)、Oracle 奖励上限与 BPRPC-SWUCB 遗憾上界
"""

import logging
import math
from typing import Optional

import numpy as np
from pydantic import ValidationError

from app.core.environment import Environment
from app.core.exceptions import DomainError, NoGapError
from app.models import BoundInputs, PolicyConfig, describe_validation_error

logger = logging.getLogger(__name__)


def gap(env: Environment, arm: int, horizon: int) -> float:
    """
    次优间隔 Δ(i)：在 i 非最优的回合上，最优臂与 i 的 μ/η 之差的最小值

    Args:
        env: 环境
        arm: 臂编号
        horizon: 截止回合

    Returns:
        float: 间隔

    Raises:
        NoGapError: 该臂在 1..horizon 内始终最优
    """
    env._check_arm(arm)
    mu, eta = env.mean_matrix(horizon)
    ratios = mu / eta
    best = env.oracle_arms(horizon) - 1
    rows = np.flatnonzero(best != arm - 1)
    if len(rows) == 0:
        raise NoGapError(f"臂 {arm} 在回合 1..{horizon} 内始终最优，间隔未定义")
    return float(np.min(ratios[rows, best[rows]] - ratios[rows, arm - 1]))


def lemma1_cap(budget: float, r_max: float, c_min: float) -> float:
    """Oracle 累计奖励上限 (B + c_min)·r_max / c_min"""
    if budget < 0 or r_max <= 0 or c_min <= 0:
        raise DomainError(f"需要 B ≥ 0, r_max > 0, c_min > 0: B={budget}, r_max={r_max}, c_min={c_min}")
    return (budget + c_min) * r_max / c_min


def _window_constant(inputs: BoundInputs, arm_gap: Optional[float]) -> float:
    r, c, xi, tau = inputs.r_max, inputs.c_min, inputs.xi, inputs.tau
    # 从不次优的臂取 Δ→∞ 的极限
    if arm_gap is None:
        factor = 1.0 / c
    else:
        factor = (2.0 * (1.0 + r / c) / arm_gap + 1.0) / c
    blocks = inputs.budget / (c * tau)
    log_tau = math.log(tau)
    first = factor ** 2 * r ** 2 * xi * math.ceil(blocks) / blocks
    growth = math.log(1.0 + 4.0 * math.sqrt(1.0 - 1.0 / (2.0 * xi)))
    second = (4.0 / log_tau) * math.ceil(log_tau / growth)
    return first + second


def theorem1_bound(inputs: BoundInputs) -> float:
    """
    BPRPC-SWUCB 的遗憾上界，T(B) 以 B/c_min 代入

    r_max·[(B/c_min)(1 − c_min/c_max) + 1
           + Σ_i (C(τ,i)·(B/c_min)·log τ/τ + τΥ + 2 log²τ)]

    Args:
        inputs: 上界输入（ξ > 1/2，τ ≥ 2）

    Returns:
        float: 上界
    """
    horizon = inputs.budget / inputs.c_min
    tau = inputs.tau
    log_tau = math.log(tau)
    oracle_term = horizon * (1.0 - inputs.c_min / inputs.c_max)

    total = 0.0
    for arm_gap in inputs.gaps:
        constant = _window_constant(inputs, arm_gap)
        total += constant * horizon * log_tau / tau + tau * inputs.change_points + 2.0 * log_tau ** 2
    return inputs.r_max * (oracle_term + 1.0 + total)


def suggested_window(budget: float, change_points: int) -> int:
    """
    窗口长度建议 τ = sqrt(B·log B / Υ)，取整且不小于 2
    """
    if budget <= 1 or change_points < 1:
        raise DomainError(f"需要 B > 1 且 Υ ≥ 1: B={budget}, Υ={change_points}")
    return max(2, int(round(math.sqrt(budget * math.log(budget) / change_points))))


def bound_inputs_for(
    env: Environment,
    config: PolicyConfig,
    budget: float,
    tau: Optional[int] = None,
    xi: Optional[float] = None,
) -> BoundInputs:
    """
    组装上界输入：Υ 与间隔都在 horizon = B/c_min 处计算

    Args:
        env: 环境
        config: BPRPC-SWUCB 配置（提供 ξ、τ，可覆盖 r_max / c_min）
        budget: 预算
        tau: 覆盖窗口长度
        xi: 覆盖 ξ

    Returns:
        BoundInputs: 上界输入
    """
    config = config.with_bounds(env.reward_bound, env.cost_floor)
    horizon = max(1, int(math.floor(budget / config.c_min)))
    gaps = []
    for arm in range(1, env.n_arms + 1):
        try:
            gaps.append(gap(env, arm, horizon))
        except NoGapError:
            gaps.append(None)
    try:
        inputs = BoundInputs(
            budget=budget,
            r_max=config.r_max,
            c_min=config.c_min,
            c_max=env.cost_ceiling,
            xi=xi if xi is not None else config.xi,
            tau=tau if tau is not None else config.tau,
            n_arms=env.n_arms,
            change_points=env.change_points(horizon),
            gaps=tuple(gaps),
        )
    except ValidationError as e:
        raise DomainError(describe_validation_error(e)) from e
    logger.debug(f"上界输入: Υ={inputs.change_points}, gaps={inputs.gaps}")
    return inputs
