"""
策略模块 - BPRPC-SWUCB 及对比策略

所有学习型策略在前 S 个回合依次拉动臂 1..S 进行初始化，
之后按各自的指数选择，指数相同时取编号最小的臂。
"""

import logging
import math
from collections import deque
from typing import Callable, Deque, Dict, List, Sequence, Tuple

import numpy as np

from app.core.environment import Environment
from app.core.exceptions import UnknownArmError
from app.models import PolicyConfig

logger = logging.getLogger(__name__)


class WindowStats:
    """最近 τ 次观测的滑动窗口统计，维护每个臂的次数与奖励、成本之和"""

    def __init__(self, n_arms: int, window: int):
        self.n_arms = n_arms
        self.window = window
        self.buffer: Deque[Tuple[int, float, float]] = deque()
        self.counts = [0] * n_arms
        self.reward_sums = [0.0] * n_arms
        self.cost_sums = [0.0] * n_arms

    def update(self, arm: int, reward: float, cost: float) -> None:
        """记录一次观测，窗口满时移出最早的一条"""
        if len(self.buffer) == self.window:
            old_arm, old_reward, old_cost = self.buffer.popleft()
            i = old_arm - 1
            self.counts[i] -= 1
            if self.counts[i] == 0:
                self.reward_sums[i] = 0.0
                self.cost_sums[i] = 0.0
            else:
                self.reward_sums[i] -= old_reward
                self.cost_sums[i] -= old_cost
        self.buffer.append((arm, reward, cost))
        i = arm - 1
        self.counts[i] += 1
        self.reward_sums[i] += reward
        self.cost_sums[i] += cost

    def recompute(self) -> Tuple[List[int], List[float], List[float]]:
        """从窗口内容重新求和，用于核对增量统计"""
        counts = [0] * self.n_arms
        rewards = [0.0] * self.n_arms
        costs = [0.0] * self.n_arms
        for arm, reward, cost in self.buffer:
            counts[arm - 1] += 1
            rewards[arm - 1] += reward
            costs[arm - 1] += cost
        return counts, rewards, costs

    def count(self, arm: int) -> int:
        return self.counts[arm - 1]

    def mean_reward(self, arm: int) -> float:
        return self.reward_sums[arm - 1] / self.counts[arm - 1]

    def mean_cost(self, arm: int) -> float:
        return self.cost_sums[arm - 1] / self.counts[arm - 1]


class FullHistoryStats:
    """全历史统计，额外记录 r/c 之和（UCB1 使用）"""

    def __init__(self, n_arms: int):
        self.n_arms = n_arms
        self.counts = [0] * n_arms
        self.reward_sums = [0.0] * n_arms
        self.cost_sums = [0.0] * n_arms
        self.ratio_sums = [0.0] * n_arms

    def update(self, arm: int, reward: float, cost: float) -> None:
        i = arm - 1
        self.counts[i] += 1
        self.reward_sums[i] += reward
        self.cost_sums[i] += cost
        self.ratio_sums[i] += reward / cost

    def count(self, arm: int) -> int:
        return self.counts[arm - 1]

    def mean_reward(self, arm: int) -> float:
        return self.reward_sums[arm - 1] / self.counts[arm - 1]

    def mean_cost(self, arm: int) -> float:
        return self.cost_sums[arm - 1] / self.counts[arm - 1]

    def mean_ratio(self, arm: int) -> float:
        return self.ratio_sums[arm - 1] / self.counts[arm - 1]


def argmax_arm(indices: Sequence[float]) -> int:
    """最大指数对应的臂（1 起），并列取编号最小者"""
    best = 0
    for i in range(1, len(indices)):
        if indices[i] > indices[best]:
            best = i
    return best + 1


# ---------------------------------------------------------------- BPRPC-SWUCB


def swucb_padding(config: PolicyConfig, round_: int, count: int) -> float:
    """
    探索项 E_θ(τ, i)

    e = r_max·sqrt(ξ·log(min(θ, τ)) / N)，
    E = (1 + r_max/c_min)·e / (c_min − e)；c_min − e ≤ 0 时为 +inf。

    Args:
        config: 策略配置（需已补全 r_max / c_min）
        round_: 决策回合 θ
        count: 窗口内该臂的拉动次数 N

    Returns:
        float: 探索项
    """
    if count == 0:
        return math.inf
    r_max, c_min = config.r_max, config.c_min
    e = r_max * math.sqrt(config.xi * math.log(min(round_, config.tau)) / count)
    if c_min - e <= 0:
        return math.inf
    return (1.0 + r_max / c_min) * e / (c_min - e)


def swucb_index(stats: WindowStats, config: PolicyConfig, arm: int, round_: int) -> float:
    """滑动窗口指数 r̄/c̄ + E，窗口内未拉动的臂为 +inf"""
    count = stats.count(arm)
    if count == 0:
        return math.inf
    padding = swucb_padding(config, round_, count)
    if math.isinf(padding):
        return math.inf
    return stats.mean_reward(arm) / stats.mean_cost(arm) + padding


# ---------------------------------------------------------------- 对比策略指数


def _kube_index(stats: FullHistoryStats, config: PolicyConfig, arm: int, round_: int) -> float:
    n = stats.count(arm)
    return (stats.mean_reward(arm) + math.sqrt(2.0 * math.log(round_) / n)) / stats.mean_cost(arm)


def _ucb1_index(stats: FullHistoryStats, config: PolicyConfig, arm: int, round_: int) -> float:
    n = stats.count(arm)
    return stats.mean_ratio(arm) + config.r_max * math.sqrt(config.xi_prime * math.log(round_) / n)


def _ucb_based_index(stats: FullHistoryStats, config: PolicyConfig, arm: int, round_: int) -> float:
    n = stats.count(arm)
    bonus = (config.r_max / config.c_min) * math.sqrt(config.xi_second * math.log(round_) / n)
    return stats.mean_reward(arm) / stats.mean_cost(arm) + bonus


def _ucb_bv1_index(stats: FullHistoryStats, config: PolicyConfig, arm: int, round_: int) -> float:
    n = stats.count(arm)
    c_min = config.c_min
    e = math.sqrt(math.log(max(round_ - 1, 1)) / n)
    if c_min - e <= 0:
        return math.inf
    return stats.mean_reward(arm) / stats.mean_cost(arm) + (1.0 + 1.0 / c_min) * e / (c_min - e)


BASELINE_INDICES: Dict[str, Callable[[FullHistoryStats, PolicyConfig, int, int], float]] = {
    "KUBE": _kube_index,
    "UCB1": _ucb1_index,
    "UCB-based": _ucb_based_index,
    "UCB-BV1": _ucb_bv1_index,
}


def baseline_index(kind: str, stats: FullHistoryStats, config: PolicyConfig, arm: int, round_: int) -> float:
    """
    对比策略的指数，未拉动过的臂为 +inf

    Args:
        kind: KUBE / UCB1 / UCB-based / UCB-BV1
        stats: 全历史统计
        config: 策略配置
        arm: 臂编号
        round_: 决策回合 θ
    """
    if stats.count(arm) == 0:
        return math.inf
    return BASELINE_INDICES[kind](stats, config, arm, round_)


def oracle_select(env: Environment, round_: int) -> int:
    """已知真实均值时的选择：argmax μ/η，并列取编号最小者"""
    return env.oracle_arm(round_)


# ---------------------------------------------------------------- 策略对象


class Policy:
    """策略基类：select_arm / observe"""

    kind = "base"

    def __init__(self, config: PolicyConfig, n_arms: int, rng: np.random.Generator):
        self.config = config
        self.n_arms = n_arms
        self.rng = rng

    @property
    def name(self) -> str:
        return self.config.name

    def select_arm(self, round_: int) -> int:
        """选择第 round_ 回合拉动的臂"""
        if round_ <= self.n_arms:
            return round_
        return self._select(round_)

    def _select(self, round_: int) -> int:
        raise NotImplementedError

    def observe(self, round_: int, arm: int, reward: float, cost: float) -> None:
        """记录拉动结果"""
        if not 1 <= arm <= self.n_arms:
            raise UnknownArmError(f"臂编号超出范围: {arm}")
        self._observe(arm, reward, cost)

    def _observe(self, arm: int, reward: float, cost: float) -> None:
        raise NotImplementedError


class SlidingWindowUCB(Policy):
    """BPRPC-SWUCB：窗口内的奖励成本比加探索项"""

    kind = "BPRPC-SWUCB"

    def __init__(self, config: PolicyConfig, n_arms: int, rng: np.random.Generator):
        super().__init__(config, n_arms, rng)
        self.stats = WindowStats(n_arms, config.tau)

    def _select(self, round_: int) -> int:
        return argmax_arm([swucb_index(self.stats, self.config, arm, round_) for arm in range(1, self.n_arms + 1)])

    def _observe(self, arm: int, reward: float, cost: float) -> None:
        self.stats.update(arm, reward, cost)


class IndexPolicy(Policy):
    """全历史指数策略（KUBE、UCB1、UCB-based、UCB-BV1）"""

    def __init__(self, config: PolicyConfig, n_arms: int, rng: np.random.Generator):
        super().__init__(config, n_arms, rng)
        self.kind = config.kind
        self.stats = FullHistoryStats(n_arms)

    def _select(self, round_: int) -> int:
        return argmax_arm(
            [baseline_index(self.kind, self.stats, self.config, arm, round_) for arm in range(1, self.n_arms + 1)]
        )

    def _observe(self, arm: int, reward: float, cost: float) -> None:
        self.stats.update(arm, reward, cost)


class EpsilonGreedy(Policy):
    """ε-Greedy，ε = 1/θ；利用时取全历史 r̄/c̄ 最大的臂"""

    kind = "EpsGreedy"

    def __init__(self, config: PolicyConfig, n_arms: int, rng: np.random.Generator):
        super().__init__(config, n_arms, rng)
        self.stats = FullHistoryStats(n_arms)

    @staticmethod
    def exploration_probability(round_: int) -> float:
        return 1.0 / round_

    def _select(self, round_: int) -> int:
        if self.rng.random() < self.exploration_probability(round_):
            return int(self.rng.integers(1, self.n_arms + 1))
        return argmax_arm(
            [self.stats.mean_reward(arm) / self.stats.mean_cost(arm) for arm in range(1, self.n_arms + 1)]
        )

    def _observe(self, arm: int, reward: float, cost: float) -> None:
        self.stats.update(arm, reward, cost)


class OraclePolicy(Policy):
    """知道真实均值的策略，没有初始化阶段"""

    kind = "Oracle"

    def __init__(self, config: PolicyConfig, n_arms: int, rng: np.random.Generator, env: Environment):
        super().__init__(config, n_arms, rng)
        self.env = env

    def select_arm(self, round_: int) -> int:
        return oracle_select(self.env, round_)

    def _observe(self, arm: int, reward: float, cost: float) -> None:
        pass


def create_policy(config: PolicyConfig, env: Environment, rng: np.random.Generator) -> Policy:
    """
    按配置创建策略，r_max / c_min 缺省取环境值

    Args:
        config: 策略配置
        env: 环境
        rng: 策略自身的随机数流

    Returns:
        Policy: 策略实例
    """
    config = config.with_bounds(env.reward_bound, env.cost_floor)
    if config.kind == "BPRPC-SWUCB":
        return SlidingWindowUCB(config, env.n_arms, rng)
    if config.kind in BASELINE_INDICES:
        return IndexPolicy(config, env.n_arms, rng)
    if config.kind == "EpsGreedy":
        return EpsilonGreedy(config, env.n_arms, rng)
    if config.kind == "Oracle":
        return OraclePolicy(config, env.n_arms, rng, env)
    raise ValueError(f"不支持的策略类型: {config.kind}")
