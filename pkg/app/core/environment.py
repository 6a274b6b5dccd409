"""
环境模块 - 两类环境（物理生成模型 / 参数化模型）的统一拉臂接口
"""

import bisect
import logging
import math
from typing import List, Tuple

import numpy as np

from app.core import netmodel
from app.core.cache import cached_analytic
from app.core.exceptions import UnknownArmError
from app.core.schedule import change_points_before, value_at
from app.models import EnvironmentSpec, GenerativeArm, ParametricArm, PiecewiseSchedule

logger = logging.getLogger(__name__)


def arm_schedules(arm) -> List[PiecewiseSchedule]:
    """决定该臂均值的参数表：参数化臂为 μ/η，生成模型臂为 p/λ"""
    if isinstance(arm, ParametricArm):
        return [arm.reward_mean_schedule, arm.cost_mean_schedule]
    return [arm.server.link.success_schedule, arm.server.queue.arrival_schedule]


@cached_analytic
def _analytic_means(arm: GenerativeArm, round_: int) -> Tuple[float, float]:
    return (
        netmodel.reward_mean(arm.server, arm.qos, round_),
        netmodel.expected_cost(arm.server, round_),
    )


class Environment:
    """S 个同类臂组成的环境，构造后不可变"""

    def __init__(self, spec: EnvironmentSpec):
        """
        初始化环境并预计算各平稳段的 (μ, η)

        Args:
            spec: 环境描述
        """
        self.spec = spec
        self.kind = spec.kind
        self.arms = spec.arms
        self.n_arms = len(spec.arms)
        # 奖励为 {0,1}，成本无上界
        self.reward_bound = 1.0
        self.cost_floor = spec.cost_floor
        self.cost_ceiling = math.inf

        starts = {1}
        for schedule in self.schedules():
            starts.update(schedule.breakpoints)
        self._segment_starts: List[int] = sorted(starts)
        self._segment_means = np.array(
            [[self._compute_means(arm, start) for arm in self.arms] for start in self._segment_starts]
        )
        ratios = self._segment_means[:, :, 0] / self._segment_means[:, :, 1]
        self._segment_oracle = np.argmax(ratios, axis=1) + 1

        logger.debug(
            f"环境初始化: kind={self.kind}, arms={self.n_arms}, segments={len(self._segment_starts)}"
        )

    def _compute_means(self, arm, round_: int) -> Tuple[float, float]:
        if isinstance(arm, ParametricArm):
            return (
                value_at(arm.reward_mean_schedule, round_),
                value_at(arm.cost_mean_schedule, round_),
            )
        return _analytic_means(arm, round_)

    @property
    def segment_starts(self) -> List[int]:
        """所有参数表断点的并集，均值在相邻两点之间保持不变"""
        return list(self._segment_starts)

    def _check_arm(self, arm: int) -> None:
        if not 1 <= arm <= self.n_arms:
            raise UnknownArmError(f"臂编号超出范围: {arm} (S={self.n_arms})")

    def _segment(self, round_: int) -> int:
        return bisect.bisect_right(self._segment_starts, round_) - 1

    def schedules(self) -> List[PiecewiseSchedule]:
        """环境中所有决定均值的参数表"""
        return [schedule for arm in self.arms for schedule in arm_schedules(arm)]

    def change_points(self, horizon: int) -> int:
        """horizon 之前的变点数 Υ（含初始回合）"""
        return change_points_before(self.schedules(), horizon)

    def pull(self, arm: int, round_: int, rng: np.random.Generator) -> Tuple[float, float]:
        """
        拉动一个臂

        Args:
            arm: 臂编号，1..S
            round_: 回合
            rng: 随机数流

        Returns:
            Tuple[float, float]: (奖励, 成本)
        """
        self._check_arm(arm)
        spec = self.arms[arm - 1]
        if isinstance(spec, ParametricArm):
            mu = value_at(spec.reward_mean_schedule, round_)
            eta = value_at(spec.cost_mean_schedule, round_)
            reward = 1.0 if rng.random() < mu else 0.0
            cost = spec.shift + rng.exponential(eta - spec.shift)
            return reward, float(cost)
        outcome = netmodel.sample_pull(spec.server, spec.qos, round_, rng)
        return float(outcome.reward), outcome.cost

    def oracle_means(self, arm: int, round_: int) -> Tuple[float, float]:
        """
        真实均值 (μ_θ, η_θ)

        Args:
            arm: 臂编号
            round_: 回合

        Returns:
            Tuple[float, float]: (平均奖励, 平均成本)
        """
        self._check_arm(arm)
        mu, eta = self._segment_means[self._segment(round_), arm - 1]
        return float(mu), float(eta)

    def oracle_arm(self, round_: int) -> int:
        """argmax_i μ/η，并列时取编号最小的臂"""
        return int(self._segment_oracle[self._segment(round_)])

    def mean_matrix(self, horizon: int) -> Tuple[np.ndarray, np.ndarray]:
        """
        回合 1..horizon 的均值表

        Returns:
            Tuple[np.ndarray, np.ndarray]: (μ, η)，形状均为 (horizon, S)
        """
        index = np.searchsorted(self._segment_starts, np.arange(1, horizon + 1), side="right") - 1
        means = self._segment_means[index]
        return means[:, :, 0], means[:, :, 1]

    def oracle_arms(self, horizon: int) -> np.ndarray:
        """回合 1..horizon 的 Oracle 选择序列"""
        index = np.searchsorted(self._segment_starts, np.arange(1, horizon + 1), side="right") - 1
        return self._segment_oracle[index]
