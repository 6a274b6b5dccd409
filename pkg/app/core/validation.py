"""
解析分布的蒙特卡洛校验 - 传输时隙 pmf、平均奖励、平均成本与成本分布
"""

import logging
from dataclasses import asdict, dataclass
from typing import List, Optional

import numpy as np
from scipy import integrate, stats

from app.config import settings
from app.core import netmodel
from app.core.environment import arm_schedules
from app.core.schedule import value_at
from app.models import GenerativeArm

logger = logging.getLogger(__name__)

PASS = "pass"
FAIL = "fail"
NOT_ASSESSABLE = "not-assessable"


@dataclass
class LawCheck:
    """一项校验结果"""

    arm: int
    round: int
    law: str
    statistic: str
    value: float
    tolerance: float
    status: str

    def to_dict(self) -> dict:
        return asdict(self)


def _status(value: float, tolerance: float, assessable: bool) -> str:
    if not assessable:
        return NOT_ASSESSABLE
    return PASS if value <= tolerance else FAIL


def segment_rounds(arm: GenerativeArm) -> List[int]:
    """该臂 p / λ 参数表的所有分段起点"""
    rounds = set()
    for schedule in arm_schedules(arm):
        rounds.update(schedule.breakpoints)
    return sorted(rounds)


def total_variation(empirical: np.ndarray, analytic: np.ndarray, analytic_tail: float = 0.0) -> float:
    """两个 pmf 的全变差距离，analytic_tail 为解析 pmf 在支撑之外的质量"""
    return 0.5 * (float(np.abs(empirical - analytic).sum()) + analytic_tail)


def ks_distance(samples: np.ndarray, cdf) -> float:
    """样本经验分布与解析分布函数的 Kolmogorov-Smirnov 距离"""
    return float(stats.kstest(samples, cdf).statistic)


def cost_pdf_integral(arm: GenerativeArm, round_: int) -> float:
    """
    ∫ cost_pdf：各折点之间用 quad 数值积分，最后一个折点之后用解析尾部

    密度在 x_k = a'' + a'k 处不连续。
    """
    server = arm.server
    energy = server.energy
    p = value_at(server.link.success_schedule, round_)
    rate = netmodel.processing_rate(server.queue, round_)
    pmf = netmodel.transmission_pmf_vector(server.geometry, p)
    knots = energy.a_second + energy.a_prime * np.arange(1, len(pmf) + 1)

    total = 0.0
    for left, right in zip(knots[:-1], knots[1:]):
        piece, _ = integrate.quad(lambda x: netmodel.cost_pdf(server, round_, x), left, right, epsabs=1e-13)
        total += piece
    last = knots[-1]
    total += float(np.dot(pmf, np.exp(-rate * (last - knots) / energy.a)))
    return total


def validate_arm(
    arm: GenerativeArm,
    round_: int,
    samples: int,
    rng: np.random.Generator,
    arm_id: int = 1,
) -> List[LawCheck]:
    """
    在一个平稳段上校验该臂的解析分布

    Args:
        arm: 生成模型臂
        round_: 平稳段内的任一回合
        samples: 采样数
        rng: 随机数流
        arm_id: 报告中的臂编号

    Returns:
        List[LawCheck]: 五项校验结果
    """
    server = arm.server
    assessable = samples >= settings.min_assessable_samples
    batch = netmodel.sample_pulls(server, arm.qos, round_, rng, samples)
    p = value_at(server.link.success_schedule, round_)

    # 传输时隙 pmf
    k_max = max(netmodel.transmission_support(server.geometry, p), int(batch.transmission_time.max()))
    analytic = netmodel.transmission_pmf_vector(server.geometry, p, k_max)
    empirical = np.bincount(batch.transmission_time, minlength=k_max + 1)[1:] / samples
    tail = max(0.0, 1.0 - float(analytic.sum()))
    tv = total_variation(empirical, analytic, tail)
    tv_tolerance = settings.tv_geometric_tolerance if server.geometry.h_max == 1 else settings.tv_tolerance

    mu = netmodel.reward_mean(server, arm.qos, round_)
    reward_error = abs(mu - float(batch.reward.mean()))

    eta = netmodel.expected_cost(server, round_)
    cost_error = abs(eta - float(batch.cost.mean())) / eta

    ks = ks_distance(batch.cost, lambda x: netmodel.cost_cdf(server, round_, x))
    integral_error = abs(cost_pdf_integral(arm, round_) - 1.0)

    checks = [
        LawCheck(arm_id, round_, "transmission_pmf", "tv", tv, tv_tolerance, _status(tv, tv_tolerance, assessable)),
        LawCheck(
            arm_id, round_, "reward_mean", "abs_error", reward_error, settings.reward_tolerance,
            _status(reward_error, settings.reward_tolerance, assessable),
        ),
        LawCheck(
            arm_id, round_, "cost_mean", "rel_error", cost_error, settings.cost_mean_tolerance,
            _status(cost_error, settings.cost_mean_tolerance, assessable),
        ),
        LawCheck(arm_id, round_, "cost_cdf", "ks", ks, settings.ks_tolerance, _status(ks, settings.ks_tolerance, assessable)),
        LawCheck(
            arm_id, round_, "cost_pdf", "integral_error", integral_error, settings.integral_tolerance,
            _status(integral_error, settings.integral_tolerance, True),
        ),
    ]
    for check in checks:
        logger.debug(f"arm={arm_id} round={round_} {check.law}: {check.statistic}={check.value:.3g} [{check.status}]")
    return checks


def first_failure(checks: List[LawCheck]) -> Optional[LawCheck]:
    """第一项失败的校验"""
    for check in checks:
        if check.status == FAIL:
            return check
    return None
