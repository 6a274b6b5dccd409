"""
网络模型模块 - 卸载过程的解析分布与耦合采样

跳数服从截断几何型分布，每跳重传次数服从几何分布，
处理时间服从 M/M/1 逗留时间的指数分布；
时延 d = f + g，奖励 r = 1{d ≤ δ}，成本 c = a·f + a'·g + a''。
时间以传输时隙为单位，g 为整数。
"""

import logging
import math
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np
from scipy import stats
from scipy.special import gammaln, xlog1py

from app.config import settings
from app.core.cache import cached_analytic
from app.core.exceptions import DomainError
from app.core.schedule import value_at
from app.models import GeometryParams, QoSThreshold, QueueParams, ServerModel

logger = logging.getLogger(__name__)

ArrayLike = Union[float, np.ndarray]

# cost_pdf / cost_cdf 按块计算，每块 (x 数 × k 数) 矩阵不超过该元素数
_MIXTURE_ELEMENTS = 2_000_000


@dataclass(frozen=True)
class PullOutcome:
    """一次卸载的采样结果"""

    hops: int
    transmission_time: int
    processing_time: float
    delay: float
    reward: int
    cost: float


@dataclass(frozen=True)
class PullBatch:
    """向量化采样结果，各字段为等长数组"""

    hops: np.ndarray
    transmission_time: np.ndarray
    processing_time: np.ndarray
    delay: np.ndarray
    reward: np.ndarray
    cost: np.ndarray

    def __len__(self) -> int:
        return len(self.hops)


# ---------------------------------------------------------------- 跳数


def intersection_area(tx_range: float, distance: float) -> float:
    """
    两个半径为 R、圆心相距 ℓ 的圆的交叠面积

    Args:
        tx_range: 传输半径 R
        distance: 圆心距离 ℓ

    Returns:
        float: |A| = R²[2·acos(ℓ/2R) − sin(2·acos(ℓ/2R))]
    """
    if tx_range <= 0:
        raise DomainError(f"传输半径必须为正: R={tx_range}")
    if distance < 0 or distance > 2 * tx_range:
        raise DomainError(f"交叠面积公式要求 0 ≤ ℓ ≤ 2R: ℓ={distance}, R={tx_range}")
    phi = math.acos(distance / (2 * tx_range))
    return tx_range ** 2 * (2 * phi - math.sin(2 * phi))


def hop_success_probability(geometry: GeometryParams) -> float:
    """q = 1 − exp(−Λ|A|)"""
    area = intersection_area(geometry.tx_range, geometry.distance)
    return -math.expm1(-geometry.intensity * area)


def normalization_constant(geometry: GeometryParams) -> float:
    """C_ℓ = 1 / Σ_{h=1}^{h_max} q^{h−1}，使截断后的跳数分布归一"""
    q = hop_success_probability(geometry)
    return 1.0 / float(np.sum(q ** np.arange(geometry.h_max)))


@cached_analytic
def hop_pmf(geometry: GeometryParams) -> np.ndarray:
    """
    跳数分布 P(H = h) = C_ℓ q^{h−1}，h = 1..h_max

    Args:
        geometry: 几何参数

    Returns:
        np.ndarray: 长度为 h_max 的概率向量
    """
    q = hop_success_probability(geometry)
    weights = q ** np.arange(geometry.h_max, dtype=float)
    return weights / weights.sum()


def expected_hops(geometry: GeometryParams) -> float:
    """E[H]"""
    pmf = hop_pmf(geometry)
    return float(np.dot(np.arange(1, geometry.h_max + 1), pmf))


# ---------------------------------------------------------------- 传输时间


def _negbin_terms(k: np.ndarray, h: np.ndarray, p: float) -> np.ndarray:
    """binom(k−1, h−1) p^h (1−p)^{k−h}，在对数空间计算；h > k 处为 0"""
    valid = h <= k
    failures = np.where(valid, k - h, 0)
    hh = np.where(valid, h, 1)
    with np.errstate(divide="ignore"):
        log_terms = (
            gammaln(np.where(valid, k, 1))
            - gammaln(hh)
            - gammaln(failures + 1)
            + hh * math.log(p)
            + xlog1py(failures, -p)
        )
    return np.where(valid, np.exp(log_terms), 0.0)


def transmission_pmf(geometry: GeometryParams, p: float, k: int) -> float:
    """
    传输时间分布 P(g = k)

    Args:
        geometry: 几何参数
        p: 单次传输成功概率
        k: 时隙数，k ≥ 1

    Returns:
        float: C_ℓ Σ_h binom(k−1,h−1) p^h (1−p)^{k−h} q^{h−1}
    """
    if k < 1:
        return 0.0
    hops = hop_pmf(geometry)
    h = np.arange(1, min(k, geometry.h_max) + 1)
    terms = _negbin_terms(np.full_like(h, k), h, p)
    return float(np.dot(terms, hops[: len(h)]))


def transmission_support(geometry: GeometryParams, p: float, tail: Optional[float] = None) -> int:
    """
    截断点 K*：P(g > K*) < tail

    g 被 h_max 个独立几何变量之和随机控制，用负二项分布的尾部作为解析上界。

    Args:
        geometry: 几何参数
        p: 单次传输成功概率
        tail: 尾部概率阈值，缺省取配置

    Returns:
        int: 截断点 K*
    """
    tail = tail or settings.pmf_tail_tolerance
    h_max = geometry.h_max
    if p >= 1.0:
        return h_max
    dist = stats.nbinom(h_max, p)
    failures = int(np.nan_to_num(dist.isf(tail), nan=0.0))
    while dist.sf(failures) >= tail:
        failures += 1
    return h_max + failures


@cached_analytic
def transmission_pmf_vector(geometry: GeometryParams, p: float, k_max: Optional[int] = None) -> np.ndarray:
    """
    P(g = k)，k = 1..k_max；k_max 缺省为 transmission_support

    Args:
        geometry: 几何参数
        p: 单次传输成功概率
        k_max: 最大时隙数

    Returns:
        np.ndarray: 长度为 k_max 的向量，第 i 项对应 k = i + 1
    """
    if k_max is None:
        k_max = transmission_support(geometry, p)
    if k_max < 1:
        return np.zeros(0)
    hops = hop_pmf(geometry)
    k = np.arange(1, k_max + 1)[:, None]
    h = np.arange(1, geometry.h_max + 1)[None, :]
    return _negbin_terms(k, h, p) @ hops


def expected_transmission_time(geometry: GeometryParams, p: float) -> float:
    """E[g] = E[H] / p"""
    return expected_hops(geometry) / p


# ---------------------------------------------------------------- 处理时间


def processing_rate(queue: QueueParams, round_: int) -> float:
    """处理时间的指数分布参数 ρ − λ_θ"""
    return queue.service_rate - value_at(queue.arrival_schedule, round_)


def processing_cdf(queue: QueueParams, round_: int, x: float) -> float:
    """
    处理时间分布函数

    Args:
        queue: 队列参数
        round_: 回合
        x: 时间

    Returns:
        float: x < 0 时为 0，否则 1 − exp(−(ρ−λ_θ)x)
    """
    if x < 0:
        return 0.0
    return -math.expm1(-processing_rate(queue, round_) * x)


# ---------------------------------------------------------------- 奖励


def reward_mean(server: ServerModel, qos: QoSThreshold, round_: int) -> float:
    """
    平均奖励 μ = P(f + g ≤ δ) = Σ_{k=1}^{⌊δ⌋} P(f ≤ δ−k) P(g = k)

    Args:
        server: 服务器模型
        qos: 时延阈值
        round_: 回合

    Returns:
        float: [0, 1] 内的概率
    """
    delta = qos.delta
    k_top = math.floor(delta)
    if k_top < 1:
        return 0.0
    p = value_at(server.link.success_schedule, round_)
    rate = processing_rate(server.queue, round_)
    pmf = transmission_pmf_vector(server.geometry, p, k_top)
    k = np.arange(1, k_top + 1)
    processing = -np.expm1(-rate * (delta - k))
    return float(np.clip(np.dot(processing, pmf), 0.0, 1.0))


# ---------------------------------------------------------------- 成本


def mixture_chunk_rows(support: int) -> int:
    """混合计算每块的 x 行数，随 K* 增大而减小"""
    return max(1, _MIXTURE_ELEMENTS // max(support, 1))


def _cost_mixture(server: ServerModel, round_: int, x: ArrayLike, component) -> ArrayLike:
    """对 g 做混合：Σ_k P(g=k)·component(rate, (x − a'' − a'k)/a)"""
    energy = server.energy
    p = value_at(server.link.success_schedule, round_)
    rate = processing_rate(server.queue, round_)
    pmf = transmission_pmf_vector(server.geometry, p)
    k = np.arange(1, len(pmf) + 1, dtype=float)

    values = np.atleast_1d(np.asarray(x, dtype=float))
    result = np.empty_like(values)
    rows = mixture_chunk_rows(len(pmf))
    for start in range(0, len(values), rows):
        block = values[start:start + rows]
        y = (block[:, None] - energy.a_second - energy.a_prime * k[None, :]) / energy.a
        result[start:start + rows] = component(rate, y) @ pmf
    if np.ndim(x) == 0:
        return float(result[0])
    return result


def _exp_density(rate: float, y: np.ndarray) -> np.ndarray:
    with np.errstate(over="ignore"):
        return np.where(y >= 0, rate * np.exp(-rate * np.maximum(y, 0.0)), 0.0)


def _exp_cdf(rate: float, y: np.ndarray) -> np.ndarray:
    return np.where(y >= 0, -np.expm1(-rate * np.maximum(y, 0.0)), 0.0)


def cost_pdf(server: ServerModel, round_: int, x: ArrayLike) -> ArrayLike:
    """
    成本密度

    Args:
        server: 服务器模型
        round_: 回合
        x: 能量值（标量或数组）

    Returns:
        x < a'+a'' 时为 0，否则 (1/a) Σ_k f_f((x−a''−a'k)/a)·P(g=k)
    """
    energy = server.energy
    density = _cost_mixture(server, round_, x, _exp_density)
    if np.ndim(x) == 0:
        return density / energy.a if x >= energy.floor else 0.0
    return np.where(np.asarray(x) >= energy.floor, density / energy.a, 0.0)


def cost_cdf(server: ServerModel, round_: int, x: ArrayLike) -> ArrayLike:
    """成本分布函数 Σ_k P(g=k)·F_f((x−a''−a'k)/a)"""
    return _cost_mixture(server, round_, x, _exp_cdf)


def expected_cost(server: ServerModel, round_: int) -> float:
    """
    平均成本 η = a/(ρ−λ_θ) + a'·E[H]/p_θ + a''

    Args:
        server: 服务器模型
        round_: 回合

    Returns:
        float: 平均成本
    """
    energy = server.energy
    p = value_at(server.link.success_schedule, round_)
    return (
        energy.a / processing_rate(server.queue, round_)
        + energy.a_prime * expected_transmission_time(server.geometry, p)
        + energy.a_second
    )


# ---------------------------------------------------------------- 采样


def sample_pull(server: ServerModel, qos: QoSThreshold, round_: int, rng: np.random.Generator) -> PullOutcome:
    """
    按生成模型采样一次卸载：跳数 -> 每跳重传次数 -> 处理时间

    奖励与成本由同一组 (f, g) 决定。

    Args:
        server: 服务器模型
        qos: 时延阈值
        round_: 回合
        rng: 随机数流（调用方持有）

    Returns:
        PullOutcome: 采样结果
    """
    geometry = server.geometry
    energy = server.energy
    p = value_at(server.link.success_schedule, round_)

    if geometry.h_max == 1:
        hops = 1
    else:
        hops = int(rng.choice(geometry.h_max, p=hop_pmf(geometry))) + 1
    transmission = int(rng.geometric(p, size=hops).sum())
    processing = float(rng.exponential(1.0 / processing_rate(server.queue, round_)))

    delay = processing + transmission
    return PullOutcome(
        hops=hops,
        transmission_time=transmission,
        processing_time=processing,
        delay=delay,
        reward=1 if delay <= qos.delta else 0,
        cost=energy.a * processing + energy.a_prime * transmission + energy.a_second,
    )


def sample_pulls(
    server: ServerModel, qos: QoSThreshold, round_: int, rng: np.random.Generator, size: int
) -> PullBatch:
    """
    向量化采样：g = H + NegBin(H, p) 个失败次数

    与 sample_pull 同分布，用于大样本蒙特卡洛校验。
    """
    geometry = server.geometry
    energy = server.energy
    p = value_at(server.link.success_schedule, round_)

    hops = rng.choice(np.arange(1, geometry.h_max + 1), size=size, p=hop_pmf(geometry))
    transmission = hops + rng.negative_binomial(hops, p)
    processing = rng.exponential(1.0 / processing_rate(server.queue, round_), size=size)
    delay = processing + transmission
    return PullBatch(
        hops=hops,
        transmission_time=transmission,
        processing_time=processing,
        delay=delay,
        reward=(delay <= qos.delta).astype(np.int8),
        cost=energy.a * processing + energy.a_prime * transmission + energy.a_second,
    )
