"""
分段常数参数表模块 - 查表与变点统计
"""

import bisect
import logging
from typing import Iterable, List, Set

from app.models import PiecewiseSchedule

logger = logging.getLogger(__name__)


def value_at(schedule: PiecewiseSchedule, round_: int) -> float:
    """
    查询某一回合的参数值（右连续阶梯函数）

    Args:
        schedule: 分段常数参数表
        round_: 回合编号，从 1 开始

    Returns:
        float: 不大于 round_ 的最后一个断点处的取值
    """
    assert round_ >= 1, f"回合编号必须从 1 开始: {round_}"
    index = bisect.bisect_right(schedule.breakpoints, round_) - 1
    return schedule.values[index]


def change_rounds(schedule: PiecewiseSchedule, horizon: int) -> List[int]:
    """
    返回 horizon 之内取值真正发生变化的断点（不含回合 1）

    取值未变的断点只是冗余记录，不算变点。
    """
    rounds = []
    for i in range(1, len(schedule.breakpoints)):
        if schedule.breakpoints[i] > horizon:
            break
        if schedule.values[i] != schedule.values[i - 1]:
            rounds.append(schedule.breakpoints[i])
    return rounds


def change_point_rounds(schedules: Iterable[PiecewiseSchedule], horizon: int) -> List[int]:
    """所有参数表的变点回合并集（含初始回合 1），升序"""
    rounds: Set[int] = {1}
    for schedule in schedules:
        rounds.update(change_rounds(schedule, horizon))
    return sorted(rounds)


def change_points_before(schedules: Iterable[PiecewiseSchedule], horizon: int) -> int:
    """
    统计 horizon 之前的变点数 Υ

    初始回合 θ=1 按一个变点计数；多个参数表在同一回合变化只计一次。

    Args:
        schedules: 参数表集合
        horizon: 截止回合（含）

    Returns:
        int: 变点数
    """
    assert horizon >= 1, f"horizon 必须 ≥ 1: {horizon}"
    return len(change_point_rounds(schedules, horizon))
