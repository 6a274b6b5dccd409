"""
异常定义模块
"""

from typing import Optional


class BanditEngineError(Exception):
    """引擎异常基类"""

    exit_code = 1


class ScenarioParseError(BanditEngineError):
    """场景文件解析失败"""

    exit_code = 2

    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        if line is not None:
            message = f"{message} (line {line})"
        super().__init__(message)


class ScenarioValidationError(BanditEngineError):
    """场景校验失败，消息中包含违反的约束"""

    exit_code = 2


class DomainError(BanditEngineError, ValueError):
    """参数超出公式定义域"""


class UnknownArmError(BanditEngineError, IndexError):
    """臂编号不存在"""


class NoGapError(BanditEngineError):
    """该臂在所有回合都是最优臂，间隔未定义"""


class ReplicationMismatchError(BanditEngineError, ValueError):
    """策略与 Oracle 的重复次数不一致"""


class ToleranceError(BanditEngineError):
    """蒙特卡洛校验超出容差"""

    exit_code = 3
