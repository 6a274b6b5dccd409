"""
子命令模块 - 所有命令行子命令的集合
"""

from . import analytic, bound, simulate, sweep, validate

COMMANDS = [simulate, sweep, validate, analytic, bound]

__all__ = [
    'COMMANDS',
    'simulate',
    'sweep',
    'validate',
    'analytic',
    'bound',
]
