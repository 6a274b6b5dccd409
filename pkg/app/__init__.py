"""
预算受限多臂老虎机仿真引擎 - Budgeted Bandit Engine

面向边缘计算服务器选择问题的仿真与分析工具包：
分段平稳的奖励/成本分布、BPRPC-SWUCB 策略及基线策略、
预算约束下的回合引擎、遗憾统计和理论上界计算。
"""

__version__ = "0.1.0"
__author__ = "Budgeted Bandit Engine Team"
__description__ = "Budget-limited piece-wise stationary bandit simulator for edge server selection"
