"""
配置管理模块
"""

import os
from functools import lru_cache
from typing import Any, Dict

import psutil
from dotenv import load_dotenv
from pydantic import Field, field_validator
from pydantic_settings import BaseSettings, SettingsConfigDict

# 加载环境变量
load_dotenv()


def _default_parallelism() -> int:
    """默认并行度：物理核数"""
    return psutil.cpu_count(logical=False) or 1


class Settings(BaseSettings):
    """应用配置"""

    model_config = SettingsConfigDict(env_file=".env", case_sensitive=False, extra="ignore")

    # 运行配置
    log_level: str = Field("info", description="日志级别")
    output_dir: str = Field("./results", description="CSV 输出目录")
    default_replications: int = Field(100, ge=1, description="默认重复次数")
    default_seed: int = Field(2020, ge=0, description="默认基础随机种子")
    parallelism: int = Field(default_factory=_default_parallelism, ge=1, description="并行进程数")
    regret_mode: str = Field("pseudo", description="遗憾统计方式: pseudo / empirical")
    show_progress: bool = Field(True, description="是否显示进度条")

    # 解析计算配置
    pmf_tail_tolerance: float = Field(1e-12, gt=0, description="级数截断的尾部概率")
    analytic_cache_size: int = Field(256, ge=1, description="解析表缓存容量")

    # 蒙特卡洛校验配置
    validation_samples: int = Field(1_000_000, ge=1, description="校验采样数")
    min_assessable_samples: int = Field(100_000, ge=1, description="可评估的最小采样数")
    tv_tolerance: float = Field(0.005, gt=0)
    tv_geometric_tolerance: float = Field(0.002, gt=0)
    reward_tolerance: float = Field(0.005, gt=0)
    cost_mean_tolerance: float = Field(0.005, gt=0)
    ks_tolerance: float = Field(0.01, gt=0)
    integral_tolerance: float = Field(1e-6, gt=0)

    @field_validator("output_dir", mode="before")
    @classmethod
    def validate_output_dir(cls, v):
        """输出目录转为绝对路径（写文件时再创建）"""
        return os.path.abspath(v)

    @field_validator("regret_mode")
    @classmethod
    def validate_regret_mode(cls, v):
        """校验遗憾统计方式"""
        v = v.lower()
        if v not in ("pseudo", "empirical"):
            raise ValueError(f"regret_mode 必须是 pseudo 或 empirical: {v}")
        return v


# 全局配置实例
settings = Settings()


@lru_cache
def get_settings() -> Settings:
    """获取配置实例"""
    return settings


# 各策略默认参数
POLICY_DEFAULTS: Dict[str, Dict[str, Any]] = {
    "BPRPC-SWUCB": {"xi": 0.6, "tau": 2000},
    "UCB1": {"xi_prime": 0.6},
    "UCB-based": {"xi_second": 0.6},
    "KUBE": {},
    "UCB-BV1": {},
    # ε = 1/θ，无需额外参数
    "EpsGreedy": {},
    "Oracle": {},
}


def get_policy_defaults(kind: str) -> Dict[str, Any]:
    """
    获取策略默认参数

    Args:
        kind: 策略类型

    Returns:
        Dict: 默认参数字典（副本）
    """
    return dict(POLICY_DEFAULTS.get(kind, {}))
