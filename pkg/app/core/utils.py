"""
工具函数模块
"""

import logging
import os
import zlib
from typing import Callable, List, Optional, Sequence

import numpy as np
import pandas as pd
from scipy import stats

logger = logging.getLogger(__name__)

# 随机流角色：env 流在同一重复内被所有策略共享（公共随机数）
STREAM_ROLES = {"env": 0, "policy": 1, "oracle": 2, "validate": 3}


def label_hash(label: str) -> int:
    """稳定的标签哈希（与进程无关）"""
    return zlib.crc32(label.encode("utf-8"))


def spawn_generator(base_seed: int, replication: int, role: str, label: str = "") -> np.random.Generator:
    """
    派生独立随机流

    同一 (base_seed, replication, role, label) 总是得到相同的流，
    与并行度和执行顺序无关。

    Args:
        base_seed: 基础种子
        replication: 重复编号
        role: env / policy / oracle / validate
        label: 附加标签（策略名、臂编号等）

    Returns:
        np.random.Generator: 随机数生成器
    """
    seed_sequence = np.random.SeedSequence(
        entropy=base_seed,
        spawn_key=(replication, STREAM_ROLES[role], label_hash(label)),
    )
    return np.random.default_rng(seed_sequence)


def parse_grid(text: Optional[str], cast: Callable = float) -> Optional[List]:
    """
    解析逗号分隔的参数网格，如 "0.55,0.6,0.8"

    Args:
        text: 网格字符串，None 表示未指定
        cast: 元素类型

    Returns:
        Optional[List]: 去重后保持顺序的列表
    """
    if text is None:
        return None
    values = []
    for item in text.split(","):
        item = item.strip()
        if not item:
            continue
        value = cast(item)
        if value not in values:
            values.append(value)
    if not values:
        raise ValueError(f"参数网格为空: {text!r}")
    return values


def write_csv(frame: pd.DataFrame, output_dir: str, filename: str) -> str:
    """
    写出 CSV（逗号分隔、带表头、UTF-8），浮点数格式固定以保证可复现

    Returns:
        str: 文件路径
    """
    os.makedirs(output_dir, exist_ok=True)
    path = os.path.join(output_dir, filename)
    frame.to_csv(path, index=False, float_format="%.10g", encoding="utf-8")
    logger.info(f"📄 写出 {path} ({len(frame)} 行)")
    return path


def mean_and_stderr(samples: np.ndarray, axis: int = 0):
    """样本均值与标准误（单样本时标准误为 0）"""
    samples = np.asarray(samples, dtype=float)
    n = samples.shape[axis]
    mean = samples.mean(axis=axis)
    if n < 2:
        return mean, np.zeros_like(mean)
    return mean, stats.sem(samples, axis=axis, ddof=1)


def format_table(rows: Sequence[dict]) -> str:
    """把若干行字典格式化为对齐的文本表"""
    if not rows:
        return "(empty)"
    return pd.DataFrame(list(rows)).to_string(index=False)
