"""
缓存服务模块 - 解析表（pmf 向量、分段均值）缓存
"""

import functools
import hashlib
import json
import logging
from collections import OrderedDict
from typing import Any, Callable, Dict, Optional

import numpy as np
from pydantic import BaseModel

from app.config import settings

logger = logging.getLogger(__name__)


class AnalyticCache:
    """解析结果的 LRU 缓存，进程内有效"""

    def __init__(self, max_size: Optional[int] = None):
        """
        初始化缓存

        Args:
            max_size: 最大缓存数量
        """
        self.cache: "OrderedDict[str, Any]" = OrderedDict()
        self.max_size = max_size or settings.analytic_cache_size
        self.hits = 0
        self.misses = 0
        self.evictions = 0

        logger.debug(f"初始化解析缓存: max_size={self.max_size}")

    def get(self, key: str) -> Optional[Any]:
        """
        获取缓存值

        Args:
            key: 缓存键

        Returns:
            Optional[Any]: 缓存值或None
        """
        if key not in self.cache:
            self.misses += 1
            return None

        self.cache.move_to_end(key)
        self.hits += 1
        return self.cache[key]

    def set(self, key: str, value: Any) -> None:
        """
        设置缓存值，numpy 数组会被置为只读

        Args:
            key: 缓存键
            value: 缓存值
        """
        if isinstance(value, np.ndarray):
            value.flags.writeable = False
        if key not in self.cache and len(self.cache) >= self.max_size:
            self._evict_oldest()
        self.cache[key] = value
        self.cache.move_to_end(key)

    def _evict_oldest(self) -> None:
        """移除最久未使用的缓存项"""
        oldest_key = next(iter(self.cache))
        del self.cache[oldest_key]
        self.evictions += 1
        logger.debug(f"缓存淘汰: {oldest_key}")

    def clear(self) -> None:
        """清空所有缓存"""
        self.cache.clear()
        self.hits = 0
        self.misses = 0
        self.evictions = 0

    def get_stats(self) -> Dict[str, Any]:
        """
        获取缓存统计信息

        Returns:
            Dict: 统计信息
        """
        total = self.hits + self.misses
        return {
            "size": len(self.cache),
            "max_size": self.max_size,
            "hits": self.hits,
            "misses": self.misses,
            "hit_rate": self.hits / total if total > 0 else 0,
            "evictions": self.evictions,
        }

    def __contains__(self, key: str) -> bool:
        return key in self.cache

    def __len__(self) -> int:
        return len(self.cache)


# 全局缓存实例
analytic_cache = AnalyticCache()


def _jsonable(value: Any) -> Any:
    if isinstance(value, BaseModel):
        return value.model_dump(mode="json")
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    return value


def generate_cache_key(namespace: str, *args: Any, **kwargs: Any) -> str:
    """
    生成缓存键

    Args:
        namespace: 函数命名空间
        *args: 位置参数（pydantic 模型按字段展开）
        **kwargs: 关键字参数

    Returns:
        str: 缓存键
    """
    payload = {
        "args": [_jsonable(a) for a in args],
        "kwargs": {k: _jsonable(v) for k, v in kwargs.items()},
    }
    param_str = json.dumps(payload, sort_keys=True)
    return f"{namespace}:{hashlib.md5(param_str.encode()).hexdigest()}"


def cached_analytic(func: Callable) -> Callable:
    """
    缓存装饰器，用于纯函数形式的解析计算

    Args:
        func: 被装饰的函数

    Returns:
        装饰后的函数
    """

    @functools.wraps(func)
    def wrapper(*args, **kwargs):
        cache_key = generate_cache_key(f"{func.__module__}.{func.__qualname__}", *args, **kwargs)
        cached = analytic_cache.get(cache_key)
        if cached is not None:
            return cached
        result = func(*args, **kwargs)
        analytic_cache.set(cache_key, result)
        return result

    return wrapper
