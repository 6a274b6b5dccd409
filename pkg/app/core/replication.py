"""
重复实验执行器 - 进程池并行，parallelism=1 时在当前进程内顺序执行
"""

import concurrent.futures
import logging
import time
from typing import Any, Callable, Dict, List, Optional, Sequence

from tqdm import tqdm

from app.config import settings

logger = logging.getLogger(__name__)


class ReplicationRunner:
    """把独立的重复实验分发到工作进程，结果按任务顺序返回"""

    def __init__(self, parallelism: Optional[int] = None, show_progress: Optional[bool] = None):
        """
        初始化执行器

        Args:
            parallelism: 并行进程数，缺省取配置
            show_progress: 是否显示 tqdm 进度条
        """
        self.parallelism = max(1, parallelism or settings.parallelism)
        self.show_progress = settings.show_progress if show_progress is None else show_progress
        self.total_tasks = 0
        self.completed_tasks = 0
        self.elapsed = 0.0

    def map(self, func: Callable[[Any], Any], tasks: Sequence[Any], desc: str = "replications") -> List[Any]:
        """
        执行所有任务

        Args:
            func: 模块级函数（需可被 pickle）
            tasks: 任务参数列表
            desc: 进度条说明

        Returns:
            List: 与 tasks 同序的结果
        """
        start = time.time()
        self.total_tasks += len(tasks)
        workers = min(self.parallelism, max(1, len(tasks)))
        progress = tqdm(total=len(tasks), desc=desc, disable=not self.show_progress, leave=False)

        results: List[Any] = [None] * len(tasks)
        try:
            if workers == 1:
                for i, task in enumerate(tasks):
                    results[i] = func(task)
                    self.completed_tasks += 1
                    progress.update(1)
            else:
                logger.debug(f"启动进程池: workers={workers}, tasks={len(tasks)}")
                with concurrent.futures.ProcessPoolExecutor(max_workers=workers) as pool:
                    futures = {pool.submit(func, task): i for i, task in enumerate(tasks)}
                    for future in concurrent.futures.as_completed(futures):
                        results[futures[future]] = future.result()
                        self.completed_tasks += 1
                        progress.update(1)
        finally:
            progress.close()

        self.elapsed += time.time() - start
        return results

    def get_stats(self) -> Dict[str, Any]:
        """获取执行统计"""
        return {
            "parallelism": self.parallelism,
            "total_tasks": self.total_tasks,
            "completed_tasks": self.completed_tasks,
            "elapsed_seconds": round(self.elapsed, 3),
        }
