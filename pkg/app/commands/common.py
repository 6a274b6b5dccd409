"""
子命令公共参数与场景解析
"""

import argparse
import logging
import os

from app.config import settings
from app.core.scenario import load_scenario, validate_scenario
from app.models import Scenario

logger = logging.getLogger(__name__)


def add_common_arguments(parser: argparse.ArgumentParser) -> None:
    """所有子命令共享的参数"""
    parser.add_argument("scenario", help="场景 YAML 文件路径，或内置场景名 table2 / physical")
    parser.add_argument("--reps", type=int, default=None, help="重复次数（覆盖场景配置）")
    parser.add_argument("--seed", type=int, default=None, help="基础随机种子（覆盖场景配置）")
    parser.add_argument("--parallelism", type=int, default=None, help="并行进程数")
    parser.add_argument("--out-dir", default=None, help="CSV 输出目录")
    parser.add_argument(
        "--regret-mode", choices=["empirical", "pseudo"], default=None, help="遗憾统计方式"
    )
    parser.add_argument("--no-progress", action="store_true", help="关闭进度条")


def resolve_scenario(args: argparse.Namespace) -> Scenario:
    """加载场景并应用命令行覆盖项"""
    scenario = load_scenario(args.scenario)
    updates = {}
    if args.reps is not None:
        updates["replications"] = args.reps
    if args.seed is not None:
        updates["base_seed"] = args.seed
    if args.regret_mode is not None:
        updates["regret_mode"] = args.regret_mode
    if args.out_dir is not None:
        updates["output_dir"] = args.out_dir
    if updates:
        # 覆盖项重新走一遍校验
        scenario = validate_scenario({**scenario.model_dump(), **updates})
    return scenario


def output_dir_for(scenario: Scenario) -> str:
    """场景的输出目录，缺省为 <settings.output_dir>/<scenario.name>"""
    if scenario.output_dir:
        return os.path.abspath(scenario.output_dir)
    return os.path.join(settings.output_dir, scenario.name)


def show_progress(args: argparse.Namespace) -> bool:
    return settings.show_progress and not getattr(args, "no_progress", False)
