"""
validate 子命令 - 用大样本采样校验生成模型的解析分布
"""

import argparse
import logging

import pandas as pd

from app.commands.common import add_common_arguments, output_dir_for, resolve_scenario
from app.config import settings
from app.core.exceptions import ScenarioValidationError, ToleranceError
from app.core.utils import format_table, spawn_generator, write_csv
from app.core.validation import NOT_ASSESSABLE, first_failure, segment_rounds, validate_arm

logger = logging.getLogger(__name__)


def run(args: argparse.Namespace) -> int:
    scenario = resolve_scenario(args)
    if scenario.environment.kind != "generative":
        raise ScenarioValidationError("environment.kind: validate 只适用于 generative 环境")
    samples = args.samples or settings.validation_samples
    if samples < settings.min_assessable_samples:
        logger.warning(f"⚠️ 采样数 {samples} < {settings.min_assessable_samples}，统计量仅供参考")

    checks = []
    for arm_id, arm in enumerate(scenario.environment.arms, start=1):
        for round_ in segment_rounds(arm):
            rng = spawn_generator(scenario.base_seed, 0, "validate", f"{arm_id}:{round_}")
            checks.extend(validate_arm(arm, round_, samples, rng, arm_id))

    frame = pd.DataFrame([check.to_dict() for check in checks])
    write_csv(frame, output_dir_for(scenario), "validate.csv")
    print(format_table(frame.to_dict("records")))

    failure = first_failure(checks)
    if failure is not None:
        raise ToleranceError(
            f"arm {failure.arm} round {failure.round} {failure.law}: "
            f"{failure.statistic}={failure.value:.4g} > {failure.tolerance:g}"
        )
    if any(check.status == NOT_ASSESSABLE for check in checks):
        logger.info("ℹ️ 部分统计量因采样数不足无法评估")
    else:
        logger.info("✅ 所有解析分布均在容差之内")
    return 0


def register(subparsers) -> None:
    parser = subparsers.add_parser("validate", help="蒙特卡洛校验传输时隙、奖励与成本的解析分布")
    add_common_arguments(parser)
    parser.add_argument("--samples", type=int, default=None, help="每个平稳段的采样数")
    parser.set_defaults(handler=run)
