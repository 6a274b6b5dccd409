"""
analytic 子命令 - 写出传输时隙 pmf 与各分段的 (μ, η)
"""

import argparse
import logging

import pandas as pd

from app.commands.common import add_common_arguments, output_dir_for, resolve_scenario
from app.core import netmodel
from app.core.environment import Environment
from app.core.schedule import value_at
from app.core.utils import write_csv
from app.core.validation import segment_rounds
from app.models import Scenario

logger = logging.getLogger(__name__)


def pmf_frame(scenario: Scenario) -> pd.DataFrame:
    """transmission_pmf.csv: arm, round, k, pmf（仅生成模型环境）"""
    frames = []
    for arm_id, arm in enumerate(scenario.environment.arms, start=1):
        for round_ in segment_rounds(arm):
            p = value_at(arm.server.link.success_schedule, round_)
            pmf = netmodel.transmission_pmf_vector(arm.server.geometry, p)
            frames.append(
                pd.DataFrame({"arm": arm_id, "round": round_, "k": range(1, len(pmf) + 1), "pmf": pmf})
            )
    return pd.concat(frames, ignore_index=True)


def means_frame(env: Environment) -> pd.DataFrame:
    """means.csv: arm, round, mu, eta（每个分段起点）"""
    rows = []
    for arm in range(1, env.n_arms + 1):
        for round_ in env.segment_starts:
            mu, eta = env.oracle_means(arm, round_)
            rows.append({"arm": arm, "round": round_, "mu": mu, "eta": eta})
    return pd.DataFrame(rows, columns=["arm", "round", "mu", "eta"])


def run(args: argparse.Namespace) -> int:
    scenario = resolve_scenario(args)
    env = Environment(scenario.environment)
    output_dir = output_dir_for(scenario)

    if scenario.environment.kind == "generative":
        write_csv(pmf_frame(scenario), output_dir, "transmission_pmf.csv")
    else:
        logger.warning("⚠️ 参数化环境没有传输时隙分布，跳过 transmission_pmf.csv")
    means = means_frame(env)
    write_csv(means, output_dir, "means.csv")
    print(means.to_string(index=False))
    return 0


def register(subparsers) -> None:
    parser = subparsers.add_parser("analytic", help="写出解析 pmf 与平均奖励/成本表")
    add_common_arguments(parser)
    parser.set_defaults(handler=run)
