"""
simulate 子命令 - 运行场景中的所有策略并写出遗憾、选臂、停止回合、效用与所选臂经验效用表
"""

import argparse
import logging
import os

import pandas as pd

from app.commands.common import add_common_arguments, output_dir_for, resolve_scenario, show_progress
from app.core.engine import MonteCarloResult, monte_carlo
from app.core.environment import Environment
from app.core.scenario import dump_scenario
from app.core.utils import format_table, write_csv

logger = logging.getLogger(__name__)


def regret_frame(result: MonteCarloResult) -> pd.DataFrame:
    """regret.csv: round, policy, mean_regret, stderr"""
    frames = []
    for name, curve in result.curves.items():
        frames.append(
            pd.DataFrame(
                {"round": curve.rounds, "policy": name, "mean_regret": curve.mean, "stderr": curve.stderr}
            )
        )
    return pd.concat(frames, ignore_index=True)


def choices_frame(result: MonteCarloResult) -> pd.DataFrame:
    """choices.csv: round, policy, optimal_play_rate, oracle_arm, modal_arm"""
    rounds = range(1, result.truncation_round + 1)
    frames = []
    for name, stats in result.choices.items():
        frames.append(
            pd.DataFrame(
                {
                    "round": rounds,
                    "policy": name,
                    "optimal_play_rate": stats.optimal_play_rate,
                    "oracle_arm": result.oracle_arms[: result.truncation_round],
                    "modal_arm": stats.modal_arm,
                }
            )
        )
    return pd.concat(frames, ignore_index=True)


def stopping_frame(result: MonteCarloResult) -> pd.DataFrame:
    """stopping.csv: policy, mean_T, min_T, max_T"""
    return pd.DataFrame(
        [
            {"policy": name, "mean_T": stats.mean_T, "min_T": stats.min_T, "max_T": stats.max_T}
            for name, stats in result.stopping.items()
        ]
    )


def utility_frame(env: Environment, horizon: int) -> pd.DataFrame:
    """utility.csv: round, arm, mu, eta, ratio"""
    mu, eta = env.mean_matrix(horizon)
    frames = []
    for arm in range(1, env.n_arms + 1):
        frames.append(
            pd.DataFrame(
                {
                    "round": range(1, horizon + 1),
                    "arm": arm,
                    "mu": mu[:, arm - 1],
                    "eta": eta[:, arm - 1],
                    "ratio": mu[:, arm - 1] / eta[:, arm - 1],
                }
            )
        )
    return pd.concat(frames, ignore_index=True)


def utility_trace_frame(result: MonteCarloResult, env: Environment) -> pd.DataFrame:
    """utility_trace.csv: round, policy, avg_reward, avg_cost, ratio, oracle_ratio"""
    horizon = result.truncation_round
    mu, eta = env.mean_matrix(horizon)
    oracle_ratio = (mu / eta).max(axis=1)
    frames = []
    for name, stats in result.choices.items():
        frames.append(
            pd.DataFrame(
                {
                    "round": range(1, horizon + 1),
                    "policy": name,
                    "avg_reward": stats.chosen_reward,
                    "avg_cost": stats.chosen_cost,
                    "ratio": stats.chosen_ratio,
                    "oracle_ratio": oracle_ratio,
                }
            )
        )
    return pd.concat(frames, ignore_index=True)


def write_results(result: MonteCarloResult, output_dir: str) -> None:
    """写出 simulate 的全部结果文件"""
    env = Environment(result.scenario.environment)
    write_csv(regret_frame(result), output_dir, "regret.csv")
    write_csv(choices_frame(result), output_dir, "choices.csv")
    write_csv(stopping_frame(result), output_dir, "stopping.csv")
    write_csv(utility_frame(env, result.truncation_round), output_dir, "utility.csv")
    write_csv(utility_trace_frame(result, env), output_dir, "utility_trace.csv")
    with open(os.path.join(output_dir, "scenario.yaml"), "w", encoding="utf-8") as f:
        f.write(dump_scenario(result.scenario))


def run(args: argparse.Namespace) -> int:
    scenario = resolve_scenario(args)
    result = monte_carlo(
        scenario,
        n_reps=scenario.replications,
        base_seed=scenario.base_seed,
        parallelism=args.parallelism,
        regret_mode=scenario.regret_mode,
        show_progress=show_progress(args),
    )
    output_dir = output_dir_for(scenario)
    write_results(result, output_dir)

    summary = [
        {
            "policy": name,
            "regret@T": round(curve.truncated_regret, 4),
            "stderr@T": round(curve.truncated_stderr, 4),
            "final_regret": round(curve.final_regret, 4),
            "stderr": round(curve.final_stderr, 4),
            "mean_T": round(result.stopping[name].mean_T, 1),
        }
        for name, curve in result.curves.items()
    ]
    print(format_table(summary))
    logger.info(f"📊 结果目录: {output_dir}")
    return 0


def register(subparsers) -> None:
    parser = subparsers.add_parser("simulate", help="运行蒙特卡洛仿真，写出遗憾曲线等 CSV")
    add_common_arguments(parser)
    parser.set_defaults(handler=run)
