"""
sweep 子命令 - BPRPC-SWUCB 的 (ξ, τ) 参数网格扫描
"""

import argparse
import itertools
import logging
from typing import List, Optional

import pandas as pd

from app.commands.common import add_common_arguments, output_dir_for, resolve_scenario, show_progress
from app.config import get_policy_defaults
from app.core.engine import monte_carlo
from app.core.exceptions import ScenarioValidationError
from app.core.scenario import validate_scenario
from app.core.utils import format_table, parse_grid, write_csv
from app.models import PolicyConfig, Scenario

logger = logging.getLogger(__name__)


def _base_policy(scenario: Scenario) -> PolicyConfig:
    for policy in scenario.policies:
        if policy.kind == "BPRPC-SWUCB":
            return policy
    return PolicyConfig(kind="BPRPC-SWUCB")


def sweep(
    scenario: Scenario,
    xi_grid: List[float],
    tau_grid: List[int],
    parallelism: Optional[int] = None,
    progress: Optional[bool] = None,
) -> pd.DataFrame:
    """
    对每个 (ξ, τ) 只运行 BPRPC-SWUCB，返回按 (xi, tau) 排序的最终遗憾表

    Returns:
        pd.DataFrame: xi, tau, mean_regret, stderr
    """
    base = _base_policy(scenario)
    rows = []
    for xi, tau in itertools.product(sorted(xi_grid), sorted(tau_grid)):
        policy = base.model_dump(exclude_none=True)
        policy.update({"xi": xi, "tau": tau, "label": base.name})
        point = validate_scenario({**scenario.model_dump(), "policies": [policy]})
        result = monte_carlo(
            point,
            n_reps=point.replications,
            base_seed=point.base_seed,
            parallelism=parallelism,
            regret_mode=point.regret_mode,
            show_progress=progress,
        )
        curve = result.curves[base.name]
        rows.append({"xi": xi, "tau": tau, "mean_regret": curve.final_regret, "stderr": curve.final_stderr})
        logger.info(f"  ξ={xi}, τ={tau}: regret={curve.final_regret:.3f} ± {curve.final_stderr:.3f}")
    return pd.DataFrame(rows, columns=["xi", "tau", "mean_regret", "stderr"])


def run(args: argparse.Namespace) -> int:
    scenario = resolve_scenario(args)
    base = _base_policy(scenario)
    defaults = get_policy_defaults("BPRPC-SWUCB")
    xi_grid = parse_grid(args.xi_grid, float) or [base.xi or defaults["xi"]]
    tau_grid = parse_grid(args.tau_grid, int) or [base.tau or defaults["tau"]]
    if any(xi <= 0.5 for xi in xi_grid):
        raise ScenarioValidationError(f"xi-grid: BPRPC-SWUCB 需要 ξ > 1/2，当前 {xi_grid}")

    logger.info(f"🔍 参数扫描: ξ={xi_grid}, τ={tau_grid}")
    frame = sweep(scenario, xi_grid, tau_grid, args.parallelism, show_progress(args))
    write_csv(frame, output_dir_for(scenario), "sweep.csv")
    print(format_table(frame.to_dict("records")))
    return 0


def register(subparsers) -> None:
    parser = subparsers.add_parser("sweep", help="扫描 BPRPC-SWUCB 的 ξ / τ 网格")
    add_common_arguments(parser)
    parser.add_argument("--xi-grid", default=None, help="逗号分隔的 ξ 取值，如 0.55,0.6,0.8")
    parser.add_argument("--tau-grid", default=None, help="逗号分隔的 τ 取值，如 500,1000,2000")
    parser.set_defaults(handler=run)
