"""
bound 子命令 - 次优间隔、Oracle 奖励上限与遗憾上界
"""

import argparse
import itertools
import logging

import pandas as pd
from pydantic import ValidationError

from app.commands.common import add_common_arguments, output_dir_for, resolve_scenario
from app.core.bound import bound_inputs_for, lemma1_cap, suggested_window, theorem1_bound
from app.core.environment import Environment
from app.core.exceptions import DomainError, ScenarioValidationError
from app.core.utils import format_table, parse_grid, write_csv
from app.models import BoundInputs, PolicyConfig, describe_validation_error

logger = logging.getLogger(__name__)


def run(args: argparse.Namespace) -> int:
    scenario = resolve_scenario(args)
    env = Environment(scenario.environment)
    config = next(
        (policy for policy in scenario.policies if policy.kind == "BPRPC-SWUCB"),
        PolicyConfig(kind="BPRPC-SWUCB"),
    )
    inputs = bound_inputs_for(env, config, scenario.budget)

    gaps = [
        {"arm": arm, "gap": "none" if value is None else round(value, 6)}
        for arm, value in enumerate(inputs.gaps, start=1)
    ]
    print(format_table(gaps))

    cap = lemma1_cap(scenario.budget, inputs.r_max, inputs.c_min)
    value = theorem1_bound(inputs)
    print(f"change points Υ = {inputs.change_points}")
    print(f"oracle reward cap = {cap:.6g}")
    print(f"regret bound (ξ={inputs.xi}, τ={inputs.tau}) = {value:.6g}")
    try:
        print(f"suggested τ = {suggested_window(scenario.budget, inputs.change_points)}")
    except DomainError as e:
        logger.warning(f"⚠️ 无法给出窗口建议: {e}")

    xi_grid = parse_grid(args.xi_grid, float) or [inputs.xi]
    tau_grid = parse_grid(args.tau_grid, int) or [inputs.tau]
    rows = []
    for tau, xi in itertools.product(sorted(tau_grid), sorted(xi_grid)):
        try:
            point = BoundInputs.model_validate({**inputs.model_dump(), "tau": tau, "xi": xi})
        except ValidationError as e:
            raise ScenarioValidationError(describe_validation_error(e)) from e
        rows.append({"tau": tau, "xi": xi, "bound": theorem1_bound(point)})
    write_csv(pd.DataFrame(rows, columns=["tau", "xi", "bound"]), output_dir_for(scenario), "bound.csv")
    return 0


def register(subparsers) -> None:
    parser = subparsers.add_parser("bound", help="计算间隔 Δ(i) 与 BPRPC-SWUCB 遗憾上界")
    add_common_arguments(parser)
    parser.add_argument("--xi-grid", default=None, help="逗号分隔的 ξ 取值（需 > 0.5）")
    parser.add_argument("--tau-grid", default=None, help="逗号分隔的 τ 取值（需 ≥ 2）")
    parser.set_defaults(handler=run)
