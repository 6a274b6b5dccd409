"""
仿真引擎 - 预算约束下的单次实验、遗憾统计与蒙特卡洛汇总
"""

import logging
import math
import time
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from app.core.environment import Environment
from app.core.exceptions import DomainError, ReplicationMismatchError, ScenarioValidationError
from app.core.policies import Policy, create_policy, oracle_select
from app.core.replication import ReplicationRunner
from app.core.utils import mean_and_stderr, spawn_generator
from app.models import Scenario

logger = logging.getLogger(__name__)


@dataclass
class Trace:
    """一次实验的逐回合记录，回合从 1 连续编号"""

    arms: np.ndarray
    rewards: np.ndarray
    costs: np.ndarray
    budget: float
    policy: str = ""

    @property
    def stopping_round(self) -> int:
        return len(self.arms)

    @property
    def rounds(self) -> np.ndarray:
        return np.arange(1, len(self.arms) + 1)

    @property
    def cumulative_cost(self) -> np.ndarray:
        return np.cumsum(self.costs)

    @property
    def total_reward(self) -> float:
        return float(self.rewards.sum())

    @property
    def total_cost(self) -> float:
        return float(self.costs.sum())

    @property
    def max_cost(self) -> float:
        return float(self.costs.max()) if len(self.costs) else 0.0

    def records(self):
        """逐回合 (θ, 臂, 奖励, 成本, 累计成本)"""
        cumulative = self.cumulative_cost
        for i in range(len(self.arms)):
            yield i + 1, int(self.arms[i]), float(self.rewards[i]), float(self.costs[i]), float(cumulative[i])


@dataclass
class RegretCurve:
    """回合 1..truncation_round 的平均累计遗憾"""

    policy: str
    mode: str
    mean: np.ndarray
    stderr: np.ndarray
    final_regret: float
    final_stderr: float
    truncation_round: int
    final_per_replication: np.ndarray = field(repr=False, default_factory=lambda: np.zeros(0))

    @property
    def rounds(self) -> np.ndarray:
        return np.arange(1, self.truncation_round + 1)

    @property
    def truncated_regret(self) -> float:
        """截断回合处的平均累计遗憾，策略间的比较以此为准"""
        return float(self.mean[-1]) if len(self.mean) else 0.0

    @property
    def truncated_stderr(self) -> float:
        return float(self.stderr[-1]) if len(self.stderr) else 0.0


def _make_trace(arms: List[int], rewards: List[float], costs: List[float], budget: float, name: str) -> Trace:
    return Trace(
        arms=np.asarray(arms, dtype=np.int16),
        rewards=np.asarray(rewards, dtype=float),
        costs=np.asarray(costs, dtype=float),
        budget=budget,
        policy=name,
    )


def _check_budget(budget: float) -> None:
    if budget < 0 or math.isnan(budget):
        raise DomainError(f"预算必须非负: {budget}")


def run_episode(policy: Policy, env: Environment, budget: float, rng: np.random.Generator) -> Trace:
    """
    在预算 B 下运行一次实验

    前 S 回合无条件初始化，之后只要累计成本 ≤ B 就继续选臂，
    因此最后一次拉动可能使累计成本超过 B。

    Args:
        policy: 策略实例（持有自身随机流）
        env: 环境
        budget: 预算 B
        rng: 环境随机流

    Returns:
        Trace: 实验记录
    """
    _check_budget(budget)
    arms: List[int] = []
    rewards: List[float] = []
    costs: List[float] = []
    spent = 0.0
    round_ = 1
    while round_ <= env.n_arms or spent <= budget:
        arm = policy.select_arm(round_)
        reward, cost = env.pull(arm, round_, rng)
        policy.observe(round_, arm, reward, cost)
        arms.append(arm)
        rewards.append(reward)
        costs.append(cost)
        spent += cost
        round_ += 1
    return _make_trace(arms, rewards, costs, budget, policy.name)


def oracle_episode(env: Environment, budget: float, rng: np.random.Generator) -> Trace:
    """
    Oracle 实验：每回合拉 argmax μ/η 的臂，没有初始化阶段，B=0 时为空记录
    """
    _check_budget(budget)
    arms: List[int] = []
    rewards: List[float] = []
    costs: List[float] = []
    spent = 0.0
    round_ = 1
    if budget > 0:
        while spent <= budget:
            arm = oracle_select(env, round_)
            reward, cost = env.pull(arm, round_, rng)
            arms.append(arm)
            rewards.append(reward)
            costs.append(cost)
            spent += cost
            round_ += 1
    return _make_trace(arms, rewards, costs, budget, "Oracle")


def _empirical_curve(trace: Trace, oracle: Trace, length: int) -> np.ndarray:
    rounds = np.arange(1, length + 1)
    policy_cum = np.concatenate(([0.0], np.cumsum(trace.rewards)))
    oracle_cum = np.concatenate(([0.0], np.cumsum(oracle.rewards)))
    return (
        oracle_cum[np.minimum(rounds, oracle.stopping_round)]
        - policy_cum[np.minimum(rounds, trace.stopping_round)]
    )


def _pseudo_increments(trace: Trace, env: Environment) -> np.ndarray:
    horizon = trace.stopping_round
    if horizon == 0:
        return np.zeros(0)
    mu, _ = env.mean_matrix(horizon)
    rows = np.arange(horizon)
    best = env.oracle_arms(horizon) - 1
    return mu[rows, best] - mu[rows, trace.arms.astype(int) - 1]


def regret_curves(
    policy_traces: Sequence[Trace],
    oracle_traces: Sequence[Trace],
    mode: str = "pseudo",
    env: Optional[Environment] = None,
    truncation_round: Optional[int] = None,
) -> RegretCurve:
    """
    计算平均累计遗憾曲线

    empirical: Σr*(θ ≤ min(n, T*)) − Σr(θ ≤ min(n, T))；
    pseudo: 逐回合累加 μ_{i*_θ,θ} − μ_{I_θ,θ}（需要 env）。

    Args:
        policy_traces: 策略的各次重复
        oracle_traces: Oracle 的各次重复（与策略一一对应）
        mode: empirical / pseudo
        env: 环境，pseudo 模式必需
        truncation_round: 曲线截断回合，缺省取各次重复的最小停止回合

    Returns:
        RegretCurve: 遗憾曲线
    """
    if not policy_traces:
        raise ReplicationMismatchError("至少需要一次重复")
    if len(policy_traces) != len(oracle_traces):
        raise ReplicationMismatchError(
            f"重复次数不一致: policy={len(policy_traces)}, oracle={len(oracle_traces)}"
        )
    if mode not in ("empirical", "pseudo"):
        raise ValueError(f"未知的遗憾统计方式: {mode}")
    if mode == "pseudo" and env is None:
        raise ValueError("pseudo 模式需要环境的真实均值")

    length = truncation_round or min(trace.stopping_round for trace in policy_traces)
    curves = np.empty((len(policy_traces), length))
    finals = np.empty(len(policy_traces))
    for i, (trace, oracle) in enumerate(zip(policy_traces, oracle_traces)):
        if mode == "empirical":
            curves[i] = _empirical_curve(trace, oracle, length)
            finals[i] = oracle.total_reward - trace.total_reward
        else:
            cumulative = np.cumsum(_pseudo_increments(trace, env))
            if len(cumulative) < length:
                raise ValueError(f"截断回合 {length} 超过停止回合 {len(cumulative)}")
            curves[i] = cumulative[:length]
            finals[i] = cumulative[-1] if len(cumulative) else 0.0

    mean, stderr = mean_and_stderr(curves)
    final_mean, final_stderr = mean_and_stderr(finals)
    return RegretCurve(
        policy=policy_traces[0].policy,
        mode=mode,
        mean=mean,
        stderr=stderr,
        final_regret=float(final_mean),
        final_stderr=float(final_stderr),
        truncation_round=length,
        final_per_replication=finals,
    )


# ---------------------------------------------------------------- 蒙特卡洛


@dataclass
class ReplicationTask:
    """一次重复实验的输入（需可被 pickle）"""

    scenario: Scenario
    replication: int
    base_seed: int


@dataclass
class ReplicationResult:
    """一次重复实验的所有记录"""

    replication: int
    traces: Dict[str, Trace]
    oracle: Trace


def run_replication(task: ReplicationTask) -> ReplicationResult:
    """
    运行一次重复：每个策略各自一个实验，环境随机流在策略间共享同一种子

    Oracle 类型的策略直接复用 Oracle 实验记录。
    """
    scenario = task.scenario
    env = Environment(scenario.environment)
    oracle = oracle_episode(env, scenario.budget, spawn_generator(task.base_seed, task.replication, "oracle"))

    traces: Dict[str, Trace] = {}
    for config in scenario.policies:
        if config.kind == "Oracle":
            traces[config.name] = Trace(oracle.arms, oracle.rewards, oracle.costs, oracle.budget, config.name)
            continue
        policy_rng = spawn_generator(task.base_seed, task.replication, "policy", config.name)
        env_rng = spawn_generator(task.base_seed, task.replication, "env")
        policy = create_policy(config, env, policy_rng)
        traces[config.name] = run_episode(policy, env, scenario.budget, env_rng)
    return ReplicationResult(replication=task.replication, traces=traces, oracle=oracle)


@dataclass
class StoppingStats:
    """停止回合与累计量统计"""

    mean_T: float
    min_T: int
    max_T: int
    mean_reward: float
    mean_cost: float


@dataclass
class ChoiceStats:
    """逐回合的选臂统计，chosen_* 为所选臂到该回合为止的经验均值（对重复取平均）"""

    optimal_play_rate: np.ndarray
    modal_arm: np.ndarray
    chosen_reward: np.ndarray
    chosen_cost: np.ndarray
    chosen_ratio: np.ndarray

    def optimal_play_fraction(self, after_round: int = 0) -> float:
        """第 after_round 回合之后选中最优臂的平均比例"""
        return float(self.optimal_play_rate[after_round:].mean())


@dataclass
class MonteCarloResult:
    """蒙特卡洛汇总结果"""

    scenario: Scenario
    replications: int
    base_seed: int
    regret_mode: str
    truncation_round: int
    curves: Dict[str, RegretCurve]
    stopping: Dict[str, StoppingStats]
    choices: Dict[str, ChoiceStats]
    oracle_arms: np.ndarray
    oracle_stopping: StoppingStats
    oracle_rewards: np.ndarray
    max_costs: Dict[str, np.ndarray]
    elapsed_seconds: float = 0.0

    @property
    def policy_names(self) -> List[str]:
        return list(self.curves)


def _stopping_stats(traces: Sequence[Trace]) -> StoppingStats:
    stops = np.array([trace.stopping_round for trace in traces])
    return StoppingStats(
        mean_T=float(stops.mean()),
        min_T=int(stops.min()),
        max_T=int(stops.max()),
        mean_reward=float(np.mean([trace.total_reward for trace in traces])),
        mean_cost=float(np.mean([trace.total_cost for trace in traces])),
    )


def chosen_arm_averages(trace: Trace, n_arms: int, length: int) -> Tuple[np.ndarray, np.ndarray]:
    """
    每回合所选臂的经验平均奖励与平均成本（含该回合的观测）

    Returns:
        Tuple[np.ndarray, np.ndarray]: (r̄, c̄)，长度为 length
    """
    rows = np.arange(length)
    arms = trace.arms[:length].astype(int) - 1
    pulled = np.zeros((length, n_arms))
    pulled[rows, arms] = 1.0
    counts = np.cumsum(pulled, axis=0)[rows, arms]
    rewards = np.cumsum(pulled * trace.rewards[:length, None], axis=0)[rows, arms]
    costs = np.cumsum(pulled * trace.costs[:length, None], axis=0)[rows, arms]
    return rewards / counts, costs / counts


def _choice_stats(traces: Sequence[Trace], oracle_arms: np.ndarray, n_arms: int, length: int) -> ChoiceStats:
    arms = np.stack([trace.arms[:length].astype(int) for trace in traces])
    optimal = (arms == oracle_arms[:length]).mean(axis=0)
    counts = np.stack([(arms == arm).sum(axis=0) for arm in range(1, n_arms + 1)])
    # argmax 并列时取编号最小的臂
    modal = counts.argmax(axis=0) + 1
    averages = [chosen_arm_averages(trace, n_arms, length) for trace in traces]
    reward = np.stack([r for r, _ in averages])
    cost = np.stack([c for _, c in averages])
    return ChoiceStats(
        optimal_play_rate=optimal,
        modal_arm=modal,
        chosen_reward=reward.mean(axis=0),
        chosen_cost=cost.mean(axis=0),
        chosen_ratio=(reward / cost).mean(axis=0),
    )


def monte_carlo(
    scenario: Scenario,
    n_reps: Optional[int] = None,
    base_seed: Optional[int] = None,
    parallelism: Optional[int] = None,
    regret_mode: Optional[str] = None,
    show_progress: Optional[bool] = None,
) -> MonteCarloResult:
    """
    对场景中的每个策略运行 n_reps 次独立实验并汇总

    结果只取决于 (scenario, n_reps, base_seed)，与并行度无关。

    Args:
        scenario: 实验场景
        n_reps: 重复次数，缺省取场景配置
        base_seed: 基础种子，缺省取场景配置
        parallelism: 并行进程数
        regret_mode: empirical / pseudo，缺省取场景配置
        show_progress: 是否显示进度条

    Returns:
        MonteCarloResult: 汇总结果
    """
    if n_reps is None:
        n_reps = scenario.replications
    if n_reps < 1:
        raise ScenarioValidationError(f"重复次数必须 ≥ 1: {n_reps}")
    base_seed = scenario.base_seed if base_seed is None else base_seed
    mode = regret_mode or scenario.regret_mode

    start = time.time()
    logger.info(
        f"🎲 开始蒙特卡洛: scenario={scenario.name}, policies={len(scenario.policies)}, "
        f"reps={n_reps}, seed={base_seed}, mode={mode}"
    )
    runner = ReplicationRunner(parallelism, show_progress)
    tasks = [ReplicationTask(scenario, rep, base_seed) for rep in range(n_reps)]
    results: List[ReplicationResult] = runner.map(run_replication, tasks, desc=scenario.name)
    results.sort(key=lambda r: r.replication)

    env = Environment(scenario.environment)
    names = [config.name for config in scenario.policies]
    oracle_traces = [result.oracle for result in results]
    by_policy = {name: [result.traces[name] for result in results] for name in names}

    truncation = min(trace.stopping_round for traces in by_policy.values() for trace in traces)
    horizon = max(
        [trace.stopping_round for traces in by_policy.values() for trace in traces]
        + [trace.stopping_round for trace in oracle_traces]
    )
    oracle_arms = env.oracle_arms(max(horizon, 1))

    curves: Dict[str, RegretCurve] = {}
    stopping: Dict[str, StoppingStats] = {}
    choices: Dict[str, ChoiceStats] = {}
    for name in names:
        traces = by_policy[name]
        curves[name] = regret_curves(traces, oracle_traces, mode, env, truncation)
        stopping[name] = _stopping_stats(traces)
        choices[name] = _choice_stats(traces, oracle_arms, env.n_arms, truncation)
        logger.info(
            f"  {name}: regret@T={curves[name].truncated_regret:.3f} ± {curves[name].truncated_stderr:.3f}, "
            f"final regret={curves[name].final_regret:.3f} ± {curves[name].final_stderr:.3f}, "
            f"mean T={stopping[name].mean_T:.1f}"
        )

    elapsed = time.time() - start
    logger.info(f"✅ 蒙特卡洛完成，用时 {elapsed:.2f}s")
    return MonteCarloResult(
        scenario=scenario,
        replications=n_reps,
        base_seed=base_seed,
        regret_mode=mode,
        truncation_round=truncation,
        curves=curves,
        stopping=stopping,
        choices=choices,
        oracle_arms=oracle_arms,
        oracle_stopping=_stopping_stats(oracle_traces),
        oracle_rewards=np.array([trace.total_reward for trace in oracle_traces]),
        max_costs={name: np.array([t.max_cost for t in by_policy[name]]) for name in names},
        elapsed_seconds=elapsed,
    )
