"""
数据模型模块 - 参数表、服务器模型、臂、策略与场景配置
"""

import math
from typing import Any, List, Literal, Optional, Tuple, Union

from pydantic import BaseModel, ConfigDict, Field, model_serializer, model_validator
from typing_extensions import Annotated

from app.config import get_policy_defaults, settings

POLICY_KINDS = ("BPRPC-SWUCB", "KUBE", "UCB1", "UCB-based", "UCB-BV1", "EpsGreedy", "Oracle")
PolicyKind = Literal["BPRPC-SWUCB", "KUBE", "UCB1", "UCB-based", "UCB-BV1", "EpsGreedy", "Oracle"]


class PiecewiseSchedule(BaseModel):
    """
    分段常数参数表：回合 -> 实数

    配置文件中写作 [[round, value], ...]，单个数字表示常数表。
    """

    model_config = ConfigDict(frozen=True)

    breakpoints: Tuple[int, ...] = Field(..., description="升序断点，首个为 1")
    values: Tuple[float, ...] = Field(..., description="各断点处的取值")

    @model_validator(mode="before")
    @classmethod
    def parse_pairs(cls, data: Any) -> Any:
        """解析 (round, value) 对列表"""
        if isinstance(data, (int, float)) and not isinstance(data, bool):
            return {"breakpoints": (1,), "values": (float(data),)}
        if isinstance(data, (list, tuple)):
            pairs = [tuple(pair) for pair in data]
            if any(len(pair) != 2 for pair in pairs):
                raise ValueError("schedule 的每一项必须是 [round, value]")
            return {
                "breakpoints": tuple(int(r) for r, _ in pairs),
                "values": tuple(float(v) for _, v in pairs),
            }
        return data

    @model_validator(mode="after")
    def check_invariants(self) -> "PiecewiseSchedule":
        if not self.breakpoints:
            raise ValueError("schedule 不能为空")
        if len(self.breakpoints) != len(self.values):
            raise ValueError("breakpoints 与 values 长度不一致")
        if self.breakpoints[0] != 1:
            raise ValueError("schedule 的第一个断点必须是回合 1")
        if any(b <= a for a, b in zip(self.breakpoints, self.breakpoints[1:])):
            raise ValueError("schedule 断点必须严格递增")
        if not all(math.isfinite(v) for v in self.values):
            raise ValueError("schedule 取值必须有限")
        return self

    def to_pairs(self) -> List[List[float]]:
        """转换为 [[round, value], ...]"""
        return [[b, v] for b, v in zip(self.breakpoints, self.values)]

    @model_serializer
    def _serialize(self) -> List[List[float]]:
        return self.to_pairs()

    @classmethod
    def constant(cls, value: float) -> "PiecewiseSchedule":
        """常数参数表"""
        return cls(breakpoints=(1,), values=(float(value),))

    @property
    def minimum(self) -> float:
        return min(self.values)

    @property
    def maximum(self) -> float:
        return max(self.values)


class GeometryParams(BaseModel):
    """中继节点几何参数（PPP 强度、传输半径、距离、最大跳数）"""

    model_config = ConfigDict(frozen=True)

    intensity: float = Field(..., gt=0, description="中继节点强度 Λ")
    tx_range: float = Field(..., gt=0, description="传输半径 R")
    distance: float = Field(..., ge=0, description="用户到服务器距离 ℓ")
    h_max: int = Field(..., ge=1, description="最大跳数")

    @model_validator(mode="after")
    def check_lens_domain(self) -> "GeometryParams":
        if self.distance > 2 * self.tx_range:
            raise ValueError("geometry: distance 必须满足 0 ≤ ℓ ≤ 2R")
        return self


class QueueParams(BaseModel):
    """M/M/1 队列参数"""

    model_config = ConfigDict(frozen=True)

    service_rate: float = Field(..., gt=0, description="服务速率 ρ")
    arrival_schedule: PiecewiseSchedule = Field(..., description="到达率 λ 的分段表")

    @model_validator(mode="after")
    def check_stability(self) -> "QueueParams":
        if self.arrival_schedule.minimum < 0:
            raise ValueError("stability: 到达率 λ 不能为负")
        if self.service_rate <= self.arrival_schedule.maximum:
            raise ValueError(
                f"stability: 需要 ρ > λ，ρ={self.service_rate}, max λ={self.arrival_schedule.maximum}"
            )
        return self


class LinkParams(BaseModel):
    """链路参数：单次传输成功概率 p 的分段表"""

    model_config = ConfigDict(frozen=True)

    success_schedule: PiecewiseSchedule = Field(..., description="成功概率 p 的分段表")

    @model_validator(mode="after")
    def check_probabilities(self) -> "LinkParams":
        if not all(0 < v <= 1 for v in self.success_schedule.values):
            raise ValueError("link: 成功概率 p 必须在 (0, 1] 内")
        return self


class EnergyCoeffs(BaseModel):
    """线性能耗系数 c = a·f + a'·g + a''"""

    model_config = ConfigDict(frozen=True)

    a: float = Field(..., gt=0, description="单位处理时间能耗")
    a_prime: float = Field(..., gt=0, description="单位传输时间能耗")
    a_second: float = Field(0.0, ge=0, description="固定能耗")

    @property
    def floor(self) -> float:
        """成本下界 a' + a''"""
        return self.a_prime + self.a_second


class ServerModel(BaseModel):
    """单个边缘服务器的物理模型"""

    model_config = ConfigDict(frozen=True)

    geometry: GeometryParams
    queue: QueueParams
    link: LinkParams
    energy: EnergyCoeffs


class QoSThreshold(BaseModel):
    """时延阈值 δ"""

    model_config = ConfigDict(frozen=True)

    delta: float = Field(..., gt=0, description="时延阈值")


class GenerativeArm(BaseModel):
    """物理生成模型的臂：服务器模型 + QoS 阈值"""

    model_config = ConfigDict(frozen=True)

    kind: Literal["generative"] = "generative"
    server: ServerModel
    qos: QoSThreshold

    @property
    def cost_floor(self) -> float:
        return self.server.energy.floor


class ParametricArm(BaseModel):
    """参数化臂：Bernoulli 奖励 + 平移指数成本"""

    model_config = ConfigDict(frozen=True)

    kind: Literal["parametric"] = "parametric"
    reward_mean_schedule: PiecewiseSchedule = Field(..., description="平均奖励 μ")
    cost_mean_schedule: PiecewiseSchedule = Field(..., description="平均成本 η")
    shift: float = Field(..., ge=0, description="成本平移量 a' + a''")

    @model_validator(mode="after")
    def check_means(self) -> "ParametricArm":
        if not all(0 <= v <= 1 for v in self.reward_mean_schedule.values):
            raise ValueError("parametric arm: μ 必须在 [0, 1] 内")
        if not all(v > self.shift for v in self.cost_mean_schedule.values):
            raise ValueError("parametric arm: η 必须大于 shift")
        return self

    @property
    def cost_floor(self) -> float:
        return self.shift


ArmSpec = Annotated[Union[GenerativeArm, ParametricArm], Field(discriminator="kind")]


class EnvironmentSpec(BaseModel):
    """环境描述：同一类型的 S 个臂"""

    model_config = ConfigDict(frozen=True)

    kind: Literal["generative", "parametric"]
    arms: Tuple[ArmSpec, ...]

    @model_validator(mode="before")
    @classmethod
    def inject_arm_kind(cls, data: Any) -> Any:
        """配置文件中的臂可以省略 kind 字段"""
        if isinstance(data, dict) and "kind" in data and isinstance(data.get("arms"), (list, tuple)):
            arms = []
            for arm in data["arms"]:
                if isinstance(arm, dict) and "kind" not in arm:
                    arm = {**arm, "kind": data["kind"]}
                arms.append(arm)
            data = {**data, "arms": arms}
        return data

    @model_validator(mode="after")
    def check_arms(self) -> "EnvironmentSpec":
        if len(self.arms) < 2:
            raise ValueError("environment: 至少需要 2 个臂")
        if any(arm.kind != self.kind for arm in self.arms):
            raise ValueError("environment: 所有臂必须与环境类型一致")
        return self

    @property
    def cost_floor(self) -> float:
        """所有臂的最小成本 c_min"""
        return min(arm.cost_floor for arm in self.arms)


class PolicyConfig(BaseModel):
    """策略配置，缺省参数取自 POLICY_DEFAULTS"""

    model_config = ConfigDict(frozen=True)

    kind: PolicyKind
    label: Optional[str] = Field(None, description="输出中的策略名，缺省为 kind")
    xi: Optional[float] = Field(None, gt=0, description="BPRPC-SWUCB 探索权重 ξ")
    xi_prime: Optional[float] = Field(None, gt=0, description="UCB1 探索权重 ξ'")
    xi_second: Optional[float] = Field(None, gt=0, description="UCB-based 探索权重 ξ''")
    tau: Optional[int] = Field(None, ge=1, description="滑动窗口长度 τ")
    r_max: Optional[float] = Field(None, gt=0, description="奖励上界，缺省取环境值")
    c_min: Optional[float] = Field(None, gt=0, description="成本下界，缺省取环境值")

    @model_validator(mode="before")
    @classmethod
    def apply_defaults(cls, data: Any) -> Any:
        if isinstance(data, dict) and "kind" in data:
            merged = get_policy_defaults(data["kind"])
            merged.update({k: v for k, v in data.items() if v is not None})
            return merged
        return data

    @model_validator(mode="after")
    def check_parameters(self) -> "PolicyConfig":
        if self.kind == "BPRPC-SWUCB":
            if self.xi is None or self.xi <= 0.5:
                raise ValueError(f"BPRPC-SWUCB 需要 ξ > 1/2，当前 ξ={self.xi}")
            if self.tau is None:
                raise ValueError("BPRPC-SWUCB 需要窗口长度 τ")
        if self.kind == "UCB1" and self.xi_prime is None:
            raise ValueError("UCB1 需要 ξ'")
        if self.kind == "UCB-based" and self.xi_second is None:
            raise ValueError("UCB-based 需要 ξ''")
        return self

    @property
    def name(self) -> str:
        return self.label or self.kind

    def with_bounds(self, r_max: float, c_min: float) -> "PolicyConfig":
        """补全环境给出的 r_max / c_min"""
        return self.model_copy(
            update={
                "r_max": self.r_max if self.r_max is not None else r_max,
                "c_min": self.c_min if self.c_min is not None else c_min,
            }
        )


class Scenario(BaseModel):
    """实验场景"""

    model_config = ConfigDict(frozen=True)

    name: str = Field("scenario", description="场景名称")
    environment: EnvironmentSpec
    policies: Tuple[PolicyConfig, ...] = Field(..., min_length=1)
    budget: float = Field(..., gt=0, description="能量预算 B")
    replications: int = Field(default_factory=lambda: settings.default_replications, ge=1)
    base_seed: int = Field(default_factory=lambda: settings.default_seed, ge=0)
    regret_mode: Literal["empirical", "pseudo"] = Field(default_factory=lambda: settings.regret_mode)
    output_dir: Optional[str] = Field(None, description="输出目录，缺省取全局配置")

    @model_validator(mode="after")
    def check_references(self) -> "Scenario":
        names = [policy.name for policy in self.policies]
        if len(set(names)) != len(names):
            raise ValueError(f"policies: 策略名重复 {names}")
        if self.environment.cost_floor <= 0:
            raise ValueError("environment: 成本下界 c_min 必须大于 0")
        return self

    def policy(self, name: str) -> PolicyConfig:
        for policy in self.policies:
            if policy.name == name:
                return policy
        raise KeyError(name)


class BoundInputs(BaseModel):
    """遗憾上界的输入"""

    model_config = ConfigDict(frozen=True)

    budget: float = Field(..., gt=0)
    r_max: float = Field(..., gt=0)
    c_min: float = Field(..., gt=0)
    c_max: float = Field(math.inf, gt=0, description="成本上界，可为 +inf")
    xi: float = Field(..., gt=0.5)
    tau: int = Field(..., ge=2)
    n_arms: int = Field(..., ge=1)
    change_points: int = Field(..., ge=0, description="变点数 Υ")
    gaps: Tuple[Optional[float], ...] = Field(..., description="各臂间隔 Δ(i)，None 表示从不次优")

    @model_validator(mode="after")
    def check_consistency(self) -> "BoundInputs":
        if self.c_min > self.c_max:
            raise ValueError("需要 c_min ≤ c_max")
        if len(self.gaps) != self.n_arms:
            raise ValueError("gaps 长度必须等于臂数")
        if any(g is not None and g <= 0 for g in self.gaps):
            raise ValueError("次优臂的间隔 Δ(i) 必须大于 0")
        return self


def describe_validation_error(error: Exception) -> str:
    """把 pydantic ValidationError 压缩为一行：字段路径 + 违反的约束"""
    errors = getattr(error, "errors", None)
    if not callable(errors):
        return str(error)
    parts = []
    for item in errors():
        location = ".".join(str(p) for p in item.get("loc", ())) or "<root>"
        parts.append(f"{location}: {item.get('msg')}")
    return "; ".join(parts)


__all__ = [
    "POLICY_KINDS",
    "PiecewiseSchedule",
    "GeometryParams",
    "QueueParams",
    "LinkParams",
    "EnergyCoeffs",
    "ServerModel",
    "QoSThreshold",
    "GenerativeArm",
    "ParametricArm",
    "EnvironmentSpec",
    "PolicyConfig",
    "Scenario",
    "BoundInputs",
    "describe_validation_error",
]
