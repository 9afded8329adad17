"""
报告与参数模型定义
"""
import math
from enum import Enum
from typing import List, Optional, Tuple

from pydantic import BaseModel, Field, field_validator


class Scheme(str, Enum):
    """传送方案"""
    CLASSICAL = "classical"
    EPR = "epr"


class Regime(str, Enum):
    """保真度区间, 边界 F = 1/2 与 F = 2/3"""
    BELOW_CLASSICAL = "BelowClassical"
    CLASSICAL_BOUNDARY = "ClassicalBoundary"
    INTERMEDIATE = "Intermediate"
    SECURE = "Secure"


class GaussianGuess(BaseModel):
    """重建 (或经典猜测) 的高斯分布"""
    mean_x: float = Field(..., description="x_b")
    mean_y: float = Field(..., description="y_b")
    n_x: float = Field(..., ge=0, description="x 方向方差 N_X")
    n_y: float = Field(..., ge=0, description="y 方向方差 N_Y")


class FidelityEstimate(BaseModel):
    """闭式保真度与 Monte Carlo 估计"""
    closed_form: float = Field(..., ge=0, le=1)
    monte_carlo: float = Field(..., ge=0, le=1)
    std_error: float = Field(..., ge=0)
    n_samples: int = Field(..., ge=1)

    @property
    def deviation(self) -> float:
        return abs(self.closed_form - self.monte_carlo)

    def agrees(self, sigmas: float = 4.0, slack: float = 1e-12) -> bool:
        """|闭式 − MC| ≤ sigmas·标准误 (slack 吸收零方差时的舍入)"""
        return self.deviation <= sigmas * self.std_error + slack


class ProtocolConfig(BaseModel):
    """EPR 传送参数"""
    r: float = Field(default=0.0, ge=0, description="压缩参数")
    eta_alice: float = Field(default=1.0, ge=0, le=1, description="Alice 一臂的透射效率")
    eta_bob: float = Field(default=1.0, ge=0, le=1, description="Bob 一臂的透射效率")
    gain: float = Field(default=1.0, ge=0, description="前馈增益 g_T (端到端)")

    @classmethod
    def symmetric(cls, r: float, eta: float = 1.0, gain: float = 1.0) -> "ProtocolConfig":
        return cls(r=r, eta_alice=eta, eta_bob=eta, gain=gain)


class TeleportReport(BaseModel):
    """
    传送结果
    n_x_out / n_y_out 为输入参考的等效输入噪声 var(X_out − g·X_in)/g²
    gain 为 inf 时表示只用经典信道的拷贝, 均值与方差取测量值本身
    """
    n_x_out: float = Field(..., ge=0)
    n_y_out: float = Field(..., ge=0)
    gain: float
    mean_x_out: float
    mean_y_out: float
    var_x_out: float = Field(..., ge=0)
    var_y_out: float = Field(..., ge=0)
    fidelity_at_unity_gain: Optional[float] = None
    label: str = "bob"

    @property
    def total_noise(self) -> float:
        return self.n_x_out + self.n_y_out

    @property
    def is_unity_gain(self) -> bool:
        return self.gain == 1.0


class MeasurementReport(BaseModel):
    """经典测量: 噪声包含分束噪声与输入模噪声"""
    n_x_m: float = Field(..., ge=0)
    n_y_m: float = Field(..., ge=0)
    measured_mean_x: float
    measured_mean_y: float


class EveReport(BaseModel):
    """Eve 与 Bob 的拷贝对比, 双方都取各自最优增益"""
    n_x_eve: float = Field(..., ge=0)
    n_y_eve: float = Field(..., ge=0)
    n_x_bob: float = Field(..., ge=0)
    n_y_bob: float = Field(..., ge=0)
    eve_wins: bool

    @classmethod
    def from_reports(cls, eve: TeleportReport, bob: TeleportReport) -> "EveReport":
        return cls(
            n_x_eve=eve.n_x_out,
            n_y_eve=eve.n_y_out,
            n_x_bob=bob.n_x_out,
            n_y_bob=bob.n_y_out,
            eve_wins=eve.total_noise < bob.total_noise,
        )

    @property
    def n_eve_total(self) -> float:
        return self.n_x_eve + self.n_y_eve

    @property
    def n_bob_total(self) -> float:
        return self.n_x_bob + self.n_y_bob


class SweepSpec(BaseModel):
    """参数扫描网格: r 外层, eta 中层, gain 内层"""
    r_values: List[float] = Field(..., min_length=1)
    eta_values: List[float] = Field(..., min_length=1, description="对称损耗, 同时作用于两臂")
    gain_values: List[float] = Field(default=[1.0], min_length=1)
    input_alpha: Tuple[float, float] = Field(default=(1.0, 1.0))
    mc_samples: int = Field(default=0, ge=0, description="每点 Monte Carlo 复核采样数, 0 为不复核")
    seed: int = 0

    @field_validator("r_values")
    @classmethod
    def _non_negative(cls, values: List[float]) -> List[float]:
        if any(v < 0 or math.isnan(v) for v in values):
            raise ValueError("r 必须非负")
        return values

    @field_validator("gain_values")
    @classmethod
    def _positive(cls, values: List[float]) -> List[float]:
        if any(not v > 0 for v in values):
            raise ValueError("gain 必须为正")
        return values

    @field_validator("eta_values")
    @classmethod
    def _unit_interval(cls, values: List[float]) -> List[float]:
        if any(not 0.0 <= v <= 1.0 for v in values):
            raise ValueError("eta 必须在 [0, 1] 内")
        return values

    def grid(self) -> List[ProtocolConfig]:
        return [
            ProtocolConfig.symmetric(r=r, eta=eta, gain=g)
            for r in self.r_values
            for eta in self.eta_values
            for g in self.gain_values
        ]


class SweepRow(BaseModel):
    """扫描结果的一行, 字段顺序即 CSV 表头顺序"""
    r: float
    eta_alice: float
    eta_bob: float
    gain: float
    n_x_out: float
    n_y_out: float
    fidelity: float = Field(..., gt=0, le=1)
    n_eve_total: float
    n_bob_total: float
    eve_wins: bool
    regime: Regime


SWEEP_COLUMNS: Tuple[str, ...] = tuple(SweepRow.model_fields)
