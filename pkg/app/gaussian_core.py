"""
线性高斯正交分量代数
每个正交分量表示为独立高斯噪声源的实仿射组合 (Heisenberg 图像),
均值 / 方差 / 协方差均由系数精确计算, 采样只用于 Monte Carlo 校验。
真空方差归一化为 1, 约定 x = 2Re(β), y = 2Im(β)。
"""
import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from app.config import settings
from app.exceptions import DomainError

logger = logging.getLogger(__name__)


class Axis(str, Enum):
    """压缩所在的正交分量"""
    X = "X"
    Y = "Y"


class SimulationContext:
    """
    噪声源注册表
    源只在构建线路时注册, 之后上下文视为只读
    """

    def __init__(self, name: str = "ctx"):
        self.name = name
        self._variances: List[float] = []

    def add_source(self, variance: float) -> int:
        """注册一个独立高斯噪声源, 返回其 id"""
        if variance < 0:
            raise DomainError(f"噪声源方差必须非负: {variance}")
        self._variances.append(float(variance))
        return len(self._variances) - 1

    def source_variance(self, source_id: int) -> float:
        return self._variances[source_id]

    @property
    def n_sources(self) -> int:
        return len(self._variances)

    @property
    def variances(self) -> np.ndarray:
        return np.asarray(self._variances, dtype=float)

    def constant(self, value: float = 0.0) -> "QuadratureForm":
        return QuadratureForm(self, value, {})

    def __repr__(self) -> str:
        return f"SimulationContext({self.name!r}, sources={self.n_sources})"


class QuadratureForm:
    """
    正交分量 = offset + Σ coeff_i · source_i
    不可变; 运算总是返回新对象
    """

    __slots__ = ("ctx", "offset", "terms")

    def __init__(self, ctx: SimulationContext, offset: float = 0.0, terms: Optional[Dict[int, float]] = None):
        self.ctx = ctx
        self.offset = float(offset)
        self.terms: Dict[int, float] = dict(terms or {})

    @classmethod
    def source(cls, ctx: SimulationContext, variance: float) -> "QuadratureForm":
        return cls(ctx, 0.0, {ctx.add_source(variance): 1.0})

    def _same_context(self, other: "QuadratureForm") -> None:
        if other.ctx is not self.ctx:
            raise DomainError(f"不能混用不同的模拟上下文: {self.ctx!r} / {other.ctx!r}")

    def scaled(self, factor: float) -> "QuadratureForm":
        return QuadratureForm(
            self.ctx,
            factor * self.offset,
            {sid: factor * c for sid, c in self.terms.items()},
        )

    def shifted(self, delta: float) -> "QuadratureForm":
        return QuadratureForm(self.ctx, self.offset + delta, self.terms)

    def __add__(self, other: "QuadratureForm") -> "QuadratureForm":
        if isinstance(other, (int, float)):
            return self.shifted(float(other))
        self._same_context(other)
        terms = dict(self.terms)
        for sid, c in other.terms.items():
            terms[sid] = terms.get(sid, 0.0) + c
        return QuadratureForm(self.ctx, self.offset + other.offset, terms)

    __radd__ = __add__

    def __neg__(self) -> "QuadratureForm":
        return self.scaled(-1.0)

    def __sub__(self, other: "QuadratureForm") -> "QuadratureForm":
        return self + (-other)

    def __mul__(self, factor: float) -> "QuadratureForm":
        return self.scaled(float(factor))

    __rmul__ = __mul__

    def __repr__(self) -> str:
        body = " + ".join(f"{c:.6g}·s{sid}" for sid, c in self.terms.items())
        return f"QuadratureForm({self.offset:.6g}{' + ' + body if body else ''})"


@dataclass(frozen=True)
class Mode:
    """一个光学模式的 (X, Y) 正交分量对"""
    x: QuadratureForm
    y: QuadratureForm

    @property
    def ctx(self) -> SimulationContext:
        return self.x.ctx


def _mix(a: float, m1: Mode, b: float, m2: Mode) -> Mode:
    return Mode(a * m1.x + b * m2.x, a * m1.y + b * m2.y)


def _check_unit_interval(name: str, value: float) -> None:
    if not 0.0 <= value <= 1.0:
        raise DomainError(f"{name} 必须在 [0, 1] 内: {value}")


# =========================
# 态的制备
# =========================
def make_vacuum(ctx: SimulationContext) -> Mode:
    """两个新的单位方差源, 均值为零"""
    return Mode(QuadratureForm.source(ctx, 1.0), QuadratureForm.source(ctx, 1.0))


def make_coherent(ctx: SimulationContext, x_a: float, y_a: float) -> Mode:
    """均值平移到 (x_a, y_a) 的真空, α = (x_a + i y_a)/2"""
    return displace(make_vacuum(ctx), x_a, y_a)


def make_squeezed(ctx: SimulationContext, r: float, squeezed_axis: Axis = Axis.X) -> Mode:
    """
    压缩真空: 被压缩分量方差 e^{-2r}, 共轭分量 e^{+2r}
    X、Y 为独立源, 不存在 XY 交叉关联
    """
    if r < 0:
        raise DomainError(f"压缩参数 r 必须非负: {r}")
    squeezed = QuadratureForm.source(ctx, math.exp(-2.0 * r))
    anti = QuadratureForm.source(ctx, math.exp(2.0 * r))
    if Axis(squeezed_axis) is Axis.X:
        return Mode(squeezed, anti)
    return Mode(anti, squeezed)


# =========================
# 线性光学变换
# =========================
def beamsplitter(m1: Mode, m2: Mode, t: float) -> Tuple[Mode, Mode]:
    """
    强度透射率 t 的分束器
    out1 = √t·m1 + √(1−t)·m2
    out2 = √(1−t)·m1 − √t·m2
    """
    _check_unit_interval("分束器透射率 t", t)
    m1.x._same_context(m2.x)
    st, sr = math.sqrt(t), math.sqrt(1.0 - t)
    return _mix(st, m1, sr, m2), _mix(sr, m1, -st, m2)


def loss(m: Mode, eta: float, ctx: Optional[SimulationContext] = None) -> Tuple[Mode, Mode]:
    """
    对新真空做分束的损耗信道, 返回 (透射模, 抽头模)
    抽头模保留下来供窃听者使用
    """
    _check_unit_interval("透射效率 η", eta)
    v = make_vacuum(ctx or m.ctx)
    return beamsplitter(m, v, eta)


def displace(m: Mode, dx: float, dy: float) -> Mode:
    """确定性平移, 只改变 offset"""
    return Mode(m.x.shifted(dx), m.y.shifted(dy))


def phase_flip(m: Mode) -> Mode:
    """π 相移: 两个正交分量同时取反"""
    return Mode(-m.x, -m.y)


def feedforward(m: Mode, measured_x: QuadratureForm, measured_y: QuadratureForm, g: float) -> Mode:
    """
    把测量结果按增益 g 前馈到模式上 (符号由调用方决定)
    运算是符号化的, m 与测量结果间的关联被精确保留
    """
    return Mode(m.x + g * measured_x, m.y + g * measured_y)


# =========================
# 二阶矩
# =========================
def mean(f: QuadratureForm) -> float:
    return f.offset


def variance(f: QuadratureForm) -> float:
    ctx = f.ctx
    return math.fsum(c * c * ctx.source_variance(sid) for sid, c in f.terms.items())


def covariance(f1: QuadratureForm, f2: QuadratureForm) -> float:
    f1._same_context(f2)
    ctx = f1.ctx
    return math.fsum(
        c * f2.terms[sid] * ctx.source_variance(sid)
        for sid, c in f1.terms.items()
        if sid in f2.terms
    )


# =========================
# Monte Carlo 采样
# =========================
def _coefficient_matrix(forms: Sequence[QuadratureForm]) -> Tuple[np.ndarray, np.ndarray]:
    ctx = forms[0].ctx
    coeffs = np.zeros((len(forms), ctx.n_sources))
    offsets = np.empty(len(forms))
    for row, f in enumerate(forms):
        forms[0]._same_context(f)
        offsets[row] = f.offset
        for sid, c in f.terms.items():
            coeffs[row, sid] = c
    return coeffs, offsets


def sample(forms: Iterable[QuadratureForm], n: int, seed: int) -> np.ndarray:
    """
    联合采样: 每次抽样每个源只取一次, 再对所有 form 求值
    返回 (n, len(forms)) 矩阵; 给定 seed 结果确定
    """
    forms = list(forms)
    if not forms:
        raise DomainError("至少需要一个 QuadratureForm")
    if n < 1:
        raise DomainError(f"采样数必须 >= 1: {n}")

    coeffs, offsets = _coefficient_matrix(forms)
    scale = np.sqrt(forms[0].ctx.variances)
    rng = np.random.default_rng(seed)

    out = np.empty((n, len(forms)))
    chunk = max(1, settings.SAMPLE_CHUNK)
    for start in range(0, n, chunk):
        rows = min(chunk, n - start)
        z = rng.standard_normal((rows, scale.size)) * scale
        out[start:start + rows] = z @ coeffs.T + offsets

    logger.debug(f"采样完成: {n} 次, {len(forms)} 个 form, {scale.size} 个源")
    return out
