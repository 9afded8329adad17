"""
相干态保真度
闭式解 (高斯积分结果) 与直接对定义积分做 Monte Carlo 两条独立路径
"""
import logging
import math
import sys
from typing import Union

import numpy as np

from app.exceptions import DomainError
from app.models import FidelityEstimate, GaussianGuess

logger = logging.getLogger(__name__)

MIN_MC_SAMPLES = 1_000

# 远离 α 时 exp 会下溢为 0, 保真度下限取最小正规浮点数
MIN_FIDELITY = sys.float_info.min

ArrayLike = Union[float, np.ndarray]


def overlap(x: ArrayLike, y: ArrayLike, x_a: float, y_a: float) -> ArrayLike:
    """|⟨β|α⟩|² = exp(−(x−x_a)²/4 − (y−y_a)²/4), 支持 numpy 数组"""
    return np.exp(-((x - x_a) ** 2) / 4.0 - ((y - y_a) ** 2) / 4.0)


def fidelity_closed_form(guess: GaussianGuess, x_a: float, y_a: float) -> float:
    """
    对高斯分布 P(x, y) 积分得到的保真度
    F = 2/√((2+N_X)(2+N_Y)) · exp(−Δx²/(2(2+N_X)) − Δy²/(2(2+N_Y)))
    """
    sx = 2.0 + guess.n_x
    sy = 2.0 + guess.n_y
    dx = x_a - guess.mean_x
    dy = y_a - guess.mean_y
    value = 2.0 / math.sqrt(sx * sy) * math.exp(-dx * dx / (2.0 * sx) - dy * dy / (2.0 * sy))
    return max(value, MIN_FIDELITY)


def fidelity_unity_gain(n_x: float, n_y: float) -> float:
    """单位增益下的量子保真度, 只依赖等效输入噪声"""
    if n_x < 0 or n_y < 0:
        raise DomainError(f"等效输入噪声必须非负: ({n_x}, {n_y})")
    return 2.0 / math.sqrt((2.0 + n_x) * (2.0 + n_y))


def classical_fidelity(n_x_m: float, n_y_m: float) -> float:
    """
    直接由测量结果猜测输入态时的保真度
    公式与 fidelity_unity_gain 相同, 但参数是测量噪声 (含输入模噪声)
    """
    if n_x_m < 0 or n_y_m < 0:
        raise DomainError(f"测量噪声必须非负: ({n_x_m}, {n_y_m})")
    return 2.0 / math.sqrt((2.0 + n_x_m) * (2.0 + n_y_m))


def state_fidelity(mean_x: float, mean_y: float, var_x: float, var_y: float, x_a: float, y_a: float) -> float:
    """
    高斯输出态 (总方差 var_x, var_y) 与 |α⟩ 的重叠, 任意增益均适用
    等价于 fidelity_closed_form 取 N = var − 1
    """
    sx = 1.0 + var_x
    sy = 1.0 + var_y
    dx = x_a - mean_x
    dy = y_a - mean_y
    value = 2.0 / math.sqrt(sx * sy) * math.exp(-dx * dx / (2.0 * sx) - dy * dy / (2.0 * sy))
    return min(max(value, MIN_FIDELITY), 1.0)


def fidelity_monte_carlo(
    guess: GaussianGuess,
    x_a: float,
    y_a: float,
    n: int,
    seed: int,
) -> FidelityEstimate:
    """
    从 guess 的高斯分布抽取 (x, y), 对 overlap 取平均
    N = 0 时该方向退化为确定的均值
    """
    if n < MIN_MC_SAMPLES:
        raise DomainError(f"Monte Carlo 采样数至少 {MIN_MC_SAMPLES}: {n}")

    rng = np.random.default_rng(seed)
    xs = rng.normal(guess.mean_x, math.sqrt(guess.n_x), n)
    ys = rng.normal(guess.mean_y, math.sqrt(guess.n_y), n)
    values = overlap(xs, ys, x_a, y_a)

    estimate = FidelityEstimate(
        closed_form=fidelity_closed_form(guess, x_a, y_a),
        monte_carlo=float(values.mean()),
        std_error=float(values.std(ddof=1) / math.sqrt(n)),
        n_samples=n,
    )
    logger.debug(
        f"MC 保真度: 闭式 {estimate.closed_form:.6g}, "
        f"MC {estimate.monte_carlo:.6g} ± {estimate.std_error:.2g}"
    )
    return estimate


def noise_for_fidelity(f: float) -> float:
    """对称情形下给出保真度 f 的等效输入噪声 N = 2(1−f)/f"""
    if not 0.0 < f <= 1.0:
        raise DomainError(f"保真度必须在 (0, 1] 内: {f}")
    return 2.0 * (1.0 - f) / f
