"""
安全性分析
- 条件压缩: 测量一束 EPR 光, 用结果修正另一束的噪声
- Eve 的拷贝: 窃听经典信道 + 掌握 Bob 一臂的全部损耗
- 按 F = 1/2 与 F = 2/3 划分保真度区间
"""
import logging
from typing import Callable, Optional, Tuple

from scipy import optimize

from app.config import settings
from app.exceptions import CrossoverNotFoundError, DomainError
from app.gaussian_core import (
    Axis,
    Mode,
    QuadratureForm,
    SimulationContext,
    covariance,
    loss,
    make_coherent,
    variance,
)
from app.models import EveReport, ProtocolConfig, Regime, TeleportReport
from app.protocols import build_epr_circuit, epr_source, optimal_copy

logger = logging.getLogger(__name__)

# η = 0 时两束都是真空, 条件方差恒为 1, 二分下界避开这个平凡根
CONDITIONAL_ETA_FLOOR = 1e-3


def conditional_variance(meas: QuadratureForm, target: QuadratureForm) -> float:
    """
    高斯条件方差 var(target) − cov²/var(meas)
    以残差 target − k·meas 的系数求方差, 强压缩时不会出现大数相消
    """
    v = variance(meas)
    if v == 0.0:
        raise DomainError("测量量方差为 0, 条件方差无定义")
    k = covariance(meas, target) / v
    return variance(target - k * meas)


def epr_conditional_variance(r: float, eta_alice: float, eta_bob: float, axis: Axis = Axis.X) -> float:
    """两臂各自损耗后, 以光束 1 的测量修正光束 2 同一正交分量的残差方差"""
    ctx = SimulationContext("conditional")
    beam1, beam2 = epr_source(ctx, r)
    kept1, _ = loss(beam1, eta_alice, ctx)
    kept2, _ = loss(beam2, eta_bob, ctx)
    if Axis(axis) is Axis.X:
        return conditional_variance(kept1.x, kept2.x)
    return conditional_variance(kept1.y, kept2.y)


def _bisect_sign_change(gap: Callable[[float], float], lo: float, hi: float, tol: float, what: str) -> float:
    """两端严格异号才二分; 端点为 0 或两端同号都视为没有交叉"""
    g_lo, g_hi = gap(lo), gap(hi)
    if not g_lo * g_hi < 0.0:
        raise CrossoverNotFoundError(f"{what} 在 [{lo:g}, {hi:g}] 上没有变号: f(lo)={g_lo:.6g}, f(hi)={g_hi:.6g}")
    return optimize.bisect(gap, lo, hi, xtol=tol)


def find_conditional_crossover(r: float, tol: float = 1e-9) -> float:
    """对称损耗 η 下条件方差恰为 1 (散粒噪声) 的位置"""
    if r <= 0 or tol <= 0:
        raise DomainError(f"需要 r > 0 且 tol > 0: r={r}, tol={tol}")

    def gap(eta: float) -> float:
        return epr_conditional_variance(r, eta, eta) - 1.0

    eta_star = _bisect_sign_change(gap, CONDITIONAL_ETA_FLOOR, 1.0, tol, f"r={r} 时条件方差 − 1")
    logger.info(f"条件压缩阈值 r={r:g}: η*={eta_star:.12g}")
    return eta_star


def _coherent_input(ctx: SimulationContext, alpha: Optional[Tuple[float, float]]) -> Mode:
    x_a, y_a = alpha if alpha is not None else settings.default_alpha
    return make_coherent(ctx, x_a, y_a)


def eve_teleport(config: ProtocolConfig, input: Mode) -> TeleportReport:
    """
    Eve 用 Bob 一臂的损耗抽头 + 窃听到的测量结果, 以自己的最优增益构造拷贝
    eta_bob = 1 时抽头只是真空, 结果即只用经典信道的最优拷贝
    """
    circuit = build_epr_circuit(config, input)
    if config.eta_bob == 1.0:
        logger.info("Bob 一臂无损耗, Eve 只持有真空抽头")
    return optimal_copy(circuit.eve_mode, circuit.x_m, circuit.y_m, input, label="eve")


def compare_eve_bob(
    config: ProtocolConfig,
    alpha: Optional[Tuple[float, float]] = None,
    swap_bob_ports: bool = False,
) -> EveReport:
    """
    同一线路、同一相干输入上比较 Eve 与 Bob, 双方都用各自的最优增益
    Eve 的总等效噪声更小即 eve_wins
    """
    ctx = SimulationContext("eve-vs-bob")
    input = _coherent_input(ctx, alpha)
    circuit = build_epr_circuit(config, input, swap_bob_ports=swap_bob_ports)

    eve = optimal_copy(circuit.eve_mode, circuit.x_m, circuit.y_m, input, label="eve")
    bob = optimal_copy(circuit.bob_mode, circuit.x_m, circuit.y_m, input, label="bob")
    report = EveReport.from_reports(eve, bob)
    logger.debug(
        f"η_bob={config.eta_bob:g}: ΣN_eve={report.n_eve_total:.6g}, "
        f"ΣN_bob={report.n_bob_total:.6g}, eve_wins={report.eve_wins}"
    )
    return report


def find_eve_crossover(r: float, tol: float = 1e-7, eta_alice: float = 1.0) -> float:
    """对 η_bob 二分求 ΣN_eve − ΣN_bob 的根"""
    if r <= 0 or tol <= 0:
        raise DomainError(f"需要 r > 0 且 tol > 0: r={r}, tol={tol}")

    def gap(eta_bob: float) -> float:
        report = compare_eve_bob(ProtocolConfig(r=r, eta_alice=eta_alice, eta_bob=eta_bob))
        return report.n_eve_total - report.n_bob_total

    try:
        eta_star = _bisect_sign_change(gap, 0.0, 1.0, tol, f"r={r}, η_alice={eta_alice} 时 ΣN_eve − ΣN_bob")
    except CrossoverNotFoundError:
        logger.error(f"r={r} 时 Eve/Bob 噪声差没有变号")
        raise
    logger.info(f"Eve 交叉点 r={r:g}: η*={eta_star:.12g}")
    return eta_star


def classify_regime(f: float, tol: Optional[float] = None) -> Regime:
    """
    f < 1/2 → BelowClassical; f = 1/2 → ClassicalBoundary;
    1/2 < f < 2/3 → Intermediate; f ≥ 2/3 → Secure
    |f − 1/2| ≤ tol 记为 ClassicalBoundary, f ≥ 2/3 − tol 记为 Secure
    tol 默认取 settings.TOLERANCE (1e-12), 只吸收闭式计算的末位舍入;
    需要严格比较时传 tol=0
    """
    if not 0.0 <= f <= 1.0:
        raise DomainError(f"保真度必须在 [0, 1] 内: {f}")
    tol = settings.TOLERANCE if tol is None else tol

    if abs(f - 0.5) <= tol:
        return Regime.CLASSICAL_BOUNDARY
    if f < 0.5:
        return Regime.BELOW_CLASSICAL
    if f < 2.0 / 3.0 - tol:
        return Regime.INTERMEDIATE
    return Regime.SECURE
