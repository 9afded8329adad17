"""
两种传送方案
- 经典方案: 50:50 分束后做两路正交零差测量, 再对新真空做平移重建
- EPR 方案: 有限压缩、两臂损耗、可调增益, 损耗抽头保留给 security 模块
"""
import logging
import math
from dataclasses import dataclass
from typing import Tuple

from scipy import optimize

from app.exceptions import CrossoverNotFoundError, DomainError
from app.fidelity import fidelity_unity_gain, state_fidelity
from app.gaussian_core import (
    Axis,
    Mode,
    QuadratureForm,
    SimulationContext,
    beamsplitter,
    covariance,
    feedforward,
    loss,
    make_coherent,
    make_squeezed,
    make_vacuum,
    mean,
    phase_flip,
    variance,
)
from app.models import MeasurementReport, ProtocolConfig, TeleportReport

logger = logging.getLogger(__name__)

SQRT2 = math.sqrt(2.0)

# 协方差相对该阈值可忽略时, 视为量子模与测量噪声无关
UNCORRELATED_RTOL = 1e-12


def _joint_measurement(input: Mode, aux: Mode) -> Tuple[QuadratureForm, QuadratureForm]:
    """
    输入与辅助模在 50:50 分束器上混合, 一个端口读 X, 另一个读 Y
    放大 √2 使输入到测量值的确定性增益为 1:
    X_m = X_in + X_aux, Y_m = Y_in − Y_aux
    """
    plus, minus = beamsplitter(input, aux, 0.5)
    return SQRT2 * plus.x, SQRT2 * minus.y


def equivalent_input_noise(
    out_x: QuadratureForm,
    out_y: QuadratureForm,
    input: Mode,
    gain: float,
) -> Tuple[float, float]:
    """输入参考的等效输入噪声 var(out − g·in)/g², 符号相减使输入相关项精确抵消"""
    if gain == 0:
        raise DomainError("增益为 0 时等效输入噪声无定义")
    g2 = gain * gain
    return (
        variance(out_x - gain * input.x) / g2,
        variance(out_y - gain * input.y) / g2,
    )


def _report(out: Mode, input: Mode, gain: float, label: str) -> TeleportReport:
    n_x, n_y = equivalent_input_noise(out.x, out.y, input, gain)
    return TeleportReport(
        n_x_out=n_x,
        n_y_out=n_y,
        gain=gain,
        mean_x_out=mean(out.x),
        mean_y_out=mean(out.y),
        var_x_out=variance(out.x),
        var_y_out=variance(out.y),
        fidelity_at_unity_gain=fidelity_unity_gain(n_x, n_y) if gain == 1.0 else None,
        label=label,
    )


# =========================
# 经典方案
# =========================
def classical_measurement(input: Mode) -> Tuple[MeasurementReport, QuadratureForm, QuadratureForm]:
    """
    测量后直接猜测输入态
    N^m 既包含分束引入的真空噪声, 也包含输入模本身的噪声
    """
    x_m, y_m = _joint_measurement(input, make_vacuum(input.ctx))
    report = MeasurementReport(
        n_x_m=variance(x_m),
        n_y_m=variance(y_m),
        measured_mean_x=mean(x_m),
        measured_mean_y=mean(y_m),
    )
    return report, x_m, y_m


def classical_teleport(input: Mode, gain: float = 1.0) -> TeleportReport:
    """
    测量后对新真空 v2 做平移重建:
    X_out = X_in + X_v1 + X_v2, Y_out = Y_in − Y_v1 + Y_v2
    """
    _, x_m, y_m = classical_measurement(input)
    out = feedforward(make_vacuum(input.ctx), x_m, y_m, gain)
    report = _report(out, input, gain, label="classical")
    logger.info(f"经典传送: N_X={report.n_x_out:.6g}, N_Y={report.n_y_out:.6g}")
    return report


# =========================
# EPR 方案
# =========================
def epr_source(ctx: SimulationContext, r: float) -> Tuple[Mode, Mode]:
    """
    Y 压缩模与 X 压缩模在 50:50 分束器上混合
    var(X1 − X2) = var(Y1 + Y2) = 2e^{−2r}
    """
    return beamsplitter(make_squeezed(ctx, r, Axis.Y), make_squeezed(ctx, r, Axis.X), 0.5)


@dataclass(frozen=True)
class EPRCircuit:
    """一次 EPR 传送的全部符号量"""
    config: ProtocolConfig
    input: Mode
    x_m: QuadratureForm
    y_m: QuadratureForm
    bob_mode: Mode
    eve_mode: Mode
    alice_tap: Mode


def build_epr_circuit(config: ProtocolConfig, input: Mode, swap_bob_ports: bool = False) -> EPRCircuit:
    """
    损耗放在 EPR 源与 Alice 测量 / Bob 平移之间
    Bob 与 Eve 的光束都做 π 相移, 使 r→∞、η=1 时噪声完全抵消
    swap_bob_ports 把透射端口交给 Eve, 抽头端口交给 Bob
    """
    ctx = input.ctx
    beam1, beam2 = epr_source(ctx, config.r)
    alice_beam, alice_tap = loss(beam1, config.eta_alice, ctx)
    transmitted, tapped = loss(beam2, config.eta_bob, ctx)
    if swap_bob_ports:
        transmitted, tapped = tapped, transmitted

    x_m, y_m = _joint_measurement(input, alice_beam)
    return EPRCircuit(
        config=config,
        input=input,
        x_m=x_m,
        y_m=y_m,
        bob_mode=phase_flip(transmitted),
        eve_mode=phase_flip(tapped),
        alice_tap=alice_tap,
    )


def epr_teleport(config: ProtocolConfig, input: Mode) -> TeleportReport:
    """Bob 按 config.gain 把 Alice 的测量结果前馈到自己的 EPR 光束上"""
    if config.gain == 0:
        raise DomainError("EPR 传送的增益不能为 0")
    circuit = build_epr_circuit(config, input)
    out = feedforward(circuit.bob_mode, circuit.x_m, circuit.y_m, config.gain)
    report = _report(out, input, config.gain, label="bob")
    logger.info(
        f"EPR 传送 r={config.r:g}, η=({config.eta_alice:g}, {config.eta_bob:g}), "
        f"g={config.gain:g}: N_X={report.n_x_out:.6g}, N_Y={report.n_y_out:.6g}"
    )
    return report


def _optimal_quadrature(
    b: QuadratureForm,
    measured: QuadratureForm,
    input_q: QuadratureForm,
) -> Tuple[float, float, float, float]:
    """
    单个正交分量上的最优前馈: 最小化 var(B + g·D)/g², D = 测量值 − 输入
    令 u = 1/g, 最优 u = −Cov(B, D)/Var(B), 最小值即 D 在 B 条件下的残差方差
    返回 (gain, noise, mean_out, var_out)
    """
    d = measured - input_q
    v_b = variance(b)
    c = covariance(b, d)
    if v_b == 0.0 or abs(c) <= UNCORRELATED_RTOL * math.sqrt(v_b * variance(d)):
        return math.inf, variance(d), mean(measured), variance(measured)

    u = -c / v_b
    gain = 1.0 / u
    out = b + gain * measured
    return gain, variance(d + u * b), mean(out), variance(out)


def optimal_copy(quantum_mode: Mode, x_m: QuadratureForm, y_m: QuadratureForm, input: Mode, label: str) -> TeleportReport:
    """
    用经典信道上的测量结果和手中的量子模, 以各自最优的确定性增益构造拷贝
    量子模与测量无关时退化为只用经典信道的拷贝 (gain = inf)
    """
    gain_x, n_x, mean_x, var_x = _optimal_quadrature(quantum_mode.x, x_m, input.x)
    gain_y, n_y, mean_y, var_y = _optimal_quadrature(quantum_mode.y, y_m, input.y)
    if not math.isclose(gain_x, gain_y, rel_tol=1e-9):
        logger.warning(f"{label} 的 X/Y 最优增益不一致: {gain_x:.6g} / {gain_y:.6g}")

    return TeleportReport(
        n_x_out=n_x,
        n_y_out=n_y,
        gain=gain_x,
        mean_x_out=mean_x,
        mean_y_out=mean_y,
        var_x_out=var_x,
        var_y_out=var_y,
        fidelity_at_unity_gain=fidelity_unity_gain(n_x, n_y) if gain_x == 1.0 else None,
        label=label,
    )


def output_fidelity(report: TeleportReport, x_a: float, y_a: float) -> float:
    """输出态统计量与已知输入 |α⟩ 的保真度 (任意增益)"""
    return state_fidelity(
        report.mean_x_out,
        report.mean_y_out,
        report.var_x_out,
        report.var_y_out,
        x_a,
        y_a,
    )


def find_squeezing_for_fidelity(target_f: float, tol: float = 1e-12, r_max: float = 20.0) -> float:
    """无损、单位增益 EPR 传送达到 target_f 所需的压缩参数 r"""
    if not 0.5 < target_f < 1.0:
        raise DomainError(f"目标保真度必须在 (1/2, 1) 内: {target_f}")

    def gap(r: float) -> float:
        ctx = SimulationContext("squeezing-search")
        report = epr_teleport(ProtocolConfig(r=r), make_coherent(ctx, 0.0, 0.0))
        return report.fidelity_at_unity_gain - target_f

    try:
        return optimize.bisect(gap, 0.0, r_max, xtol=tol)
    except ValueError as e:
        raise CrossoverNotFoundError(f"[0, {r_max}] 内找不到 F = {target_f}: {e}") from e
