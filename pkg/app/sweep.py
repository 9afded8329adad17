"""
参数扫描
网格点并发计算, 结果按 r → eta → gain 的网格顺序输出
"""
import asyncio
import logging
from typing import List, Optional, Tuple

from app.config import settings
from app.fidelity import fidelity_monte_carlo
from app.gaussian_core import SimulationContext, make_coherent
from app.models import GaussianGuess, ProtocolConfig, SweepRow, SweepSpec
from app.protocols import epr_teleport, output_fidelity
from app.security import classify_regime, compare_eve_bob

logger = logging.getLogger(__name__)


def evaluate_point(
    config: ProtocolConfig,
    alpha: Tuple[float, float],
    mc_samples: int = 0,
    seed: int = 0,
) -> SweepRow:
    """计算单个网格点; mc_samples > 0 时用 Monte Carlo 复核该点的保真度"""
    x_a, y_a = alpha
    ctx = SimulationContext("sweep")
    bob = epr_teleport(config, make_coherent(ctx, x_a, y_a))
    fidelity = output_fidelity(bob, x_a, y_a)
    security = compare_eve_bob(config, alpha)

    if mc_samples > 0:
        _mc_check(bob.mean_x_out, bob.mean_y_out, bob.var_x_out, bob.var_y_out, alpha, mc_samples, seed)

    return SweepRow(
        r=config.r,
        eta_alice=config.eta_alice,
        eta_bob=config.eta_bob,
        gain=config.gain,
        n_x_out=bob.n_x_out,
        n_y_out=bob.n_y_out,
        fidelity=fidelity,
        n_eve_total=security.n_eve_total,
        n_bob_total=security.n_bob_total,
        eve_wins=security.eve_wins,
        regime=classify_regime(fidelity),
    )


def _mc_check(
    mean_x: float,
    mean_y: float,
    var_x: float,
    var_y: float,
    alpha: Tuple[float, float],
    n: int,
    seed: int,
) -> None:
    # 输出方差小于真空时 P 表示不是正的高斯分布, 无法采样
    if var_x < 1.0 or var_y < 1.0:
        return
    guess = GaussianGuess(mean_x=mean_x, mean_y=mean_y, n_x=var_x - 1.0, n_y=var_y - 1.0)
    estimate = fidelity_monte_carlo(guess, alpha[0], alpha[1], max(n, 1_000), seed)
    if not estimate.agrees(settings.MC_SIGMAS):
        logger.warning(
            f"保真度 MC 复核偏差过大: 闭式 {estimate.closed_form:.12g}, "
            f"MC {estimate.monte_carlo:.12g} ± {estimate.std_error:.3g}"
        )


async def run_sweep(spec: SweepSpec, concurrency: Optional[int] = None) -> List[SweepRow]:
    """并发计算所有网格点, gather 保证结果顺序与网格一致"""
    concurrency = concurrency or settings.SWEEP_CONCURRENCY
    sem = asyncio.Semaphore(concurrency)
    grid = spec.grid()
    logger.info(f"开始扫描: {len(grid)} 个网格点, 并发 {concurrency}")

    async def _run_one(index: int, config: ProtocolConfig) -> SweepRow:
        async with sem:
            return await asyncio.to_thread(
                evaluate_point,
                config,
                spec.input_alpha,
                spec.mc_samples,
                spec.seed + index,
            )

    rows = await asyncio.gather(*(_run_one(i, c) for i, c in enumerate(grid)))
    logger.info(f"扫描完成: {len(rows)} 行")
    return list(rows)


def sweep(spec: SweepSpec, concurrency: Optional[int] = None) -> List[SweepRow]:
    """同步入口 (CLI 使用)"""
    return asyncio.run(run_sweep(spec, concurrency))
