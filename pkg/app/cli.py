"""
命令行入口
teleport | sweep | verify | security
退出码: 0 成功, 1 校验失败, 2 参数错误, 3 输出路径不可写
"""
import logging
import math
import sys
from pathlib import Path
from typing import List, Optional, Tuple

import click
from pydantic import ValidationError

from app.config import settings
from app.exceptions import CrossoverNotFoundError, DomainError
from app.gaussian_core import SimulationContext, make_coherent
from app.models import ProtocolConfig, Scheme, SweepSpec
from app.protocols import classical_teleport, epr_teleport, output_fidelity
from app.rendering import FORMATS, fmt, render_document, render_sweep, teleport_document
from app.security import classify_regime, compare_eve_bob, epr_conditional_variance, find_conditional_crossover, find_eve_crossover
from app.sweep import sweep
from app.verification import Verifier

logger = logging.getLogger(__name__)

EXIT_CHECK_FAILED = 1
EXIT_UNWRITABLE = 3


# =========================
# 参数解析
# =========================
def _parse_alpha(ctx, param, value: Optional[str]) -> Tuple[float, float]:
    if value is None:
        return settings.default_alpha
    try:
        x, y = (float(part) for part in value.split(","))
    except ValueError:
        raise click.BadParameter(f"需要 'x,y' 形式: {value!r}")
    if not (math.isfinite(x) and math.isfinite(y)):
        raise click.BadParameter(f"α 必须是有限值: {value!r}")
    return x, y


def _parse_floats(ctx, param, value: Optional[str]) -> Optional[List[float]]:
    if value is None:
        return None
    try:
        values = [float(part) for part in value.split(",") if part.strip()]
    except ValueError:
        raise click.BadParameter(f"需要逗号分隔的数值列表: {value!r}")
    if not all(math.isfinite(v) for v in values):
        raise click.BadParameter(f"数值必须有限: {value!r}")
    return values


def _require_finite(ctx, param, value: Optional[float]) -> Optional[float]:
    if value is not None and not math.isfinite(value):
        raise click.BadParameter(f"必须是有限值: {value}")
    return value


def _config(r: float, eta: float, eta_alice: Optional[float], eta_bob: Optional[float], gain: float) -> ProtocolConfig:
    """--eta 同时设置两臂, --eta-alice / --eta-bob 覆盖"""
    try:
        return ProtocolConfig(
            r=r,
            eta_alice=eta if eta_alice is None else eta_alice,
            eta_bob=eta if eta_bob is None else eta_bob,
            gain=gain,
        )
    except ValidationError as e:
        raise click.UsageError(f"参数无效: {e}")


def _emit(text: str, out: Optional[Path], output_format: str, rendered: Optional[str] = None) -> None:
    """
    无 --out 时按 --format 输出到标准输出
    有 --out 时写文件, 标准输出仍给出可读报告
    """
    if out is None:
        click.echo(rendered if rendered is not None else text, nl=False)
        return
    try:
        out.write_text(rendered if rendered is not None else text, encoding="utf-8")
    except OSError as e:
        click.echo(f"无法写入输出文件 {out}: {e}", err=True)
        sys.exit(EXIT_UNWRITABLE)
    click.echo(text, nl=False)


protocol_options = [
    click.option("--r", "r", type=click.FloatRange(min=0.0), callback=_require_finite, default=0.0, show_default=True, help="压缩参数"),
    click.option("--eta", type=click.FloatRange(0.0, 1.0), callback=_require_finite, default=1.0, show_default=True, help="两臂透射效率"),
    click.option("--eta-alice", type=click.FloatRange(0.0, 1.0), callback=_require_finite, default=None, help="Alice 一臂效率"),
    click.option("--eta-bob", type=click.FloatRange(0.0, 1.0), callback=_require_finite, default=None, help="Bob 一臂效率"),
    click.option("--gain", type=click.FloatRange(min=0.0, min_open=True), callback=_require_finite, default=1.0, show_default=True, help="前馈增益 g_T"),
    click.option("--alpha", callback=_parse_alpha, default=None, help="输入相干态 x_a,y_a"),
    click.option("--out", type=click.Path(path_type=Path), default=None, help="输出文件"),
    click.option("--format", "output_format", type=click.Choice(FORMATS), default="text", show_default=True),
]


def with_protocol_options(func):
    for option in reversed(protocol_options):
        func = option(func)
    return func


@click.group()
@click.option("--log-level", default=None, help="日志级别 (默认取配置)")
def cli(log_level: Optional[str]):
    """连续变量相干态量子传送的模拟与分析"""
    # 日志走 stderr, 标准输出保持可逐字节复现
    logging.basicConfig(
        level=(log_level or settings.LOG_LEVEL).upper(),
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
        stream=sys.stderr,
        force=True,
    )


@cli.command("teleport")
@click.option("--scheme", type=click.Choice([s.value for s in Scheme]), default=Scheme.EPR.value, show_default=True)
@with_protocol_options
def cmd_teleport(scheme, r, eta, eta_alice, eta_bob, gain, alpha, out, output_format):
    """单次传送, 输出等效输入噪声、保真度与区间"""
    config = _config(r, eta, eta_alice, eta_bob, gain)
    ctx = SimulationContext("cli")
    try:
        input = make_coherent(ctx, *alpha)
        if Scheme(scheme) is Scheme.CLASSICAL:
            report = classical_teleport(input, gain)
            config = None
        else:
            report = epr_teleport(config, input)

        fidelity = output_fidelity(report, *alpha)
        doc = teleport_document(scheme, config, alpha, report, fidelity, classify_regime(fidelity))
    except DomainError as e:
        raise click.UsageError(f"参数超出定义域: {e}")
    _emit(render_document(doc, "text"), out, output_format, render_document(doc, output_format))


@cli.command("sweep")
@click.option("--r", "r_values", callback=_parse_floats, default="0,0.25,0.5,1,2", show_default=True, help="r 列表")
@click.option("--eta", "eta_values", callback=_parse_floats, default="1", show_default=True, help="对称 eta 列表")
@click.option("--gain", "gain_values", callback=_parse_floats, default="1", show_default=True, help="gain 列表")
@click.option("--alpha", callback=_parse_alpha, default=None, help="输入相干态 x_a,y_a")
@click.option("--mc-samples", type=click.IntRange(min=0), default=0, show_default=True, help="每点 MC 复核采样数, 0 为不复核")
@click.option("--seed", type=int, default=None)
@click.option("--out", type=click.Path(path_type=Path), default=None)
@click.option("--format", "output_format", type=click.Choice(FORMATS), default="csv", show_default=True)
def cmd_sweep(r_values, eta_values, gain_values, alpha, mc_samples, seed, out, output_format):
    """参数网格扫描, r 外层 / eta 中层 / gain 内层"""
    try:
        spec = SweepSpec(
            r_values=r_values,
            eta_values=eta_values,
            gain_values=gain_values,
            input_alpha=alpha,
            mc_samples=mc_samples,
            seed=settings.SEED if seed is None else seed,
        )
    except ValidationError as e:
        raise click.UsageError(f"扫描参数无效: {e}")

    try:
        rows = sweep(spec)
    except DomainError as e:
        raise click.UsageError(f"参数超出定义域: {e}")
    rendered = render_sweep(rows, output_format)
    if out is None:
        click.echo(rendered, nl=False)
        return
    try:
        out.write_text(rendered, encoding="utf-8")
    except OSError as e:
        click.echo(f"无法写入输出文件 {out}: {e}", err=True)
        sys.exit(EXIT_UNWRITABLE)
    click.echo(f"已写入 {len(rows)} 行: {out}")


@cli.command("verify")
@click.option("--mc-samples", type=click.IntRange(min=1_000), default=None, help="Monte Carlo 采样数")
@click.option("--seed", type=int, default=None)
@click.option("--tolerance", type=click.FloatRange(min=0.0), callback=_require_finite, default=None, help="闭式比较容差")
def cmd_verify(mc_samples, seed, tolerance):
    """运行验收套件, 全部通过时退出码为 0"""
    results = Verifier(mc_samples=mc_samples, seed=seed, tolerance=tolerance).run()
    for result in results:
        status = "PASS" if result.passed else "FAIL"
        line = f"{status} {result.name} worst_deviation={fmt(result.worst_deviation)}"
        if result.detail:
            line += f" ({result.detail})"
        click.echo(line)

    failed = [r.name for r in results if not r.passed]
    click.echo(f"{len(results) - len(failed)}/{len(results)} 项通过")
    if failed:
        sys.exit(EXIT_CHECK_FAILED)


@cli.command("security")
@with_protocol_options
@click.option("--crossover", is_flag=True, help="只附加 Eve 交叉点")
@click.option("--conditional", is_flag=True, help="只附加条件压缩检查")
@click.option("--tolerance", type=click.FloatRange(min=0.0, min_open=True), callback=_require_finite, default=None, help="二分容差")
def cmd_security(r, eta, eta_alice, eta_bob, gain, alpha, out, output_format, crossover, conditional, tolerance):
    """Eve/Bob 对比、交叉点、条件压缩与保真度区间"""
    config = _config(r, eta, eta_alice, eta_bob, gain)
    tol = tolerance or settings.CROSSOVER_TOL
    show_all = not (crossover or conditional)

    try:
        comparison = compare_eve_bob(config, alpha)
        ctx = SimulationContext("cli")
        bob = epr_teleport(config, make_coherent(ctx, *alpha))
        fidelity = output_fidelity(bob, *alpha)
        regime = classify_regime(fidelity)
    except DomainError as e:
        raise click.UsageError(f"参数超出定义域: {e}")

    doc = config.model_dump()
    doc.update(comparison.model_dump())
    doc.update(
        {
            "n_eve_total": comparison.n_eve_total,
            "n_bob_total": comparison.n_bob_total,
            "bob_fidelity": fidelity,
            "regime": regime,
        }
    )

    if show_all or crossover:
        try:
            doc["eta_crossover"] = find_eve_crossover(config.r, tol, eta_alice=config.eta_alice)
        except (CrossoverNotFoundError, DomainError) as e:
            logger.warning(f"交叉点不可用: {e}")
            doc["eta_crossover"] = None

    if show_all or conditional:
        cond = epr_conditional_variance(config.r, config.eta_alice, config.eta_bob)
        doc["conditional_variance"] = cond
        doc["conditional_sub_shot_noise"] = cond < 1.0
        try:
            doc["conditional_crossover"] = find_conditional_crossover(config.r, tol)
        except (CrossoverNotFoundError, DomainError) as e:
            logger.warning(f"条件压缩阈值不可用: {e}")
            doc["conditional_crossover"] = None

    _emit(render_document(doc, "text"), out, output_format, render_document(doc, output_format))


def main():
    cli()


if __name__ == "__main__":
    main()
