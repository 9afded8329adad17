"""
传送分析相关路由
与命令行子命令一一对应
"""
import logging
from typing import List, Tuple

from fastapi import APIRouter, HTTPException
from pydantic import BaseModel, Field, ValidationError

from app.config import settings
from app.exceptions import DomainError
from app.fidelity import fidelity_monte_carlo
from app.gaussian_core import SimulationContext, make_coherent
from app.models import FidelityEstimate, GaussianGuess, ProtocolConfig, Scheme, SweepRow, SweepSpec
from app.protocols import classical_teleport, epr_teleport, output_fidelity
from app.rendering import teleport_document
from app.security import classify_regime, compare_eve_bob, epr_conditional_variance, find_conditional_crossover, find_eve_crossover
from app.sweep import run_sweep

logger = logging.getLogger(__name__)

router = APIRouter(tags=["传送分析"])


class TeleportRequest(BaseModel):
    """单次传送请求模型"""
    scheme: Scheme = Field(default=Scheme.EPR, description="传送方案")
    r: float = Field(default=0.0, ge=0, description="压缩参数")
    eta_alice: float = Field(default=1.0, ge=0, le=1)
    eta_bob: float = Field(default=1.0, ge=0, le=1)
    gain: float = Field(default=1.0, gt=0, description="前馈增益")
    alpha: Tuple[float, float] = Field(default_factory=lambda: settings.default_alpha, description="输入相干态 (x_a, y_a)")

    def config(self) -> ProtocolConfig:
        return ProtocolConfig(r=self.r, eta_alice=self.eta_alice, eta_bob=self.eta_bob, gain=self.gain)


class SecurityRequest(TeleportRequest):
    """安全分析请求模型"""
    crossover: bool = Field(default=True, description="是否计算 Eve 交叉点")
    conditional: bool = Field(default=True, description="是否计算条件压缩")
    tolerance: float = Field(default_factory=lambda: settings.CROSSOVER_TOL, gt=0)


class FidelityRequest(BaseModel):
    """Monte Carlo 保真度请求模型"""
    guess: GaussianGuess
    alpha: Tuple[float, float] = Field(default_factory=lambda: settings.default_alpha)
    n: int = Field(default_factory=lambda: settings.MC_SAMPLES, ge=1_000)
    seed: int = Field(default_factory=lambda: settings.SEED)


@router.get("/")
async def root():
    """健康检查"""
    return {"status": "ok", "service": "CV Teleport Service"}


# 纯计算的接口用同步 def, FastAPI 放到线程池执行, 不阻塞事件循环
@router.post("/teleport")
def teleport(request: TeleportRequest):
    """单次传送, 返回等效输入噪声、保真度与区间"""
    try:
        input = make_coherent(SimulationContext("http"), *request.alpha)
        if request.scheme is Scheme.CLASSICAL:
            report = classical_teleport(input, request.gain)
            config = None
        else:
            config = request.config()
            report = epr_teleport(config, input)

        fidelity = output_fidelity(report, *request.alpha)
        return teleport_document(request.scheme.value, config, request.alpha, report, fidelity, classify_regime(fidelity))

    except (DomainError, ValidationError) as e:
        raise HTTPException(status_code=400, detail=str(e))
    except Exception as e:
        logger.error(f"传送计算失败: {e}", exc_info=True)
        raise HTTPException(status_code=500, detail=f"传送计算失败: {str(e)}")


@router.post("/security")
def security(request: SecurityRequest):
    """Eve/Bob 对比、交叉点与条件压缩"""
    try:
        config = request.config()
        comparison = compare_eve_bob(config, request.alpha)
        bob = epr_teleport(config, make_coherent(SimulationContext("http"), *request.alpha))
        fidelity = output_fidelity(bob, *request.alpha)

        doc = {**config.model_dump(), **comparison.model_dump()}
        doc.update(bob_fidelity=fidelity, regime=classify_regime(fidelity))

        if request.crossover:
            try:
                doc["eta_crossover"] = find_eve_crossover(config.r, request.tolerance, eta_alice=config.eta_alice)
            except DomainError as e:
                logger.warning(f"交叉点不可用: {e}")
                doc["eta_crossover"] = None
        if request.conditional:
            doc["conditional_variance"] = epr_conditional_variance(config.r, config.eta_alice, config.eta_bob)
            try:
                doc["conditional_crossover"] = find_conditional_crossover(config.r, request.tolerance)
            except DomainError as e:
                logger.warning(f"条件压缩阈值不可用: {e}")
                doc["conditional_crossover"] = None
        return doc

    except (DomainError, ValidationError) as e:
        raise HTTPException(status_code=400, detail=str(e))
    except Exception as e:
        logger.error(f"安全分析失败: {e}", exc_info=True)
        raise HTTPException(status_code=500, detail=f"安全分析失败: {str(e)}")


@router.post("/sweep", response_model=List[SweepRow])
async def sweep(spec: SweepSpec):
    """参数网格扫描"""
    try:
        return await run_sweep(spec)
    except (DomainError, ValidationError) as e:
        raise HTTPException(status_code=400, detail=str(e))
    except Exception as e:
        logger.error(f"扫描失败: {e}", exc_info=True)
        raise HTTPException(status_code=500, detail=f"扫描失败: {str(e)}")


@router.post("/fidelity", response_model=FidelityEstimate)
def fidelity(request: FidelityRequest):
    """闭式保真度与 Monte Carlo 估计"""
    try:
        return fidelity_monte_carlo(request.guess, request.alpha[0], request.alpha[1], request.n, request.seed)
    except DomainError as e:
        raise HTTPException(status_code=400, detail=str(e))
    except Exception as e:
        logger.error(f"保真度计算失败: {e}", exc_info=True)
        raise HTTPException(status_code=500, detail=f"保真度计算失败: {str(e)}")
