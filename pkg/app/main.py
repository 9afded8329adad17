"""
FastAPI 应用入口
提供连续变量量子传送分析 HTTP API
"""
import logging
from contextlib import asynccontextmanager

from fastapi import FastAPI
from fastapi.middleware.cors import CORSMiddleware

from app.analysis_routes import router as analysis_router
from app.config import settings


# 配置日志
logging.basicConfig(
    level=settings.LOG_LEVEL.upper(),
    format='%(asctime)s - %(name)s - %(levelname)s - %(message)s'
)
logger = logging.getLogger(__name__)


@asynccontextmanager
async def lifespan(app: FastAPI):
    """应用生命周期管理"""
    logger.info(
        f"应用启动: MC 采样 {settings.MC_SAMPLES}, seed {settings.SEED}, "
        f"扫描并发 {settings.SWEEP_CONCURRENCY}"
    )
    yield
    logger.info("应用已关闭")


# 创建 FastAPI 应用
app = FastAPI(
    root_path="/api/cv-teleport-service",
    title="CV Teleport Service",
    description="相干态连续变量量子传送的保真度、等效输入噪声与安全阈值分析",
    version="1.0.0",
    lifespan=lifespan
)

app.add_middleware(
    CORSMiddleware,
    allow_origins=["*"],
    allow_credentials=True,
    allow_methods=["*"],
    allow_headers=["*"],
)

# 注册路由
app.include_router(analysis_router)


if __name__ == "__main__":
    import uvicorn
    uvicorn.run(app, host="0.0.0.0", port=8000)
