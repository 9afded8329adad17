"""
配置管理模块
支持从环境变量 / .env 读取模拟与校验的默认参数
"""
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """应用配置"""

    model_config = SettingsConfigDict(env_file=".env", env_prefix="CVT_", extra="ignore")

    # Monte Carlo 配置
    MC_SAMPLES: int = 100_000
    SEED: int = 20240601
    SAMPLE_CHUNK: int = 131_072  # 每批采样行数

    # 校验容差
    TOLERANCE: float = 1e-12  # 闭式解比较
    MC_SIGMAS: float = 4.0  # Monte Carlo 允许的标准误倍数
    CROSSOVER_TOL: float = 1e-7

    # 扫描并发
    SWEEP_CONCURRENCY: int = 4

    # 默认输入相干态 (x_a, y_a)
    DEFAULT_ALPHA_X: float = 1.0
    DEFAULT_ALPHA_Y: float = 1.0

    LOG_LEVEL: str = "INFO"

    @property
    def default_alpha(self) -> tuple[float, float]:
        """默认输入相干态"""
        return (self.DEFAULT_ALPHA_X, self.DEFAULT_ALPHA_Y)


settings = Settings()
