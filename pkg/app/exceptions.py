"""
领域异常
"""


class DomainError(ValueError):
    """参数超出定义域 (t, η, f 越界、混用上下文、零增益等)"""


class CrossoverNotFoundError(DomainError):
    """二分区间两端没有变号, 通常意味着模型回归"""
