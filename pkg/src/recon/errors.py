"""重构流程的异常定义"""

from typing import Optional


class ReconstructionError(ValueError):
    """重构库所有异常的基类"""


class DomainError(ReconstructionError):
    """查询点超出定义域，或定义域退化"""


class InvalidSignalError(ReconstructionError):
    """采样数据不合法（时间不严格递增、长度不符或含非有限值）"""


class DimensionError(ReconstructionError):
    """状态向量或多重指标的维数不匹配"""


class RankDeficiencyError(ReconstructionError):
    """Gram矩阵列不满秩"""

    def __init__(self, rank: int, columns: int):
        self.rank = rank
        self.columns = columns
        super().__init__(f"Gram矩阵列秩不足: 数值秩 {rank} < 列数 {columns}")


class IntegrationError(ReconstructionError):
    """积分步长下溢，模型不可积"""

    def __init__(self, t: float, h: float, message: Optional[str] = None):
        self.t = t
        self.h = h
        super().__init__(message or f"model not integrable: 步长在 t={t:.6g} 处下溢 (h={h:.3g})")


class DatasetError(ReconstructionError):
    """数据文件格式错误"""


class ConvergenceError(ReconstructionError):
    """Gauss-Newton迭代失败"""
