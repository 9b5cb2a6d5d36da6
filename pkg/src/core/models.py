from dataclasses import dataclass, asdict
from typing import Dict, Any, Optional
from .enums import StageStatus

@dataclass
class StageResult:
    """阶段执行结果"""
    stage: str
    success: bool
    status: StageStatus
    data: Optional[Dict[str, Any]] = None
    error: Optional[str] = None
    start_time: Optional[float] = None
    end_time: Optional[float] = None

    @property
    def elapsed(self) -> Optional[float]:
        """执行耗时(秒)"""
        if self.start_time is None or self.end_time is None:
            return None
        return self.end_time - self.start_time

    def to_json(self) -> Dict[str, Any]:
        """转换为可序列化的字典，data 只保留字段名"""
        result_dict = asdict(self)
        result_dict['status'] = self.status.value
        result_dict['data'] = sorted(self.data) if self.data else None
        return result_dict


class PipelineError(Exception):
    """流水线在某个阶段失败"""

    def __init__(self, stage: str, message: str):
        self.stage = stage
        self.message = message
        super().__init__(f"{stage}: {message}")
