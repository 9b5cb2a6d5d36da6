"""工具函数模块"""

from typing import Any, Dict
from datetime import datetime
from enum import Enum

import numpy as np

def ensure_serializable(obj: Any) -> Any:
    """确保对象是可JSON/YAML序列化的

    Args:
        obj: 任意Python对象，包括 numpy 数组和标量

    Returns:
        转换后的可序列化对象
    """
    if obj is None:
        return None
    elif isinstance(obj, (str, bool)):
        return obj
    elif isinstance(obj, (int, float)):
        return obj
    elif isinstance(obj, np.generic):
        return obj.item()
    elif isinstance(obj, np.ndarray):
        return ensure_serializable(obj.tolist())
    elif isinstance(obj, Enum):
        return obj.value
    elif isinstance(obj, (list, tuple)):
        return [ensure_serializable(item) for item in obj]
    elif isinstance(obj, dict):
        return {str(k): ensure_serializable(v) for k, v in obj.items()}
    elif isinstance(obj, datetime):
        return obj.isoformat()
    elif hasattr(obj, "to_dict"):
        return ensure_serializable(obj.to_dict())
    return str(obj)

def convert_stage_result(stage_id: str, result: Any) -> Dict:
    """转换阶段结果为可序列化的摘要字典

    Args:
        stage_id: 阶段ID
        result: 阶段执行结果

    Returns:
        Dict: 可序列化的结果字典
    """
    return {
        "stage": stage_id,
        "success": result.success,
        "status": result.status.value,
        "elapsed": result.elapsed,
        "fields": sorted(result.data) if result.success and result.data else None,
        "error": str(result.error) if result.error else None
    }
