"""阶段基类定义"""

from abc import ABC, abstractmethod
from typing import Dict, Any

class BaseNode(ABC):
    """流水线阶段基类"""

    @abstractmethod
    def execute(self, params: Dict[str, Any]) -> Dict[str, Any]:
        """执行阶段

        Args:
            params: 已解析引用的阶段参数

        Returns:
            Dict[str, Any]: 执行结果，下游可用 ${stage.field} 引用其中的字段
        """
        pass

    def describe(self, result: Dict[str, Any]) -> str:
        """结果的一行摘要，用于进度日志"""
        return ", ".join(sorted(result)) if result else ""

    @staticmethod
    def require(params: Dict[str, Any], *names: str):
        """取出必填参数，缺失时报错"""
        missing = [name for name in names if params.get(name) is None]
        if missing:
            raise ValueError(f"缺少必填参数: {', '.join(missing)}")
        return tuple(params[name] for name in names) if len(names) > 1 else params[names[0]]
