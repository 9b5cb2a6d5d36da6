"""模型文件读取阶段"""

from typing import Dict, Any

import yaml

from .base import BaseNode
from ..recon.model import RecoveredModel


class LoadModelNode(BaseNode):
    """读取 reconstruct 写出的模型 YAML"""

    def execute(self, params: Dict[str, Any]) -> Dict[str, Any]:
        path = self.require(params, "path")
        with open(path, "r", encoding="utf-8") as f:
            content = yaml.safe_load(f)
        if not isinstance(content, dict) or "coeffs" not in content:
            raise ValueError(f"{path} 不是模型文件")
        try:
            model = RecoveredModel.from_dict(content)
        except (KeyError, TypeError) as e:
            raise ValueError(f"模型文件 {path} 缺少字段: {e}") from e
        names = params.get("names")
        if names and len(names) != model.n:
            raise ValueError(f"模型维数 {model.n} 与数据分量数 {len(names)} 不符")
        stored = content.get("component_names")
        if names and stored and list(stored) != list(names):
            raise ValueError(f"模型分量 {list(stored)} 与数据列 {list(names)} 的名称或顺序不符")
        return {"model": model, "parameters": int(model.active.sum())}

    def describe(self, result: Dict[str, Any]) -> str:
        return f"活跃项 {result['parameters']} 个"
