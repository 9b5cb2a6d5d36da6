"""数据集读取阶段"""

from typing import Dict, Any
from .base import BaseNode
from ..cli.dataset import load_dataset


class LoadDatasetNode(BaseNode):
    """读取 CSV 数据集，并截取到各分量的公共时间窗口"""

    def execute(self, params: Dict[str, Any]) -> Dict[str, Any]:
        path = self.require(params, "path")
        dataset = load_dataset(path)
        signals = dataset.restricted()
        return {
            "dataset": dataset,
            "signals": signals,
            "raw_signals": list(dataset.components),
            "names": dataset.names,
            "domain": dataset.domain,
            "synchronous": dataset.synchronous,
        }

    def describe(self, result: Dict[str, Any]) -> str:
        return f"分量 {result['names']}, 公共窗口 {result['domain']}"
