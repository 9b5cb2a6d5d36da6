"""阈值化与协议生成阶段"""

from typing import Dict, Any
from .base import BaseNode
from ..recon.model import format_protocol, refit, threshold


class ThresholdModelNode(BaseNode):
    """按百分比阈值选出活跃项，生成各分量的运行协议"""

    def execute(self, params: Dict[str, Any]) -> Dict[str, Any]:
        solution, basis = self.require(params, "solution", "basis")
        model = threshold(
            solution,
            basis,
            float(params.get("threshold_pct", 0.1)),
            tuple(params.get("domain") or (0.0, 1.0)),
            params.get("names"),
        )
        if params.get("refit"):
            model = refit(self.require(params, "system"), model)
        protocols = [format_protocol(solution, model, k) for k in range(model.n)]
        return {
            "model": model,
            "model_dict": model.to_dict(),
            "protocols": protocols,
            "protocol": "\n\n".join(protocols) + "\n",
            "active_counts": model.active.sum(axis=1).tolist(),
        }

    def describe(self, result: Dict[str, Any]) -> str:
        return f"各分量活跃项 {result['active_counts']}"
