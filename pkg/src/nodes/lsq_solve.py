"""最小二乘求解阶段"""

from typing import Dict, Any
from .base import BaseNode
from ..recon.lsq import solve


class LsqSolveNode(BaseNode):
    """列主元QR求解全部分量"""

    def execute(self, params: Dict[str, Any]) -> Dict[str, Any]:
        solution = solve(self.require(params, "system"))
        return {
            "solution": solution,
            "scaled_residuals": solution.scaled_residuals.tolist(),
            "rank": solution.rank,
        }

    def describe(self, result: Dict[str, Any]) -> str:
        return f"秩 {result['rank']}, 缩放残差 {result['scaled_residuals']}"
