"""Gram方程组组装阶段"""

from typing import Dict, Any
from .base import BaseNode
from ..recon.basis import MonomialBasis
from ..recon.lsq import assemble


class GramAssembleNode(BaseNode):
    """在解网格上计算单项式矩阵和导数右端项"""

    def execute(self, params: Dict[str, Any]) -> Dict[str, Any]:
        series = self.require(params, "series")
        basis = MonomialBasis(
            len(series),
            int(self.require(params, "max_degree")),
            bool(params.get("include_constant", True)),
        )
        system = assemble(series, basis, int(params.get("grid_size", 250)), params.get("grid", "equidistant"))
        return {"system": system, "basis": basis, "shape": list(system.matrix.shape)}

    def describe(self, result: Dict[str, Any]) -> str:
        rows, columns = result["shape"]
        return f"A: {rows}x{columns}"
