"""Gauss-Newton 精化阶段"""

from typing import Dict, Any
from .base import BaseNode
from ..recon.gaussnewton import FitProblem, GnConfig, format_report, parameter_labels, refine, result_to_dict


class RefineModelNode(BaseNode):
    """以活跃系数为参数对原始数据做阻尼 Gauss-Newton 拟合；未收敛时返回最后的可用迭代"""

    def execute(self, params: Dict[str, Any]) -> Dict[str, Any]:
        model, signals = self.require(params, "model", "signals")
        config = GnConfig.model_validate(params.get("gn") or {})
        problem = FitProblem(
            model,
            signals,
            float(params.get("rtol", 1e-9)),
            float(params.get("atol", 1e-9)),
        )
        result = refine(problem, config)
        report_dict = result_to_dict(result)
        report_dict["parameters"] = [list(label) for label in parameter_labels(model)]
        return {
            "result": result,
            "model": result.model,
            "model_dict": result.model.to_dict(),
            "converged": result.converged,
            "report": format_report(result, config, problem.parameter_count) + "\n",
            "report_dict": report_dict,
        }

    def describe(self, result: Dict[str, Any]) -> str:
        gn = result["result"]
        return f"converged={gn.converged}, Normf={gn.normf:.7g}, 迭代 {len(gn.iterations)} 次"
