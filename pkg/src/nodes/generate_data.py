"""合成数据生成阶段"""

from typing import Dict, Any
from .base import BaseNode
from ..cli.dataset import signals_to_columns
from ..recon.integrate import generate_lotka_volterra_data, generate_pendulum_data

GENERATORS = {
    "pendulum": generate_pendulum_data,
    "lotka_volterra": generate_lotka_volterra_data,
}


class GenerateDataNode(BaseNode):
    """积分已知系统并等距采样"""

    def execute(self, params: Dict[str, Any]) -> Dict[str, Any]:
        system = self.require(params, "system")
        if system not in GENERATORS:
            raise ValueError(f"未知的系统: {system}，可选 {sorted(GENERATORS)}")
        arguments = {k: v for k, v in (params.get("arguments") or {}).items() if v is not None}
        signals = GENERATORS[system](**arguments)
        return {
            "signals": signals,
            "names": [s.name for s in signals],
            "table": signals_to_columns(signals),
        }

    def describe(self, result: Dict[str, Any]) -> str:
        return f"分量 {result['names']}, 样本数 {len(result['signals'][0])}"
