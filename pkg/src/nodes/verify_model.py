"""模型验证阶段"""

from typing import Dict, Any
import numpy as np

from .base import BaseNode
from ..recon.integrate import verify


class VerifyModelNode(BaseNode):
    """从第一行数据积分模型并与全部数据比较；不可积不算阶段失败"""

    def execute(self, params: Dict[str, Any]) -> Dict[str, Any]:
        model, signals = self.require(params, "model", "signals")
        report = verify(
            model,
            signals,
            float(params.get("rtol", 1e-9)),
            float(params.get("atol", 1e-9)),
            params.get("rms_tolerance"),
        )
        table = None
        if report.integrable:
            times = report.trajectory.times
            table = {"t": times}
            for s in signals:
                column = np.full(times.shape, np.nan)
                column[np.searchsorted(times, s.times)] = s.values
                table[s.name] = column
            for k, s in enumerate(signals):
                table[f"{s.name}_model"] = report.trajectory.component(k)
        return {
            "report": report,
            "verdict": report.verdict.value,
            "rms": report.rms,
            "summary": report.summary() + "\n",
            "table": table,
        }

    def describe(self, result: Dict[str, Any]) -> str:
        return f"verdict: {result['verdict']}, RMS {result['rms']}"
