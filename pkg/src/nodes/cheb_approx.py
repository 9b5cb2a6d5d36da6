"""Chebyshev近似阶段"""

from concurrent.futures import ThreadPoolExecutor
from typing import Dict, Any, List, Optional

import numpy as np

from .base import BaseNode
from ..recon.chebapprox import ChebSeries, SampledSignal, fit


def approximate(signal: SampledSignal, nodes: int, truncation: Optional[int]) -> ChebSeries:
    series = fit(signal, nodes)
    return series.truncate(truncation) if truncation else series


class ChebApproxNode(BaseNode):
    """对每个分量并行做 Chebyshev 拟合和截断，可选地在等距点上列表输出级数与导数"""

    def execute(self, params: Dict[str, Any]) -> Dict[str, Any]:
        signals: List[SampledSignal] = self.require(params, "signals")
        nodes = int(self.require(params, "nodes"))
        truncation = params.get("truncation")
        if truncation is not None and not 1 <= int(truncation) <= nodes:
            raise ValueError(f"截断阶数 {truncation} 超出范围 [1, {nodes}]")

        with ThreadPoolExecutor(max_workers=max(1, len(signals))) as pool:
            series = list(pool.map(lambda s: approximate(s, nodes, truncation), signals))
        derivatives = [s.derivative() for s in series]

        result = {"series": series, "derivatives": derivatives, "order": series[0].order}
        points = params.get("points")
        if points:
            t_min, t_max = series[0].domain
            times = np.linspace(t_min, t_max, int(points))
            table = {"t": times}
            for s, d in zip(series, derivatives):
                table[s.name] = s.evaluate(times)
                table[f"d{s.name}"] = d.evaluate(times)
            result["table"] = table
        return result

    def describe(self, result: Dict[str, Any]) -> str:
        return f"{len(result['series'])} 个分量, 多项式次数 {result['order']}"
