"""绘图脚本阶段"""

import os
from typing import Dict, Any
from .base import BaseNode
from ..cli.plotting import write_plot_script


class PlotScriptNode(BaseNode):
    """为已写出的 CSV 生成 gnuplot 脚本"""

    def execute(self, params: Dict[str, Any]) -> Dict[str, Any]:
        path = params.get("path")
        columns = params.get("columns")
        if not path or not columns:
            return {"written": False, "path": None}
        script = write_plot_script(
            os.path.join(params.get("base_dir") or ".", path),
            self.require(params, "csv_path"),
            columns,
            params.get("title", ""),
            params.get("point_columns") or (),
        )
        return {"written": True, "path": str(script)}
