"""CSV 写出阶段"""

import os
from typing import Dict, Any
from .base import BaseNode
from ..cli.dataset import write_table


class CsvWriteNode(BaseNode):
    """把列字典写成全精度 CSV；表为空（例如模型不可积）时跳过"""

    def execute(self, params: Dict[str, Any]) -> Dict[str, Any]:
        path = self.require(params, "path")
        table = params.get("table")
        if not table:
            return {"written": False, "path": None, "columns": []}
        file_path = write_table(os.path.join(params.get("base_dir") or ".", path), table)
        return {"written": True, "path": str(file_path), "columns": list(table)}

    def describe(self, result: Dict[str, Any]) -> str:
        return f"{result['path']}: {result['columns']}" if result["written"] else "无数据，跳过"
