"""文件写入阶段"""

import json
import os
from typing import Dict, Any

import yaml

from .base import BaseNode
from ..cli.utils import ensure_serializable


class FileWriteNode(BaseNode):
    """把文本、YAML 或 JSON 内容写到文件；path 为空时跳过"""

    def execute(self, params: Dict[str, Any]) -> Dict[str, Any]:
        path = params.get("path")
        if not path:
            return {"written": False, "path": None}
        content = params.get("content")
        format = params.get("format", "txt")
        encoding = params.get("encoding", "utf-8")

        if format == "yaml":
            text = yaml.safe_dump(ensure_serializable(content), sort_keys=False, allow_unicode=True)
        elif format == "json":
            text = json.dumps(ensure_serializable(content), indent=2, ensure_ascii=False) + "\n"
        elif format == "txt":
            text = "" if content is None else str(content)
        else:
            raise ValueError(f"不支持的文件格式: {format}")

        # 相对路径以 base_dir 为根
        file_path = os.path.join(params.get("base_dir") or ".", path)
        directory = os.path.dirname(file_path)
        if directory:
            os.makedirs(directory, exist_ok=True)
        try:
            with open(file_path, "w", encoding=encoding, newline="\n") as f:
                f.write(text)
        except OSError as e:
            raise ValueError(f"写入文件失败: {str(e)}")
        return {
            "written": True,
            "path": file_path,
            "format": format,
            "bytes_written": len(text.encode(encoding)),
        }

    def describe(self, result: Dict[str, Any]) -> str:
        if not result["written"]:
            return "未指定路径，跳过"
        return f"{result['path']} ({result['bytes_written']} bytes)"
