"""阶段配置管理模块"""

import importlib
import os
import logging
from typing import Dict, Optional, List

import yaml

from ..core.engine import PipelineEngine

logger = logging.getLogger(__name__)

DEFAULT_CONFIG_PATH = os.path.join(os.path.dirname(os.path.abspath(__file__)), "../nodes/node_config.yaml")


class StageConfigManager:
    """阶段配置管理类"""

    def __init__(self, config_path: Optional[str] = None):
        """
        初始化阶段配置管理器

        Args:
            config_path: 配置文件路径，如果为None则使用 src/nodes/node_config.yaml
        """
        self.config_path = config_path or DEFAULT_CONFIG_PATH
        self.stage_configs = self._load_config()

    def _load_config(self) -> Dict:
        """加载阶段配置"""
        if not os.path.exists(self.config_path):
            raise FileNotFoundError(f"阶段配置文件不存在: {self.config_path}")
        with open(self.config_path, 'r', encoding='utf-8') as f:
            return yaml.safe_load(f) or {}

    def get_stage_info(self, stage_type: str) -> Optional[Dict]:
        """
        获取阶段配置信息

        Args:
            stage_type: 阶段类型

        Returns:
            阶段配置信息，如果阶段不存在则返回None
        """
        for config in self.stage_configs.values():
            if isinstance(config, dict) and config.get("type") == stage_type:
                return config
        return None

    def get_all_stages(self) -> List[Dict]:
        """所有阶段的配置信息"""
        stages = []
        for class_name, config in self.stage_configs.items():
            if not isinstance(config, dict):
                logger.warning(f"阶段 {class_name} 的配置无效")
                continue
            stages.append(config)
        return stages

    def register_stage_types(self, engine: PipelineEngine):
        """按配置动态导入 src.nodes.<type> 模块，并把同名类注册到引擎"""
        for class_name, config in self.stage_configs.items():
            stage_type = config.get('type') if isinstance(config, dict) else None
            if not stage_type:
                logger.warning(f"阶段 {class_name} 未配置type字段，跳过注册")
                continue
            try:
                module = importlib.import_module(f"src.nodes.{stage_type}")
                stage_class = getattr(module, class_name)
            except (ImportError, AttributeError) as e:
                logger.error(f"注册阶段类型 {stage_type} 失败: {str(e)}")
                raise
            engine.register_stage_type(stage_type, stage_class)
        logger.debug(f"已注册阶段类型: {sorted(engine.stage_types)}")

    def get_stages_description(self) -> str:
        """
        获取所有阶段的描述信息，供 stages 子命令输出

        Returns:
            str: 格式化的阶段描述字符串
        """
        stage_descriptions = []
        for stage in self.get_all_stages():
            stage_type = stage.get("type", "unknown")
            name = stage.get("name", stage_type)
            lines = [
                f"Stage: {name}",
                f"Type: {stage_type}",
                "-" * 50,
                "Description:",
                f"  {stage.get('description', '')}",
                ""
            ]

            param_desc = []
            for param_name, param_info in stage.get("params", {}).items():
                if not isinstance(param_info, dict):
                    continue
                if param_info.get("required", False):
                    flag = "Required"
                else:
                    flag = f"Optional, Default: {param_info.get('default')}"
                param_desc.append(
                    f"  {param_name} ({param_info.get('type', 'unknown')}) [{flag}]: "
                    f"{param_info.get('description', '')}"
                )
            if param_desc:
                lines.extend(["Input Parameters:", *param_desc, ""])

            output = stage.get("output", {})
            if output:
                lines.extend(["Output Parameters:", *[f"  {key}: {value}" for key, value in output.items()], ""])

            lines.append("=" * 80)
            stage_descriptions.append("\n".join(lines))
        return "\n".join(stage_descriptions)
