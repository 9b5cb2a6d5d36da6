from typing import Dict, List, Type
import networkx as nx
from ..nodes.base import BaseNode

class PipelineValidator:
    """流水线验证器"""

    @staticmethod
    def build_graph(pipeline: Dict) -> nx.DiGraph:
        """由阶段和边构建有向图"""
        G = nx.DiGraph()
        for stage in pipeline["stages"]:
            G.add_node(stage["id"])
        for edge in pipeline.get("edges", []):
            G.add_edge(edge["from"], edge["to"])
        return G

    @staticmethod
    def validate_pipeline(pipeline: Dict, stage_types: Dict[str, Type[BaseNode]]) -> List[str]:
        """验证流水线的DAG结构

        Args:
            pipeline: 流水线定义，包含 stages 和可选的 edges
            stage_types: 已注册的阶段类型

        Returns:
            List[str]: 拓扑排序后的阶段ID，同层按定义顺序

        Raises:
            ValueError: DAG验证失败时抛出，包含具体原因
        """
        stages = pipeline["stages"]
        if not stages:
            raise ValueError("流水线没有任何阶段")

        # 检查阶段ID唯一性
        stage_ids = [stage["id"] for stage in stages]
        if len(stage_ids) != len(set(stage_ids)):
            raise ValueError("存在重复的阶段ID")

        # 检查阶段类型是否已注册
        for stage in stages:
            if stage["type"] not in stage_types:
                raise ValueError(f"未注册的阶段类型: {stage['type']}")

        for edge in pipeline.get("edges", []):
            for end in (edge["from"], edge["to"]):
                if end not in stage_ids:
                    raise ValueError(f"边引用了不存在的阶段: {end}")

        G = PipelineValidator.build_graph(pipeline)
        try:
            cycle = nx.find_cycle(G)
            raise ValueError(f"流水线中存在环: {cycle}")
        except nx.NetworkXNoCycle:
            pass

        order = {stage_id: i for i, stage_id in enumerate(stage_ids)}
        return list(nx.lexicographical_topological_sort(G, key=lambda n: order[n]))
