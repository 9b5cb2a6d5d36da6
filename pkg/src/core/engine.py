import logging
from typing import Dict, Any, Optional, Type, List, Callable

from .enums import StageStatus, PipelineStatus
from .models import StageResult
from .validator import PipelineValidator
from .params import ParamsProcessor
from .executor import StageExecutor
from ..nodes.base import BaseNode

logger = logging.getLogger(__name__)

class PipelineEngine:
    """流水线执行引擎

    阶段按拓扑顺序依次执行，上游结果通过 ${stage.field} 引用传给下游；
    遇到第一个失败的阶段即停止，其余阶段标记为 SKIPPED。
    """

    def __init__(self):
        self._stage_types: Dict[str, Type[BaseNode]] = {}
        self._pipeline_status: Dict[str, PipelineStatus] = {}
        self._stage_callbacks: List[Callable[[str, str, StageResult], None]] = []
        self._stage_executor = StageExecutor()

    def register_stage_type(self, type_name: str, stage_class: Type[BaseNode]):
        """注册阶段类型"""
        self._stage_types[type_name] = stage_class

    @property
    def stage_types(self) -> Dict[str, Type[BaseNode]]:
        return dict(self._stage_types)

    def validate_pipeline(self, pipeline: Dict) -> List[str]:
        """验证流水线的DAG结构，返回执行顺序"""
        return PipelineValidator.validate_pipeline(pipeline, self._stage_types)

    def get_pipeline_status(self, pipeline_id: str) -> Optional[PipelineStatus]:
        """获取流水线状态"""
        return self._pipeline_status.get(pipeline_id)

    def register_stage_callback(self, callback: Callable[[str, str, StageResult], None]):
        """注册阶段执行回调函数"""
        self._stage_callbacks.append(callback)

    def _notify_stage_completion(self, pipeline_id: str, stage_id: str, result: StageResult):
        """通知阶段执行完成"""
        for callback in self._stage_callbacks:
            try:
                callback(pipeline_id, stage_id, result)
            except Exception as e:
                logger.warning(f"回调函数执行失败: {str(e)}")

    def execute_pipeline(
        self,
        pipeline: Dict,
        pipeline_id: str,
        context: Optional[Dict[str, Any]] = None
    ) -> Dict[str, StageResult]:
        """执行流水线

        Args:
            pipeline: 流水线定义 {"stages": [...], "edges": [...]}
            pipeline_id: 本次运行的标识
            context: 上下文变量，参数中可用 ${name.field} 引用

        Returns:
            Dict[str, StageResult]: 各阶段结果，按执行顺序
        """
        order = self.validate_pipeline(pipeline)
        stages = {stage["id"]: stage for stage in pipeline["stages"]}

        self._pipeline_status[pipeline_id] = PipelineStatus.RUNNING
        results: Dict[str, StageResult] = {}
        logger.info(f"[{pipeline_id}] 开始执行流水线，阶段: {order}")

        failed = False
        for stage_id in order:
            stage = stages[stage_id]
            if failed:
                results[stage_id] = StageResult(
                    stage=stage_id,
                    success=False,
                    status=StageStatus.SKIPPED,
                    error="上游阶段执行失败"
                )
                continue
            try:
                processed_params = ParamsProcessor.process_params(stage.get("params", {}), results, context)
            except ValueError as e:
                result = StageResult(stage=stage_id, success=False, status=StageStatus.FAILED,
                                     error=f"参数解析失败: {str(e)}")
            else:
                result = self._stage_executor.execute_stage(stage, processed_params, self._stage_types)
            results[stage_id] = result
            self._notify_stage_completion(pipeline_id, stage_id, result)
            failed = not result.success

        self._pipeline_status[pipeline_id] = (
            PipelineStatus.FAILED if failed else PipelineStatus.COMPLETED
        )
        logger.info(f"[{pipeline_id}] 流水线结束: {self._pipeline_status[pipeline_id].value}")
        return results
