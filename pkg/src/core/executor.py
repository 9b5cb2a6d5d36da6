import time
import logging
from typing import Dict, Any, Type

from .models import StageResult
from .enums import StageStatus
from ..nodes.base import BaseNode

logger = logging.getLogger(__name__)

class StageExecutor:
    """阶段执行器"""

    def execute_stage(
        self,
        stage: Dict,
        processed_params: Dict[str, Any],
        stage_types: Dict[str, Type[BaseNode]]
    ) -> StageResult:
        """执行单个阶段，异常转换为 FAILED 结果，不向外抛出"""
        stage_id = stage["id"]
        start_time = time.time()
        try:
            stage_class = stage_types[stage["type"]]
            stage_instance = stage_class()
            result = stage_instance.execute(processed_params)
            end_time = time.time()
            logger.info(f"阶段 {stage_id} 完成，耗时 {end_time - start_time:.3f}s")
            return StageResult(
                stage=stage_id,
                success=True,
                status=StageStatus.COMPLETED,
                data=result,
                start_time=start_time,
                end_time=end_time
            )
        except Exception as e:
            end_time = time.time()
            logger.error(f"阶段 {stage_id} 执行失败: {str(e)}", exc_info=True)
            return StageResult(
                stage=stage_id,
                success=False,
                status=StageStatus.FAILED,
                error=str(e),
                start_time=start_time,
                end_time=end_time
            )
