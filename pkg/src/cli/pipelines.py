"""流水线定义与重构服务

每个子命令对应一条阶段流水线。参数里的 ${config.x} 引用运行配置，
${args.x} 引用命令行给出的路径等，${stage.field} 引用上游阶段的输出。
"""

import logging
from datetime import datetime
from typing import Any, Dict, List, Optional

from ..core.engine import PipelineEngine
from ..core.enums import StageStatus
from ..core.models import PipelineError, StageResult
from ..core.node_config import StageConfigManager
from .config import RunConfig
from .utils import convert_stage_result

logger = logging.getLogger(__name__)

OUTPUT_DIR = "${config.output_dir}"


def _edges(*pairs: str) -> List[Dict[str, str]]:
    edges = []
    for pair in pairs:
        source, target = pair.split("->")
        edges.append({"from": source.strip(), "to": target.strip()})
    return edges


def approx_pipeline() -> Dict:
    return {
        "stages": [
            {"id": "load", "type": "load_dataset", "params": {"path": "${args.data}"}},
            {"id": "approx", "type": "cheb_approx", "params": {
                "signals": "${load.signals}",
                "nodes": "${config.cheb_nodes}",
                "truncation": "${config.cheb_truncation}",
                "points": "${args.points}",
            }},
            {"id": "write_csv", "type": "csv_write", "params": {
                "path": "${args.out}", "table": "${approx.table}", "base_dir": OUTPUT_DIR,
            }},
            {"id": "plot", "type": "plot_script", "params": {
                "path": "${args.plot_script}",
                "csv_path": "${write_csv.path}",
                "columns": "${write_csv.columns}",
                "title": "Chebyshev approximation and derivative",
                "base_dir": OUTPUT_DIR,
            }},
        ],
        "edges": _edges("load -> approx", "approx -> write_csv", "write_csv -> plot"),
    }


def reconstruct_pipeline() -> Dict:
    return {
        "stages": [
            {"id": "load", "type": "load_dataset", "params": {"path": "${args.data}"}},
            {"id": "approx", "type": "cheb_approx", "params": {
                "signals": "${load.signals}",
                "nodes": "${config.cheb_nodes}",
                "truncation": "${config.cheb_truncation}",
            }},
            {"id": "assemble", "type": "gram_assemble", "params": {
                "series": "${approx.series}",
                "max_degree": "${config.max_degree}",
                "include_constant": "${config.include_constant}",
                "grid_size": "${config.solve_grid_size}",
                "grid": "${config.solve_grid}",
            }},
            {"id": "solve", "type": "lsq_solve", "params": {"system": "${assemble.system}"}},
            {"id": "threshold", "type": "threshold_model", "params": {
                "solution": "${solve.solution}",
                "basis": "${assemble.basis}",
                "threshold_pct": "${config.threshold_pct}",
                "domain": "${load.domain}",
                "names": "${load.names}",
                "refit": "${config.refit_after_threshold}",
                "system": "${assemble.system}",
            }},
            {"id": "write_report", "type": "file_write", "params": {
                "path": "${args.report}", "content": "${threshold.protocol}", "base_dir": OUTPUT_DIR,
            }},
            {"id": "write_model", "type": "file_write", "params": {
                "path": "${args.model_out}", "content": "${threshold.model_dict}",
                "format": "yaml", "base_dir": OUTPUT_DIR,
            }},
        ],
        "edges": _edges(
            "load -> approx", "approx -> assemble", "assemble -> solve", "solve -> threshold",
            "threshold -> write_report", "threshold -> write_model",
        ),
    }


def verify_pipeline() -> Dict:
    return {
        "stages": [
            {"id": "load", "type": "load_dataset", "params": {"path": "${args.data}"}},
            {"id": "model", "type": "load_model", "params": {"path": "${args.model}", "names": "${load.names}"}},
            {"id": "verify", "type": "verify_model", "params": {
                "model": "${model.model}",
                "signals": "${load.raw_signals}",
                "rtol": "${config.integrator.rtol}",
                "atol": "${config.integrator.atol}",
                "rms_tolerance": "${config.verify_rms_tolerance}",
            }},
            {"id": "write_csv", "type": "csv_write", "params": {
                "path": "${args.out}", "table": "${verify.table}", "base_dir": OUTPUT_DIR,
            }},
            {"id": "write_report", "type": "file_write", "params": {
                "path": "${args.report}", "content": "${verify.summary}", "base_dir": OUTPUT_DIR,
            }},
            {"id": "plot", "type": "plot_script", "params": {
                "path": "${args.plot_script}",
                "csv_path": "${write_csv.path}",
                "columns": "${write_csv.columns}",
                "point_columns": "${load.names}",
                "title": "Recovered model vs. data",
                "base_dir": OUTPUT_DIR,
            }},
        ],
        "edges": _edges(
            "load -> model", "model -> verify", "verify -> write_csv",
            "verify -> write_report", "write_csv -> plot",
        ),
    }


def refine_pipeline() -> Dict:
    return {
        "stages": [
            {"id": "load", "type": "load_dataset", "params": {"path": "${args.data}"}},
            {"id": "model", "type": "load_model", "params": {"path": "${args.model}", "names": "${load.names}"}},
            {"id": "refine", "type": "refine_model", "params": {
                "model": "${model.model}",
                "signals": "${load.raw_signals}",
                "rtol": "${config.integrator.rtol}",
                "atol": "${config.integrator.atol}",
                "gn": "${config.gn}",
            }},
            {"id": "write_report", "type": "file_write", "params": {
                "path": "${args.report}", "content": "${refine.report}", "base_dir": OUTPUT_DIR,
            }},
            {"id": "write_json", "type": "file_write", "params": {
                "path": "${args.json}", "content": "${refine.report_dict}",
                "format": "json", "base_dir": OUTPUT_DIR,
            }},
            {"id": "write_model", "type": "file_write", "params": {
                "path": "${args.model_out}", "content": "${refine.model_dict}",
                "format": "yaml", "base_dir": OUTPUT_DIR,
            }},
        ],
        "edges": _edges(
            "load -> model", "model -> refine", "refine -> write_report",
            "refine -> write_json", "refine -> write_model",
        ),
    }


def generate_pipeline() -> Dict:
    return {
        "stages": [
            {"id": "generate", "type": "generate_data", "params": {
                "system": "${args.system}", "arguments": "${args.arguments}",
            }},
            {"id": "write_csv", "type": "csv_write", "params": {
                "path": "${args.out}", "table": "${generate.table}", "base_dir": OUTPUT_DIR,
            }},
            {"id": "plot", "type": "plot_script", "params": {
                "path": "${args.plot_script}",
                "csv_path": "${write_csv.path}",
                "columns": "${write_csv.columns}",
                "point_columns": "${generate.names}",
                "title": "${args.system} data",
                "base_dir": OUTPUT_DIR,
            }},
        ],
        "edges": _edges("generate -> write_csv", "write_csv -> plot"),
    }


def create_engine(config_path: Optional[str] = None) -> PipelineEngine:
    """创建引擎并注册 node_config.yaml 中的全部阶段类型"""
    engine = PipelineEngine()
    StageConfigManager(config_path).register_stage_types(engine)
    return engine


class ReconstructionService:
    """按子命令组装参数并运行流水线"""

    def __init__(self, engine: PipelineEngine, config: RunConfig):
        self.engine = engine
        self.config = config
        self.engine.register_stage_callback(self._log_stage)

    @staticmethod
    def _log_stage(pipeline_id: str, stage_id: str, result: StageResult):
        logger.debug(f"[{pipeline_id}] {convert_stage_result(stage_id, result)}")

    def run(self, name: str, pipeline: Dict, args: Dict[str, Any]) -> Dict[str, Dict[str, Any]]:
        """运行流水线，返回各阶段输出

        Raises:
            PipelineError: 第一个失败阶段的ID和错误信息
        """
        pipeline_id = f"{name}-{datetime.now().strftime('%Y%m%d%H%M%S')}"
        context = {"config": self.config.model_dump(), "args": args}
        results = self.engine.execute_pipeline(pipeline, pipeline_id, context)

        stage_types = {stage["id"]: stage["type"] for stage in pipeline["stages"]}
        for stage_id, result in results.items():
            if result.status is StageStatus.FAILED:
                raise PipelineError(stage_id, result.error or "未知错误")
            stage = self.engine.stage_types[stage_types[stage_id]]()
            logger.info(f"[{pipeline_id}] {stage_id}: {stage.describe(result.data)}")
        return {stage_id: result.data for stage_id, result in results.items()}

    def approx(self, data: str, out: str, points: int = 200, plot_script: Optional[str] = None):
        return self.run("approx", approx_pipeline(), {
            "data": data, "out": out, "points": points, "plot_script": plot_script,
        })

    def reconstruct(self, data: str, model_out: Optional[str] = None, report: Optional[str] = None):
        return self.run("reconstruct", reconstruct_pipeline(), {
            "data": data, "model_out": model_out, "report": report,
        })

    def verify(
        self,
        data: str,
        model: str,
        out: str,
        report: Optional[str] = None,
        plot_script: Optional[str] = None,
    ):
        return self.run("verify", verify_pipeline(), {
            "data": data, "model": model, "out": out, "report": report, "plot_script": plot_script,
        })

    def refine(
        self,
        data: str,
        model: str,
        model_out: Optional[str] = None,
        report: Optional[str] = None,
        json: Optional[str] = None,
    ):
        return self.run("refine", refine_pipeline(), {
            "data": data, "model": model, "model_out": model_out, "report": report, "json": json,
        })

    def generate(
        self,
        system: str,
        out: str,
        arguments: Optional[Dict[str, Any]] = None,
        plot_script: Optional[str] = None,
    ):
        return self.run("generate", generate_pipeline(), {
            "system": system, "out": out, "arguments": arguments or {}, "plot_script": plot_script,
        })
