"""运行配置模块

默认值来自环境变量（由 .env 加载），``--config`` 指定的 YAML 文件覆盖环境变量，
命令行参数再覆盖文件。
"""

import os
from pathlib import Path
from typing import Any, Dict, Literal, Optional, Union

import yaml
from dotenv import load_dotenv
from pydantic import BaseModel, Field, ValidationError, field_validator, model_validator

from ..recon.gaussnewton import GnConfig

# 加载环境变量
load_dotenv()


def _env_float(name: str, default: Optional[str]) -> Optional[float]:
    value = os.getenv(name, default)
    return None if value in (None, "") else float(value)


def _env_int(name: str, default: Optional[str]) -> Optional[int]:
    value = os.getenv(name, default)
    return None if value in (None, "") else int(value)


def _env_bool(name: str, default: str) -> bool:
    return os.getenv(name, default).strip().lower() in ("1", "true", "yes", "on")


def _gn_from_env() -> GnConfig:
    return GnConfig(
        ptol=_env_float("GN_PTOL", "1e-3"),
        max_iter=_env_int("GN_MAX_ITER", "40"),
        fc_start=_env_float("GN_FC_START", "0.01"),
        fc_min=_env_float("GN_FC_MIN", "0.01"),
        fd_step=_env_float("GN_FD_STEP", "1e-6"),
    )


class IntegratorConfig(BaseModel):
    """积分器容差"""
    rtol: float = Field(default_factory=lambda: _env_float("RTOL", "1e-9"), gt=0, description="相对容差")
    atol: float = Field(default_factory=lambda: _env_float("ATOL", "1e-9"), gt=0, description="绝对容差")


class RunConfig(BaseModel):
    """流水线的全部自由参数"""
    cheb_nodes: int = Field(
        default_factory=lambda: _env_int("CHEB_NODES", "80"), gt=0,
        description="Chebyshev节点个数 M+1"
    )
    cheb_truncation: Optional[int] = Field(
        default_factory=lambda: _env_int("CHEB_TRUNCATION", None),
        description="求值时保留的Chebyshev系数个数，为空表示不截断"
    )
    max_degree: int = Field(
        default_factory=lambda: _env_int("MAX_DEGREE", "3"), ge=0,
        description="单项式最高总次数 d"
    )
    include_constant: bool = Field(
        default_factory=lambda: _env_bool("INCLUDE_CONSTANT", "true"),
        description="是否包含常数项"
    )
    solve_grid_size: int = Field(
        default_factory=lambda: _env_int("SOLVE_GRID_SIZE", "250"), ge=2,
        description="Gram方程组的采样点数 m"
    )
    solve_grid: Literal["equidistant", "chebyshev"] = Field(
        default_factory=lambda: os.getenv("SOLVE_GRID", "equidistant"),
        description="Gram方程组的采样网格类型"
    )
    threshold_pct: float = Field(
        default_factory=lambda: _env_float("THRESHOLD_PCT", "0.1"), ge=0, le=100,
        description="保留项的百分比阈值"
    )
    refit_after_threshold: bool = Field(
        default_factory=lambda: _env_bool("REFIT_AFTER_THRESHOLD", "false"),
        description="阈值化后是否在活跃项上重新拟合"
    )
    verify_rms_tolerance: Optional[float] = Field(
        default_factory=lambda: _env_float("VERIFY_RMS_TOLERANCE", None),
        description="验证通过的RMS上限，为空时结论为 unchecked"
    )
    output_dir: str = Field(
        default_factory=lambda: os.getenv("OUTPUT_DIR", "."),
        description="相对输出路径的根目录"
    )
    integrator: IntegratorConfig = Field(default_factory=IntegratorConfig, description="积分器容差")
    gn: GnConfig = Field(default_factory=_gn_from_env, description="Gauss-Newton参数")

    @field_validator("cheb_truncation")
    @classmethod
    def check_truncation(cls, value: Optional[int]) -> Optional[int]:
        if value is not None and value < 1:
            raise ValueError(f"截断阶数必须为正: {value}")
        return value

    @field_validator("verify_rms_tolerance")
    @classmethod
    def check_rms_tolerance(cls, value: Optional[float]) -> Optional[float]:
        if value is not None and value <= 0:
            raise ValueError(f"RMS上限必须为正: {value}")
        return value

    @model_validator(mode="after")
    def check_counts(self) -> "RunConfig":
        if self.cheb_truncation is not None and self.cheb_truncation > self.cheb_nodes:
            raise ValueError(
                f"截断阶数 {self.cheb_truncation} 不能超过节点个数 {self.cheb_nodes}"
            )
        if not self.include_constant and self.max_degree == 0:
            raise ValueError("去掉常数项后 0 次单项式族为空")
        return self


class ConfigError(ValueError):
    """配置文件或参数不合法"""


def _merge(base: Dict[str, Any], override: Dict[str, Any]) -> Dict[str, Any]:
    merged = dict(base)
    for key, value in override.items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = _merge(merged[key], value)
        else:
            merged[key] = value
    return merged


def load_run_config(
    config_path: Optional[Union[str, Path]] = None,
    overrides: Optional[Dict[str, Any]] = None,
) -> RunConfig:
    """环境变量 < YAML 文件 < 命令行覆盖项；覆盖项中值为 None 的键被忽略

    Raises:
        ConfigError: 文件无法读取或校验失败
    """
    try:
        settings = RunConfig().model_dump()
    except ValueError as e:
        raise ConfigError(f"环境变量中的默认值不合法: {e}") from e
    if config_path:
        try:
            with open(config_path, "r", encoding="utf-8") as f:
                content = yaml.safe_load(f) or {}
        except (OSError, yaml.YAMLError) as e:
            raise ConfigError(f"无法读取配置文件 {config_path}: {e}") from e
        if not isinstance(content, dict):
            raise ConfigError(f"配置文件 {config_path} 必须是键值映射")
        unknown = set(content) - set(RunConfig.model_fields)
        if unknown:
            raise ConfigError(f"配置文件 {config_path} 含有未知的键: {sorted(unknown)}")
        settings = _merge(settings, content)

    def present(values: Dict[str, Any]) -> Dict[str, Any]:
        return {
            k: present(v) if isinstance(v, dict) else v
            for k, v in values.items() if v is not None
        }

    settings = _merge(settings, present(overrides or {}))
    try:
        return RunConfig.model_validate(settings)
    except ValidationError as e:
        raise ConfigError(f"配置校验失败: {e}") from e
