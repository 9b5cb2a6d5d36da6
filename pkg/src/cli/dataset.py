"""CSV 数据集的读写

支持两种格式，首行必须是表头：
- 宽格式 ``t,name1,name2,…``：所有分量共享时间列，空单元格表示该分量在此时刻无采样；
- 长格式 ``component,t,value``：每个分量可以有自己的时间网格。
输出使用 UTF-8、LF 换行和 ``%.17g`` 全精度浮点数。
"""

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from ..recon.chebapprox import SampledSignal
from ..recon.errors import DatasetError, InvalidSignalError

logger = logging.getLogger(__name__)

FLOAT_FORMAT = "%.17g"
LONG_COLUMNS = ["component", "t", "value"]
TIME_COLUMNS = ("t", "time")

PathLike = Union[str, Path]


@dataclass(frozen=True)
class Dataset:
    """命名分量列表，各分量可有独立时间网格"""
    components: Tuple[SampledSignal, ...]

    def __post_init__(self):
        object.__setattr__(self, "components", tuple(self.components))
        if not self.components:
            raise DatasetError("数据集中没有任何分量")
        names = self.names
        if len(set(names)) != len(names):
            raise DatasetError(f"分量名重复: {names}")
        t_min, t_max = self.domain
        if not t_min < t_max:
            raise DatasetError(f"各分量的时间范围没有公共区间: [{t_min}, {t_max}]")

    @property
    def names(self) -> List[str]:
        return [c.name for c in self.components]

    @property
    def domain(self) -> Tuple[float, float]:
        """公共时间窗口 [max 首时刻, min 末时刻]"""
        return (
            max(c.t_min for c in self.components),
            min(c.t_max for c in self.components),
        )

    @property
    def synchronous(self) -> bool:
        first = self.components[0].times
        return all(
            c.times.shape == first.shape and np.array_equal(c.times, first)
            for c in self.components[1:]
        )

    def restricted(self) -> List[SampledSignal]:
        """截取到公共窗口；窗口内少于2个原始样本的分量报错"""
        t_min, t_max = self.domain
        signals = []
        for c in self.components:
            inside = np.count_nonzero((c.times >= t_min) & (c.times <= t_max))
            if inside < 2:
                raise DatasetError(f"分量 {c.name} 在公共窗口 [{t_min}, {t_max}] 内不足2个样本")
            same = c.t_min == t_min and c.t_max == t_max
            signals.append(c if same else c.restrict(t_min, t_max))
        return signals

    def __len__(self) -> int:
        return len(self.components)


def _signal(name: str, times: np.ndarray, values: np.ndarray, path: PathLike) -> SampledSignal:
    if times.size == 0:
        raise DatasetError(f"{path}: 分量 {name} 没有数据")
    try:
        return SampledSignal(times, values, name)
    except InvalidSignalError as e:
        raise DatasetError(f"{path}: {e}") from e


def _numeric(frame: pd.DataFrame, columns: Sequence[str], path: PathLike) -> pd.DataFrame:
    try:
        return frame[list(columns)].apply(pd.to_numeric, errors="raise")
    except (ValueError, TypeError) as e:
        raise DatasetError(f"{path}: 存在无法解析为数字的单元格: {e}") from e


def load_dataset(path: PathLike) -> Dataset:
    """读取宽格式或长格式 CSV"""
    try:
        frame = pd.read_csv(path, skipinitialspace=True, float_precision="round_trip")
    except FileNotFoundError as e:
        raise DatasetError(f"数据文件不存在: {path}") from e
    except (pd.errors.EmptyDataError, pd.errors.ParserError, UnicodeDecodeError) as e:
        raise DatasetError(f"{path}: 无法解析CSV: {e}") from e

    frame.columns = [str(c).strip() for c in frame.columns]
    if frame.empty:
        raise DatasetError(f"{path}: 只有表头没有数据行")

    if [c.lower() for c in frame.columns] == LONG_COLUMNS:
        frame.columns = LONG_COLUMNS
        numeric = _numeric(frame, ["t", "value"], path)
        if numeric.isna().any().any():
            raise DatasetError(f"{path}: 长格式中存在空单元格")
        components = []
        for name in pd.unique(frame["component"].astype(str).str.strip()):
            rows = frame["component"].astype(str).str.strip() == name
            components.append(_signal(
                name, numeric.loc[rows, "t"].to_numpy(float), numeric.loc[rows, "value"].to_numpy(float), path
            ))
        fmt = "long"
    else:
        time_column = frame.columns[0]
        if time_column.lower() not in TIME_COLUMNS:
            raise DatasetError(
                f"{path}: 无法识别表头 {list(frame.columns)}，需要 't,name…' 或 'component,t,value'"
            )
        if len(frame.columns) < 2:
            raise DatasetError(f"{path}: 宽格式至少需要一个数据列")
        numeric = _numeric(frame, frame.columns, path)
        if numeric[time_column].isna().any():
            raise DatasetError(f"{path}: 时间列存在空单元格")
        components = []
        for name in frame.columns[1:]:
            column = numeric[[time_column, name]].dropna()
            components.append(_signal(
                name, column[time_column].to_numpy(float), column[name].to_numpy(float), path
            ))
        fmt = "wide"

    dataset = Dataset(tuple(components))
    logger.info(f"读取数据集 {path} ({fmt}): 分量 {dataset.names}, 样本数 {[len(c) for c in components]}")
    return dataset


def write_table(path: PathLike, columns: Dict[str, Sequence[float]]) -> Path:
    """按列写出宽表，缺失值写为空单元格"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame = pd.DataFrame({name: np.asarray(values, dtype=float) for name, values in columns.items()})
    frame.to_csv(path, index=False, float_format=FLOAT_FORMAT, lineterminator="\n", encoding="utf-8")
    return path


def signals_to_columns(signals: Sequence[SampledSignal]) -> Dict[str, np.ndarray]:
    """同步分量拼成宽表各列；异步分量在并集时间上留空"""
    times = np.unique(np.concatenate([s.times for s in signals]))
    columns: Dict[str, np.ndarray] = {"t": times}
    for s in signals:
        column = np.full(times.shape, np.nan)
        column[np.searchsorted(times, s.times)] = s.values
        columns[s.name] = column
    return columns


def write_dataset(path: PathLike, signals: Sequence[SampledSignal]) -> Path:
    """写出宽格式数据集，load_dataset 可原样读回"""
    written = write_table(path, signals_to_columns(signals))
    logger.info(f"写出数据集 {written}: 分量 {[s.name for s in signals]}")
    return written
