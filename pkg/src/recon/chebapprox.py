"""Chebyshev近似模块

对每个数据分量在其自身时间域上构造截断Chebyshev级数，并计算级数及其导数的值。

系数约定：ã_0 与其他系数一样按 2/(M+1) 的因子存储，½ã_0 的折半在求值时施加。
"""

import logging
from dataclasses import dataclass, field
from typing import Sequence, Union

import numpy as np
from numpy.polynomial import chebyshev as npcheb

from .errors import DomainError, InvalidSignalError

logger = logging.getLogger(__name__)

# 区间端点处允许的相对舍入误差
_DOMAIN_SLACK = 1e-12

ArrayLike = Union[float, Sequence[float], np.ndarray]


def _frozen(values: ArrayLike) -> np.ndarray:
    array = np.array(values, dtype=float)
    array.setflags(write=False)
    return array


@dataclass(frozen=True)
class SampledSignal:
    """单个轨迹分量的原始采样 (t, y)"""
    times: np.ndarray
    values: np.ndarray
    name: str = "y"

    def __post_init__(self):
        times = _frozen(self.times)
        values = _frozen(self.values)
        if times.ndim != 1 or values.ndim != 1:
            raise InvalidSignalError(f"分量 {self.name}: 时间和数值必须是一维序列")
        if times.size != values.size:
            raise InvalidSignalError(
                f"分量 {self.name}: 时间点数 {times.size} 与数值个数 {values.size} 不一致"
            )
        if times.size < 2:
            raise InvalidSignalError(f"分量 {self.name}: 至少需要2个采样点")
        if not (np.all(np.isfinite(times)) and np.all(np.isfinite(values))):
            raise InvalidSignalError(f"分量 {self.name}: 含有非有限值")
        if np.any(np.diff(times) <= 0):
            raise InvalidSignalError(f"分量 {self.name}: 时间必须严格递增")
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "values", values)

    @property
    def t_min(self) -> float:
        return float(self.times[0])

    @property
    def t_max(self) -> float:
        return float(self.times[-1])

    def __len__(self) -> int:
        return int(self.times.size)

    def restrict(self, t_min: float, t_max: float) -> "SampledSignal":
        """截取到 [t_min, t_max]，窗口端点处用线性插值补点"""
        inside = (self.times > t_min) & (self.times < t_max)
        times = np.concatenate(([t_min], self.times[inside], [t_max]))
        values = resample_linear(self, times)
        return SampledSignal(times, values, self.name)


@dataclass(frozen=True)
class ChebSeries:
    """截断Chebyshev级数及其时间域 [t_min, t_max]"""
    coeffs: np.ndarray
    t_min: float
    t_max: float
    name: str = field(default="y", compare=False)

    def __post_init__(self):
        coeffs = _frozen(self.coeffs)
        if coeffs.ndim != 1 or coeffs.size == 0:
            raise InvalidSignalError("Chebyshev系数不能为空")
        if not np.all(np.isfinite(coeffs)):
            raise InvalidSignalError("Chebyshev系数含有非有限值")
        if not self.t_min < self.t_max:
            raise DomainError(f"退化的时间域: [{self.t_min}, {self.t_max}]")
        object.__setattr__(self, "coeffs", coeffs)
        object.__setattr__(self, "t_min", float(self.t_min))
        object.__setattr__(self, "t_max", float(self.t_max))

    @property
    def order(self) -> int:
        """多项式次数 M"""
        return int(self.coeffs.size - 1)

    @property
    def domain(self) -> tuple:
        return (self.t_min, self.t_max)

    def to_unit(self, t: ArrayLike) -> np.ndarray:
        """把物理时间仿射映射到 [-1, 1]；超出定义域时报错"""
        t = np.asarray(t, dtype=float)
        slack = _DOMAIN_SLACK * (self.t_max - self.t_min)
        if np.any(t < self.t_min - slack) or np.any(t > self.t_max + slack):
            raise DomainError(
                f"求值点超出定义域 [{self.t_min}, {self.t_max}]，不允许外推"
            )
        x = (2.0 * t - (self.t_min + self.t_max)) / (self.t_max - self.t_min)
        return np.clip(x, -1.0, 1.0)

    def evaluate(self, t: ArrayLike) -> Union[float, np.ndarray]:
        """计算 ½ã_0 + Σ ã_k T_k(x)，内部使用Clenshaw递推"""
        x = self.to_unit(t)
        c = np.array(self.coeffs)
        c[0] *= 0.5
        values = npcheb.chebval(x, c)
        return float(values) if np.ndim(values) == 0 else values

    def derivative(self) -> "ChebSeries":
        """对物理时间t求导，返回同长度、同定义域的级数

        在 [-1, 1] 上使用反向递推
        ã'_{M+1} = ã'_M = 0,  ã'_{k-1} = ã'_{k+1} + 2k ã_k,
        再乘以链式法则因子 2/(t_max - t_min)。
        """
        a = self.coeffs
        m = a.size - 1
        d = np.zeros(m + 2)
        for k in range(m, 0, -1):
            d[k - 1] = d[k + 1] + 2.0 * k * a[k]
        scale = 2.0 / (self.t_max - self.t_min)
        return ChebSeries(d[: m + 1] * scale, self.t_min, self.t_max, self.name)

    def truncate(self, keep: int) -> "ChebSeries":
        """只保留前 keep 个系数，作为廉价的滤波手段"""
        if not 1 <= keep <= self.coeffs.size:
            raise ValueError(f"截断阶数 {keep} 超出范围 [1, {self.coeffs.size}]")
        return ChebSeries(self.coeffs[:keep], self.t_min, self.t_max, self.name)


def chebyshev_nodes(count: int, t_min: float, t_max: float) -> np.ndarray:
    """返回 [t_min, t_max] 上的 count 个Chebyshev节点

    节点按公式顺序 cos(π(j+½)/count), j = 0..count-1 给出，即从右到左递减。
    """
    if count < 1:
        raise ValueError(f"节点个数必须为正整数: {count}")
    if not t_min < t_max:
        raise DomainError(f"退化的时间域: [{t_min}, {t_max}]")
    theta = np.pi * (np.arange(count) + 0.5) / count
    return 0.5 * (t_min + t_max) + 0.5 * (t_max - t_min) * np.cos(theta)


def resample_linear(signal: SampledSignal, query_times: ArrayLike) -> np.ndarray:
    """分段线性插值；不做外推"""
    query = np.atleast_1d(np.asarray(query_times, dtype=float))
    if np.any(query < signal.t_min) or np.any(query > signal.t_max):
        raise DomainError(
            f"分量 {signal.name}: 插值点超出数据范围 [{signal.t_min}, {signal.t_max}]"
        )
    return np.interp(query, signal.times, signal.values)


def fit(signal: SampledSignal, count: int) -> ChebSeries:
    """在信号自身时间域的 count = M+1 个Chebyshev节点上构造离散Chebyshev近似

    ã_k = 2/(M+1) Σ_j g(t_j) T_k(t_j)，其中 g(t_j) 由线性插值得到。
    """
    nodes = chebyshev_nodes(count, signal.t_min, signal.t_max)
    samples = resample_linear(signal, nodes)
    theta = np.pi * (np.arange(count) + 0.5) / count
    k = np.arange(count)
    coeffs = (2.0 / count) * np.cos(np.outer(k, theta)) @ samples
    logger.debug(f"分量 {signal.name}: 在 {count} 个节点上完成Chebyshev拟合")
    return ChebSeries(coeffs, signal.t_min, signal.t_max, signal.name)
