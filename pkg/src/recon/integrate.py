"""自适应显式Runge-Kutta积分器，用于模型验证和合成数据生成

Dormand-Prince 5(4) 嵌入式公式对，逐步误差控制，输出时间点处精确落步。
"""

import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

from .chebapprox import SampledSignal
from .errors import DomainError, IntegrationError

logger = logging.getLogger(__name__)

Rhs = Callable[[np.ndarray], np.ndarray]

SAFETY = 0.9
MIN_FACTOR = 0.2
MAX_FACTOR = 5.0
# 步长低于 H_FLOOR * (t_end - t0) 视为模型不可积
H_FLOOR = 1e-12
MAX_STEPS = 200000

# Dormand-Prince 系数表
_A = [
    [],
    [1 / 5],
    [3 / 40, 9 / 40],
    [44 / 45, -56 / 15, 32 / 9],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
    [35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
]
_B = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
_B_HAT = np.array(
    [5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40]
)
_E = _B - _B_HAT


class Verdict(Enum):
    """验证结论"""
    VERIFIED = "verified"
    NOT_VERIFIED = "not verified"
    UNCHECKED = "unchecked"
    NOT_INTEGRABLE = "model not integrable"


@dataclass(frozen=True)
class IvpProblem:
    """初值问题 y' = f(y), y(t0) = y0"""
    rhs: Rhs
    y0: np.ndarray
    t0: float
    t_end: float
    rtol: float = 1e-9
    atol: float = 1e-9

    def __post_init__(self):
        object.__setattr__(self, "y0", np.array(self.y0, dtype=float).ravel())
        if not self.t0 < self.t_end:
            raise DomainError(f"积分区间无效: [{self.t0}, {self.t_end}]")
        if self.rtol <= 0 or self.atol <= 0:
            raise ValueError(f"容差必须为正: rtol={self.rtol}, atol={self.atol}")


@dataclass(frozen=True)
class Trajectory:
    """数值解，第一行为 (t0, y0)"""
    times: np.ndarray
    states: np.ndarray
    steps: int = 0
    rejected: int = 0
    rhs_evaluations: int = 0

    def component(self, k: int) -> np.ndarray:
        return self.states[:, k]


def _step(rhs: Rhs, y: np.ndarray, f0: np.ndarray, h: float) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """走一步DOPRI5，返回新状态、末级斜率（FSAL）和局部误差估计"""
    k = [f0]
    for i in range(1, 7):
        increment = sum(a * k_j for a, k_j in zip(_A[i], k))
        k.append(np.asarray(rhs(y + h * increment), dtype=float))
    y_new = y + h * sum(b * k_j for b, k_j in zip(_B, k) if b != 0.0)
    error = h * sum(e * k_j for e, k_j in zip(_E, k) if e != 0.0)
    return y_new, k[6], error


def solve_ivp(problem: IvpProblem, output_times: Sequence[float]) -> Trajectory:
    """在 output_times 处输出数值解

    输出点之间自适应步进；误差按 atol + rtol·|y| 加权的均方根范数控制，
    步长因子 0.9·err^{-1/5} 限制在 [0.2, 5]。初始步长 (t_end − t0)/100。
    """
    targets = np.asarray(output_times, dtype=float).ravel()
    if targets.size and (np.any(np.diff(targets) < 0)):
        raise ValueError("输出时间点必须递增")
    if targets.size and (targets[0] < problem.t0 or targets[-1] > problem.t_end):
        raise DomainError(
            f"输出时间点超出积分区间 [{problem.t0}, {problem.t_end}]"
        )
    if targets.size == 0 or targets[0] > problem.t0:
        targets = np.concatenate(([problem.t0], targets))

    span = problem.t_end - problem.t0
    h_min = H_FLOOR * span
    h = span / 100.0
    t = problem.t0
    y = problem.y0.copy()
    f = np.asarray(problem.rhs(y), dtype=float)
    evaluations = 1
    steps = rejected = 0

    states = []
    for target in targets:
        while t < target:
            if steps + rejected >= MAX_STEPS:
                raise IntegrationError(t, h, f"model not integrable: 超过最大步数 {MAX_STEPS}")
            landing = target - t <= h
            h_try = target - t if landing else h
            try:
                with np.errstate(over="ignore", invalid="ignore"):
                    y_new, f_new, error = _step(problem.rhs, y, f, h_try)
                    scale = problem.atol + problem.rtol * np.maximum(np.abs(y), np.abs(y_new))
                    err = float(np.sqrt(np.mean((error / scale) ** 2)))
            except (ValueError, FloatingPointError, OverflowError):
                err = np.inf
            evaluations += 6
            if not np.isfinite(err):
                err = np.inf
            factor = MAX_FACTOR if err == 0.0 else SAFETY * err ** -0.2
            factor = min(MAX_FACTOR, max(MIN_FACTOR, factor))
            if err <= 1.0:
                t = target if landing else t + h_try
                y, f = y_new, f_new
                steps += 1
                h = max(h, h_try * factor) if landing else h_try * factor
            else:
                rejected += 1
                h = h_try * factor
            if h < h_min:
                logger.debug(f"积分失败: t={t:.6g}, h={h:.3g}")
                raise IntegrationError(t, h)
        states.append(y.copy())

    logger.debug(f"积分完成: 接受 {steps} 步, 拒绝 {rejected} 步, 右端求值 {evaluations} 次")
    return Trajectory(targets, np.array(states), steps, rejected, evaluations)


def sample_trajectory(
    rhs: Rhs,
    y0: Sequence[float],
    t0: float,
    t_end: float,
    n_samples: int,
    names: Sequence[str],
    rtol: float = 1e-9,
    atol: float = 1e-9,
) -> List[SampledSignal]:
    """积分后在 [t0, t_end] 上取 n_samples 个等距样本"""
    if n_samples < 2:
        raise ValueError(f"样本数至少为2: {n_samples}")
    times = np.linspace(t0, t_end, n_samples)
    trajectory = solve_ivp(IvpProblem(rhs, y0, t0, t_end, rtol, atol), times)
    return [SampledSignal(times, trajectory.component(k), name) for k, name in enumerate(names)]


def pendulum_rhs(u: float, l: float, g: float) -> Rhs:
    """阻尼单摆 θ1' = θ2, θ2' = −u θ2 − (g/l) sin θ1"""
    def rhs(y: np.ndarray) -> np.ndarray:
        return np.array([y[1], -u * y[1] - (g / l) * np.sin(y[0])])
    return rhs


def generate_pendulum_data(
    u: float = 0.25,
    l: float = 2.0,
    g: float = 9.81,
    y0: Sequence[float] = (1.0, 0.0),
    t_end: float = 10.0,
    n_samples: int = 49,
) -> List[SampledSignal]:
    theta1, theta2 = sample_trajectory(
        pendulum_rhs(u, l, g), y0, 0.0, t_end, n_samples, ("theta1", "theta2")
    )
    logger.info(f"生成单摆数据: {n_samples} 个样本, t ∈ [0, {t_end}]")
    return [theta1, theta2]


def lotka_volterra_rhs(alpha: float, beta: float, gamma: float, delta: float) -> Rhs:
    """y0' = y0(α − β y1), y1' = −y1(γ − δ y0)"""
    def rhs(y: np.ndarray) -> np.ndarray:
        return np.array([y[0] * (alpha - beta * y[1]), -y[1] * (gamma - delta * y[0])])
    return rhs


def generate_lotka_volterra_data(
    alpha: float = 0.5475337,
    beta: float = 0.02811932,
    gamma: float = 0.843175,
    delta: float = 0.02655759,
    y0: Sequence[float] = (30.0, 4.0),
    t0: float = 1900.0,
    t_end: float = 1920.0,
    n_samples: int = 21,
) -> List[SampledSignal]:
    prey, predator = sample_trajectory(
        lotka_volterra_rhs(alpha, beta, gamma, delta), y0, t0, t_end, n_samples, ("hare", "lynx")
    )
    logger.info(f"生成捕食者-猎物数据: {n_samples} 个样本, t ∈ [{t0}, {t_end}]")
    return [prey, predator]


@dataclass
class VerificationReport:
    """模型验证结果：各分量RMS偏差和用于绘图的轨迹"""
    verdict: Verdict
    rms: Optional[List[float]] = None
    trajectory: Optional[Trajectory] = None
    names: List[str] = field(default_factory=list)
    message: str = ""

    @property
    def integrable(self) -> bool:
        return self.verdict is not Verdict.NOT_INTEGRABLE

    def model_values(self, k: int, times: np.ndarray) -> np.ndarray:
        """在轨迹输出点上取第 k 个分量"""
        index = np.searchsorted(self.trajectory.times, times)
        return self.trajectory.states[index, k]

    def summary(self) -> str:
        lines = [f"verdict: {self.verdict.value}"]
        if self.message:
            lines.append(f"message: {self.message}")
        for name, value in zip(self.names, self.rms or []):
            lines.append(f"RMS({name}) = {value!r}")
        return "\n".join(lines)


def verify(
    model: Callable[[np.ndarray], np.ndarray],
    data: Sequence[SampledSignal],
    rtol: float = 1e-9,
    atol: float = 1e-9,
    rms_tolerance: Optional[float] = None,
) -> VerificationReport:
    """从第一行数据出发积分模型，并与全部数据点比较"""
    t0 = data[0].t_min
    for signal in data[1:]:
        if abs(signal.t_min - t0) > 1e-12 * max(1.0, abs(t0)):
            raise DomainError(
                f"分量 {signal.name} 的起始时间 {signal.t_min} 与 {data[0].name} 的 {t0} 不同步"
            )
    names = [s.name for s in data]
    y0 = np.array([s.values[0] for s in data])
    t_end = max(s.t_max for s in data)
    times = np.unique(np.concatenate([s.times for s in data]))
    try:
        trajectory = solve_ivp(IvpProblem(model, y0, t0, t_end, rtol, atol), times)
    except IntegrationError as e:
        logger.warning(f"验证失败: {e}")
        return VerificationReport(Verdict.NOT_INTEGRABLE, names=names, message=str(e))

    report = VerificationReport(Verdict.UNCHECKED, trajectory=trajectory, names=names)
    report.rms = [
        float(np.sqrt(np.mean((report.model_values(k, s.times) - s.values) ** 2)))
        for k, s in enumerate(data)
    ]
    if rms_tolerance is not None:
        passed = all(value <= rms_tolerance for value in report.rms)
        report.verdict = Verdict.VERIFIED if passed else Verdict.NOT_VERIFIED
    logger.info(f"验证完成: verdict={report.verdict.value}, RMS={report.rms}")
    return report
