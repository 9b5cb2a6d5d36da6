"""误差导向的阻尼Gauss-Newton系数精化

以重构模型的活跃系数为自由参数，初值取自数据第一行且保持固定，
使模型轨迹在全部数据点上与数据的偏差在最小二乘意义下最小。
这是简化实现：保留阻尼和列主元QR，不含秩1更新与降秩策略。
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, Field, model_validator
from scipy import stats

from .chebapprox import SampledSignal
from .errors import ConvergenceError, DimensionError, DomainError, IntegrationError, RankDeficiencyError
from .integrate import IvpProblem, solve_ivp
from .lsq import PivotedQR
from .model import RecoveredModel

logger = logging.getLogger(__name__)

# 有限差分步长的绝对下限
FD_FLOOR = 1e-8
# 相对修正范数中参数尺度的下限
SCALE_FLOOR = 1e-8
CONFIDENCE_LEVEL = 0.95

Residual = Callable[[np.ndarray], np.ndarray]


class GnConfig(BaseModel):
    """Gauss-Newton参数"""
    ptol: float = Field(default=1e-3, gt=0, description="要求的相对精度 PTOL")
    max_iter: int = Field(default=40, ge=1, description="最大迭代步数")
    fc_start: float = Field(default=0.01, gt=0, le=1, description="初始阻尼因子 FCSTART")
    fc_min: float = Field(default=0.01, gt=0, le=1, description="最小阻尼因子 FCMIN")
    fd_step: float = Field(default=1e-6, gt=0, description="有限差分相对步长")

    @model_validator(mode="after")
    def check_damping(self) -> "GnConfig":
        if self.fc_min > self.fc_start:
            raise ValueError(f"需要 fc_min <= fc_start，当前 {self.fc_min} > {self.fc_start}")
        return self


@dataclass(frozen=True)
class IterationRecord:
    """一次迭代: 迭代前的缩放残差、相对修正范数和采用的阻尼因子"""
    iteration: int
    normf: float
    normx: float
    damping: float


@dataclass
class Statistics:
    """参数的标准差和独立置信区间"""
    available: bool
    sigma: Optional[np.ndarray] = None
    percent: Optional[np.ndarray] = None
    intervals: Optional[np.ndarray] = None
    dof: int = 0
    quantile: float = 0.0
    reason: str = ""


@dataclass
class GnResult:
    """精化结果"""
    coeffs: np.ndarray
    iterations: List[IterationRecord] = field(default_factory=list)
    kappa: Optional[float] = None
    normf: float = math.nan
    converged: bool = False
    failure_reason: Optional[str] = None
    statistics: Optional[Statistics] = None
    rows: int = 0
    model: Optional[RecoveredModel] = None

    @property
    def sigma(self) -> Optional[np.ndarray]:
        return self.statistics.sigma if self.statistics else None

    @property
    def conf_intervals(self) -> Optional[np.ndarray]:
        return self.statistics.intervals if self.statistics else None

    def raise_for_failure(self) -> None:
        """未收敛时抛出 ConvergenceError"""
        if not self.converged:
            raise ConvergenceError(self.failure_reason or "未收敛")


class FitProblem:
    """以模型活跃系数为参数、对原始数据的拟合问题"""

    def __init__(
        self,
        model: RecoveredModel,
        data: Sequence[SampledSignal],
        rtol: float = 1e-9,
        atol: float = 1e-9,
    ):
        if len(data) != model.n:
            raise DimensionError(f"数据分量数 {len(data)} 与模型维数 {model.n} 不符")
        if not model.active.any():
            raise ValueError("模型没有活跃项，无可拟合的参数")
        t0 = data[0].t_min
        for signal in data[1:]:
            if abs(signal.t_min - t0) > 1e-12 * max(1.0, abs(t0)):
                raise DomainError(f"分量 {signal.name} 的起始时间与 {data[0].name} 不同步")
        self.model = model
        self.data = list(data)
        self.rtol = rtol
        self.atol = atol
        self.t0 = t0
        self.t_end = max(s.t_max for s in data)
        self.y0 = np.array([s.values[0] for s in data])
        self.times = np.unique(np.concatenate([s.times for s in data]))
        self._observed = np.concatenate([s.values for s in data])
        self._index = [np.searchsorted(self.times, s.times) for s in data]
        if self.rows < self.parameter_count:
            logger.warning(f"数据个数 {self.rows} 少于参数个数 {self.parameter_count}")

    @property
    def rows(self) -> int:
        return int(self._observed.size)

    @property
    def parameter_count(self) -> int:
        return int(self.model.active.sum())

    def initial_parameters(self) -> np.ndarray:
        return self.model.parameters()

    def trajectory_values(self, params: np.ndarray) -> np.ndarray:
        """各分量在其数据时间点上的模型值，按分量拼接"""
        candidate = self.model.with_parameters(params)
        trajectory = solve_ivp(
            IvpProblem(candidate.rhs_eval, self.y0, self.t0, self.t_end, self.rtol, self.atol),
            self.times,
        )
        return np.concatenate(
            [trajectory.states[index, k] for k, index in enumerate(self._index)]
        )

    def residual(self, params: Sequence[float]) -> np.ndarray:
        """y♭(t_j; p) − y_{k,j}；积分失败时抛出 IntegrationError"""
        params = np.asarray(params, dtype=float)
        if not np.all(np.isfinite(params)):
            raise ValueError("参数含有非有限值")
        return self.trajectory_values(params) - self._observed


def scaled_norm(r: np.ndarray) -> float:
    """Normf 约定: ‖r‖₂/√(行数)"""
    return float(np.linalg.norm(r) / math.sqrt(r.size))


def _relative_norm(dx: np.ndarray, params: np.ndarray) -> float:
    scale = np.maximum(np.abs(params), SCALE_FLOOR)
    return float(np.sqrt(np.mean((dx / scale) ** 2)))


def jacobian(residual: Residual, params: np.ndarray, r0: np.ndarray, fd_step: float) -> np.ndarray:
    """前向差分Jacobian，第j列步长 max(fd_step·|p_j|, 1e-8)"""
    columns = []
    for j in range(params.size):
        h = max(fd_step * abs(params[j]), FD_FLOOR)
        shifted = params.copy()
        shifted[j] += h
        columns.append((residual(shifted) - r0) / h)
    return np.column_stack(columns)


def statistics(jac: np.ndarray, r: np.ndarray, params: np.ndarray) -> Statistics:
    """协方差 s²(JᵀJ)⁻¹，s² = ‖r‖²/(行数 − 参数数)；95% 区间使用t分布分位数"""
    rows, count = jac.shape
    dof = rows - count
    if dof <= 0:
        return Statistics(False, reason=f"自由度不足: 行数 {rows}, 参数 {count}")
    qr = PivotedQR(jac)
    if not qr.full_rank:
        return Statistics(False, reason=f"Jacobian秩亏: 秩 {qr.rank} < {count}")
    s2 = float(r @ r) / dof
    sigma = np.sqrt(np.maximum(np.diag(qr.inverse_gram()) * s2, 0.0))
    quantile = float(stats.t.ppf(0.5 + CONFIDENCE_LEVEL / 2, dof))
    with np.errstate(divide="ignore", invalid="ignore"):
        percent = np.where(params != 0.0, 100.0 * sigma / np.abs(params), np.inf)
    intervals = np.column_stack((params - quantile * sigma, params + quantile * sigma))
    return Statistics(True, sigma, percent, intervals, dof, quantile)


def gauss_newton(residual: Residual, p0: Sequence[float], config: GnConfig) -> GnResult:
    """阻尼Gauss-Newton迭代

    修正量 Δ 由 J Δ = −r 的列主元QR最小二乘解给出。试探步 p + λΔ 只有在缩放残差
    严格下降时才被接受，否则 λ 减半，低于 fc_min 即失败。下一步的 λ 由简化修正量
    Δ̄ = −J⁺ r(p + λΔ) 做后验估计。相对修正范数小于 ptol 时收敛，
    最后的完整修正只在缩放残差不增大时采用。
    """
    params = np.array(p0, dtype=float)
    result = GnResult(coeffs=params.copy())
    try:
        r = residual(params)
    except (IntegrationError, ValueError) as e:
        result.failure_reason = f"初始参数处残差不可计算: {e}"
        return result
    result.rows = int(r.size)
    normf = scaled_norm(r)
    result.normf = normf
    damping = config.fc_start
    corrections: List[float] = []

    for iteration in range(config.max_iter):
        try:
            jac = jacobian(residual, params, r, config.fd_step)
            qr = PivotedQR(jac)
            dx = qr.solve(-r)
        except IntegrationError as e:
            result.failure_reason = f"Jacobian计算时积分失败: {e}"
            break
        except RankDeficiencyError as e:
            result.failure_reason = str(e)
            break
        normx = _relative_norm(dx, params)
        corrections.append(normx)

        if normx <= config.ptol:
            result.iterations.append(IterationRecord(iteration, normf, normx, 1.0))
            try:
                r_final = residual(params + dx)
                if scaled_norm(r_final) <= normf:
                    params = params + dx
                    r = r_final
            except (IntegrationError, ValueError):
                pass
            normf = scaled_norm(r)
            result.converged = True
            logger.info(f"Gauss-Newton 在第 {iteration} 步收敛: Normf={normf:.7g}, Normx={normx:.3g}")
            break

        accepted = False
        last_failure = ""
        while damping >= config.fc_min:
            trial = params + damping * dx
            try:
                r_trial = residual(trial)
            except (IntegrationError, ValueError) as e:
                last_failure = f"model not integrable along the Newton path: {e}"
                damping *= 0.5
                continue
            normf_trial = scaled_norm(r_trial)
            if normf_trial < normf:
                accepted = True
                break
            last_failure = "残差未下降"
            damping *= 0.5
        if not accepted:
            result.failure_reason = f"阻尼因子低于 FCMIN={config.fc_min}: {last_failure}"
            break

        result.iterations.append(IterationRecord(iteration, normf, normx, damping))
        logger.info(
            f"GN 迭代 {iteration}: Normf={normf:.7g} -> {normf_trial:.7g}, "
            f"Normx={normx:.3g}, λ={damping:.3f}"
        )
        simplified = qr.solve(-r_trial)
        deviation = np.linalg.norm(simplified - (1.0 - damping) * dx)
        mu = math.inf if deviation == 0.0 else 0.5 * np.linalg.norm(dx) * damping ** 2 / deviation
        params, r, normf = trial, r_trial, normf_trial
        damping = min(1.0, max(mu, config.fc_min))
    else:
        result.failure_reason = f"超过最大迭代步数 {config.max_iter}"

    result.coeffs = params
    result.normf = normf
    if len(corrections) >= 2:
        previous = corrections[-2]
        result.kappa = corrections[-1] / previous if previous > 0 else 0.0
    elif result.converged:
        result.kappa = 0.0
    if result.converged:
        if result.kappa is not None and result.kappa >= 1.0:
            logger.warning(f"不相容因子 kappa={result.kappa:.3g} >= 1，模型与数据可能不相容")
        try:
            jac = jacobian(residual, params, r, config.fd_step)
            result.statistics = statistics(jac, r, params)
        except IntegrationError as e:
            result.statistics = Statistics(False, reason=f"统计量计算时积分失败: {e}")
    else:
        logger.warning(f"Gauss-Newton 未收敛: {result.failure_reason}")
    return result


def residual(problem: FitProblem, params: Sequence[float]) -> np.ndarray:
    return problem.residual(params)


def refine(problem: FitProblem, config: Optional[GnConfig] = None) -> GnResult:
    """以阈值化模型的活跃系数为初值进行精化，返回结果及精化后的模型"""
    config = config or GnConfig()
    logger.info(
        f"开始 Gauss-Newton 精化: 参数 {problem.parameter_count} 个, 数据 {problem.rows} 个"
    )
    result = gauss_newton(problem.residual, problem.initial_parameters(), config)
    result.rows = problem.rows
    result.model = problem.model.with_parameters(result.coeffs)
    return result


def _fortran(value: float, digits: int) -> str:
    """0.8345461D+01 形式的数字"""
    if value == 0.0 or not math.isfinite(value):
        return f"{0.0 if value == 0.0 else value:.{digits}f}D+00"
    exponent = math.floor(math.log10(abs(value))) + 1
    mantissa = round(value / 10.0 ** exponent, digits)
    if abs(mantissa) >= 1.0:
        mantissa /= 10.0
        exponent += 1
    return f"{mantissa:.{digits}f}D{exponent:+03d}"


def format_report(result: GnResult, config: GnConfig, parameter_count: int) -> str:
    """迭代表和统计块"""
    lines = [
        " Damped Gauss-Newton refinement of recovered coefficients",
        "",
        f" Number of parameters to be estimated (N) : {parameter_count:4d}",
        f" Number of data to fitted (MFIT) : {result.rows:4d}",
        f" Prescribed relative precision (PTOL) : {_fortran(config.ptol, 2)}",
        f" Maximum permitted number of iteration steps : {config.max_iter:5d}",
        f" Starting value for damping factor FCSTART = {_fortran(config.fc_start, 2)}",
        f" Minimum allowed damping factor FCMIN = {_fortran(config.fc_min, 2)}",
        "",
        "*" * 71,
        "",
        "    It       Normf               Normx       Damp.Fct.",
    ]
    for record in result.iterations:
        lines.append(
            f"  {record.iteration:4d}      {_fortran(record.normf, 7)}       "
            f"{_fortran(record.normx, 3)}      {record.damping:.3f}"
        )
    lines.append("")
    if result.converged:
        lines.append(" Solution of nonlinear least squares problem obtained")
        lines.append(f" within {len(result.iterations):3d} iteration steps")
        lines.append("")
        lines.append(f" Final scaled residual Normf {_fortran(result.normf, 7)}")
        if result.kappa is not None:
            lines.append(f" Incompatibility factor kappa {_fortran(result.kappa, 3)}")
    else:
        lines.append(f" Iteration failed: {result.failure_reason}")
        lines.append(f" Last accepted scaled residual Normf {_fortran(result.normf, 7)}")
    stats_block = result.statistics
    if stats_block is not None and stats_block.available:
        lines += [
            "",
            "   Standard deviation of parameters",
            "   --------------------------------",
            "     No.  Estimate           sigma(X)",
        ]
        for i, (p, s, pct) in enumerate(zip(result.coeffs, stats_block.sigma, stats_block.percent), 1):
            lines.append(
                f"   {i:4d}  {_fortran(p, 3):>10}   +/-   {_fortran(s, 3)}     = {pct:7.2f} %"
            )
        lines += [
            "",
            "   Independent confidence intervals",
            "   --------------------------------",
            f"   (on {100 * CONFIDENCE_LEVEL:.0f}%-probability level, t-quantile {stats_block.quantile:.4f})",
            "",
        ]
        for i, (low, high) in enumerate(stats_block.intervals, 1):
            lines.append(f"   {i:4d}  ( {_fortran(low, 3):>10} , {_fortran(high, 3):>10} )")
    elif stats_block is not None:
        lines += ["", f"   Statistics unavailable: {stats_block.reason}"]
    return "\n".join(lines)


def result_to_dict(result: GnResult) -> dict:
    """机器可读的结果副本"""
    stats_block = result.statistics
    return {
        "converged": result.converged,
        "failure_reason": result.failure_reason,
        "normf": result.normf,
        "kappa": result.kappa,
        "rows": result.rows,
        "coeffs": np.asarray(result.coeffs).tolist(),
        "iterations": [
            {"it": r.iteration, "normf": r.normf, "normx": r.normx, "damping": r.damping}
            for r in result.iterations
        ],
        "statistics": None if stats_block is None or not stats_block.available else {
            "dof": stats_block.dof,
            "t_quantile": stats_block.quantile,
            "sigma": stats_block.sigma.tolist(),
            "percent": stats_block.percent.tolist(),
            "intervals": stats_block.intervals.tolist(),
        },
    }


def parameter_labels(model: RecoveredModel) -> List[Tuple[str, str]]:
    """(分量名, 多重指标) 对，与参数向量顺序一致"""
    return [
        (model.component_names[k], str(model.basis.indices[j])) for k, j in model.parameter_slots
    ]
