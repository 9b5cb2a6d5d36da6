"""由最小二乘系数得到阈值化的显式右端模型，并生成运行协议文本"""

import logging
from dataclasses import dataclass, field, replace
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from .basis import MonomialBasis
from .errors import DimensionError
from .lsq import GramSystem, LsqSolution, PivotedQR

logger = logging.getLogger(__name__)

# 方程行每行最多的单项式个数
TERMS_PER_LINE = 3


def coefficient_percentages(coeffs: np.ndarray) -> np.ndarray:
    """每个系数相对于本分量最大绝对系数的百分比；全零分量记为0"""
    coeffs = np.atleast_2d(np.asarray(coeffs, dtype=float))
    peak = np.max(np.abs(coeffs), axis=1, keepdims=True)
    with np.errstate(divide="ignore", invalid="ignore"):
        percentages = np.where(peak > 0.0, 100.0 * np.abs(coeffs) / peak, 0.0)
    return percentages


@dataclass(frozen=True)
class RecoveredModel:
    """阈值化后的多项式右端 y' = Σ c_ℓ φ_ℓ(y)"""
    basis: MonomialBasis
    coeffs: np.ndarray
    threshold_pct: float
    active: np.ndarray
    domain: Tuple[float, float]
    component_names: List[str] = field(default_factory=list)

    def __post_init__(self):
        coeffs = np.array(self.coeffs, dtype=float)
        active = np.array(self.active, dtype=bool)
        if coeffs.shape != (self.basis.n, self.basis.size) or active.shape != coeffs.shape:
            raise DimensionError(
                f"系数矩阵形状 {coeffs.shape} 与基函数 ({self.basis.n}, {self.basis.size}) 不符"
            )
        coeffs.setflags(write=False)
        active.setflags(write=False)
        object.__setattr__(self, "coeffs", coeffs)
        object.__setattr__(self, "active", active)
        object.__setattr__(self, "domain", (float(self.domain[0]), float(self.domain[1])))
        if not self.component_names:
            object.__setattr__(self, "component_names", [f"y{k}" for k in range(self.basis.n)])

    @property
    def n(self) -> int:
        return self.basis.n

    @property
    def effective_coeffs(self) -> np.ndarray:
        return np.where(self.active, self.coeffs, 0.0)

    @property
    def percentages(self) -> np.ndarray:
        return coefficient_percentages(self.coeffs)

    def rhs_eval(self, y: Sequence[float]) -> np.ndarray:
        """只用活跃项计算右端向量"""
        y = np.asarray(y, dtype=float)
        if y.shape != (self.n,):
            raise DimensionError(f"状态维数 {y.shape} 与模型维数 {self.n} 不符")
        if not np.all(np.isfinite(y)):
            raise ValueError(f"状态含有非有限值: {y}")
        phi = np.prod(y[None, :] ** self.basis.exponent_matrix, axis=1)
        return self.effective_coeffs @ phi

    __call__ = rhs_eval

    # Gauss-Newton 的自由参数：按分量、再按枚举顺序排列的活跃系数
    @property
    def parameter_slots(self) -> List[Tuple[int, int]]:
        return [tuple(int(i) for i in slot) for slot in np.argwhere(self.active)]

    def parameters(self) -> np.ndarray:
        return self.coeffs[self.active].copy()

    def with_parameters(self, params: Sequence[float]) -> "RecoveredModel":
        params = np.asarray(params, dtype=float)
        slots = self.parameter_slots
        if params.shape != (len(slots),):
            raise DimensionError(f"参数个数 {params.shape} 与活跃项个数 {len(slots)} 不符")
        coeffs = np.array(self.coeffs)
        coeffs[self.active] = params
        return replace(self, coeffs=coeffs)

    def equation(self, component: int) -> str:
        """方程行，系数格式与运行协议一致"""
        head = f"f({self.basis.variables()}) = "
        terms = [
            f"+ ({self.coeffs[component, j]:8.1e})" + (f" {idx.label()}" if idx.degree else "")
            for j, idx in enumerate(self.basis.indices)
            if self.active[component, j]
        ]
        if not terms:
            return head + "0"
        lines = [
            " ".join(terms[i:i + TERMS_PER_LINE]) for i in range(0, len(terms), TERMS_PER_LINE)
        ]
        return head + ("\n" + " " * len(head)).join(lines)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "basis": {
                "n": self.basis.n,
                "max_degree": self.basis.max_degree,
                "include_constant": self.basis.include_constant,
            },
            "threshold_pct": float(self.threshold_pct),
            "domain": [self.domain[0], self.domain[1]],
            "component_names": list(self.component_names),
            "terms": [str(idx) for idx in self.basis.indices],
            "coeffs": self.coeffs.tolist(),
            "active": self.active.tolist(),
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "RecoveredModel":
        basis = MonomialBasis(
            int(data["basis"]["n"]),
            int(data["basis"]["max_degree"]),
            bool(data["basis"]["include_constant"]),
        )
        return cls(
            basis=basis,
            coeffs=np.array(data["coeffs"], dtype=float),
            threshold_pct=float(data["threshold_pct"]),
            active=np.array(data["active"], dtype=bool),
            domain=tuple(data["domain"]),
            component_names=list(data.get("component_names") or []),
        )


def threshold(
    solution: LsqSolution,
    basis: MonomialBasis,
    pct: float,
    domain: Tuple[float, float] = (0.0, 1.0),
    component_names: Optional[List[str]] = None,
) -> RecoveredModel:
    """保留百分比不低于 pct 的项，系数原样保留，不重新拟合"""
    if not 0.0 <= pct <= 100.0:
        raise ValueError(f"阈值百分比必须在 [0, 100] 内: {pct}")
    coeffs = np.atleast_2d(solution.coeffs)
    peak = np.max(np.abs(coeffs), axis=1, keepdims=True)
    active = (coefficient_percentages(coeffs) >= pct) & (peak > 0.0)
    logger.info(f"阈值 {pct}%: 各分量保留项数 {active.sum(axis=1).tolist()}")
    return RecoveredModel(basis, coeffs, pct, active, domain, list(component_names or []))


def refit(system: GramSystem, model: RecoveredModel) -> RecoveredModel:
    """只在活跃列上重新做最小二乘，活跃集合保持不变"""
    coeffs = np.zeros_like(model.coeffs)
    for k in range(model.n):
        columns = np.flatnonzero(model.active[k])
        if columns.size == 0:
            continue
        qr = PivotedQR(system.matrix[:, columns])
        coeffs[k, columns] = qr.solve(system.rhs[:, k])
    logger.info("阈值化后在活跃项上重新拟合完成")
    return replace(model, coeffs=coeffs)


def rhs_eval(model: RecoveredModel, y: Sequence[float]) -> np.ndarray:
    return model.rhs_eval(y)


def format_protocol(solution: LsqSolution, model: RecoveredModel, component: int) -> str:
    """生成单个分量的运行协议

    每行依次为组合编码、指数列表、百分比和系数值；之后是单项式个数与阈值、
    方程行和缩放残差行。
    """
    if not 0 <= component < model.n:
        raise IndexError(f"分量编号 {component} 超出范围 [0, {model.n})")
    basis = model.basis
    percentages = model.percentages[component]
    lines = [f"#total = {basis.total_count}   (max. deg. {basis.max_degree})"]
    for j, idx in enumerate(basis.indices):
        codes = " ".join(str(c) for c in idx.combination_encoding())
        lines.append(
            f" [ {codes} ] --> {idx}{percentages[j]:9.2f}   {model.coeffs[component, j]: .6e}"
        )
    lines.append(f"m = {basis.size:2d} monomial(s) {model.threshold_pct:9.2f}")
    lines.append(model.equation(component))
    residual = float(solution.scaled_residuals[component])
    lines.append(f"LSQ: ||residual/sqrt(n)||_2 = {residual!r}")
    return "\n".join(lines)
