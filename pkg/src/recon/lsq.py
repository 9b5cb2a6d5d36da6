"""Gram方程组的组装与列主元QR最小二乘求解"""

import logging
from dataclasses import dataclass, field
from typing import List, Sequence

import numpy as np
from scipy import linalg

from .basis import MonomialBasis
from .chebapprox import ChebSeries, chebyshev_nodes
from .errors import DimensionError, DomainError, RankDeficiencyError

logger = logging.getLogger(__name__)

# |R_ii| < RANK_TOLERANCE * |R_11| 视为数值零
RANK_TOLERANCE = 1e-12

GRID_KINDS = ("equidistant", "chebyshev")


class PivotedQR:
    """A P = Q R 的瘦QR分解，分解一次，可对多个右端项复用"""

    def __init__(self, matrix: np.ndarray, rank_tolerance: float = RANK_TOLERANCE):
        matrix = np.asarray(matrix, dtype=float)
        if matrix.ndim != 2:
            raise DimensionError("系数矩阵必须是二维的")
        self.shape = matrix.shape
        self.q, self.r, self.permutation = linalg.qr(matrix, mode="economic", pivoting=True)
        diagonal = np.abs(np.diag(self.r))
        if diagonal.size == 0 or diagonal[0] == 0.0:
            self.rank = 0
        else:
            self.rank = int(np.count_nonzero(diagonal >= rank_tolerance * diagonal[0]))

    @property
    def full_rank(self) -> bool:
        rows, columns = self.shape
        return rows >= columns and self.rank == columns

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        """c = P R̃⁻¹ Q̃ᵀ b；rhs 可以是向量或按列排列的多个右端项"""
        if not self.full_rank:
            raise RankDeficiencyError(self.rank, self.shape[1])
        rhs = np.asarray(rhs, dtype=float)
        z = linalg.solve_triangular(self.r, self.q.T @ rhs)
        solution = np.empty_like(z)
        solution[self.permutation] = z
        return solution

    def inverse_gram(self) -> np.ndarray:
        """(AᵀA)⁻¹ = P R⁻¹ R⁻ᵀ Pᵀ"""
        if not self.full_rank:
            raise RankDeficiencyError(self.rank, self.shape[1])
        r_inv = linalg.solve_triangular(self.r, np.eye(self.shape[1]))
        inner = r_inv @ r_inv.T
        result = np.empty_like(inner)
        result[np.ix_(self.permutation, self.permutation)] = inner
        return result


@dataclass(frozen=True)
class GramSystem:
    """Gram矩阵 A 及各分量右端项 b^(k)（按列存放）"""
    matrix: np.ndarray
    rhs: np.ndarray
    sample_times: np.ndarray
    basis: MonomialBasis
    names: List[str] = field(default_factory=list)

    @property
    def rows(self) -> int:
        return int(self.matrix.shape[0])

    @property
    def columns(self) -> int:
        return int(self.matrix.shape[1])


@dataclass(frozen=True)
class LsqSolution:
    """每个分量的系数向量 c^(k) 与缩放残差 ‖A c − b‖₂/√m"""
    coeffs: np.ndarray
    scaled_residuals: np.ndarray
    rank: int


def solve_grid(t_min: float, t_max: float, m: int, kind: str = "equidistant") -> np.ndarray:
    """Gram方程组的采样时间点，默认等距并包含两个端点"""
    if m < 2:
        raise ValueError(f"采样点数至少为2: {m}")
    if kind == "equidistant":
        return np.linspace(t_min, t_max, m)
    if kind == "chebyshev":
        return np.sort(chebyshev_nodes(m, t_min, t_max))
    raise ValueError(f"未知的采样网格类型: {kind}，可选 {GRID_KINDS}")


def assemble(
    series: Sequence[ChebSeries],
    basis: MonomialBasis,
    m: int,
    grid: str = "equidistant",
) -> GramSystem:
    """在 m 个时间点上计算 A_{jℓ} = φ_ℓ(y*(t_j)) 和 b_j^(k) = (y_k*)'(t_j)"""
    if len(series) != basis.n:
        raise DimensionError(f"分量个数 {len(series)} 与基函数维数 {basis.n} 不符")
    t_min, t_max = series[0].domain
    for s in series[1:]:
        if not np.allclose(s.domain, (t_min, t_max), rtol=1e-12, atol=0.0):
            raise DomainError(
                f"分量 {s.name} 的定义域 {s.domain} 与 {series[0].name} 的 {(t_min, t_max)} 不一致"
            )
    times = solve_grid(t_min, t_max, m, grid)
    states = np.column_stack([s.evaluate(times) for s in series])
    rhs = np.column_stack([s.derivative().evaluate(times) for s in series])
    matrix = basis.design_matrix(states)
    logger.info(f"组装Gram矩阵: {matrix.shape[0]}x{matrix.shape[1]}, 分量数 {len(series)}")
    return GramSystem(matrix, rhs, times, basis, [s.name for s in series])


def solve(system: GramSystem) -> LsqSolution:
    """列主元QR最小二乘；秩亏时拒绝求解"""
    qr = PivotedQR(system.matrix)
    if qr.rank < system.columns or system.rows < system.columns:
        raise RankDeficiencyError(qr.rank, system.columns)
    coeffs = qr.solve(system.rhs)
    residuals = system.matrix @ coeffs - system.rhs
    scaled = np.linalg.norm(residuals, axis=0) / np.sqrt(system.rows)
    for name, value in zip(system.names or range(len(scaled)), scaled):
        logger.info(f"分量 {name}: ||residual/sqrt(m)||_2 = {value:.6g}")
    return LsqSolution(coeffs.T.copy(), scaled, qr.rank)
