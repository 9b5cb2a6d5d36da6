"""多元单项式拟设函数族

φ_ℓ(y) = y_1^{ℓ_1} · … · y_n^{ℓ_n}，总次数 |ℓ| ≤ d。

多重指标有两种表示：通常的指数列表 [ℓ_1, …, ℓ_n]，以及运行协议第一列里的
"隔板"组合编码 (c_1, …, c_n)，满足 ℓ_1 = c_1, ℓ_i = c_i − c_{i−1} − 1。
组合编码和协议头 "#total" 的含义都是从协议输出反推出来的。
"""

import itertools
from dataclasses import dataclass
from functools import cached_property
from typing import List, Sequence, Tuple

import numpy as np
from scipy.special import comb

from .errors import DimensionError


@dataclass(frozen=True, order=True)
class MultiIndex:
    """多重指标 ℓ = (ℓ_1, …, ℓ_n)"""
    exponents: Tuple[int, ...]

    def __post_init__(self):
        exponents = tuple(int(e) for e in self.exponents)
        if any(e < 0 for e in exponents):
            raise ValueError(f"指数必须非负: {exponents}")
        object.__setattr__(self, "exponents", exponents)

    @classmethod
    def from_encoding(cls, codes: Sequence[int]) -> "MultiIndex":
        """由组合编码恢复指数列表"""
        codes = [int(c) for c in codes]
        if any(b <= a for a, b in zip(codes, codes[1:])):
            raise ValueError(f"组合编码必须严格递增: {codes}")
        exponents = [codes[0]] + [b - a - 1 for a, b in zip(codes, codes[1:])]
        return cls(tuple(exponents))

    @property
    def dimension(self) -> int:
        return len(self.exponents)

    @property
    def degree(self) -> int:
        return sum(self.exponents)

    def combination_encoding(self) -> List[int]:
        codes = []
        position = -1
        for exponent in self.exponents:
            position += exponent + 1
            codes.append(position)
        return codes

    def eval(self, y: Sequence[float]) -> float:
        """计算 Π y_i^{ℓ_i}，约定 0^0 = 1"""
        y = np.asarray(y, dtype=float)
        if y.shape != (self.dimension,):
            raise DimensionError(f"状态维数 {y.shape} 与多重指标维数 {self.dimension} 不符")
        return float(np.prod(y ** np.array(self.exponents)))

    def label(self, variable: str = "y") -> str:
        """方程字符串里的单项式，例如 'y0^1 y1^1'；常数项为空串"""
        return " ".join(
            f"{variable}{i}^{e}" for i, e in enumerate(self.exponents) if e > 0
        )

    def __add__(self, other: "MultiIndex") -> "MultiIndex":
        if self.dimension != other.dimension:
            raise DimensionError("多重指标维数不一致")
        return MultiIndex(tuple(a + b for a, b in zip(self.exponents, other.exponents)))

    def __str__(self) -> str:
        return "[" + ", ".join(str(e) for e in self.exponents) + "]"


@dataclass(frozen=True)
class MonomialBasis:
    """总次数不超过 max_degree 的 n 元单项式族"""
    n: int
    max_degree: int
    include_constant: bool = True

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"状态维数必须为正: {self.n}")
        if self.max_degree < 0:
            raise ValueError(f"最高次数不能为负: {self.max_degree}")
        if not self.include_constant and self.max_degree == 0:
            raise ValueError("去掉常数项后 0 次单项式族为空")

    @cached_property
    def indices(self) -> Tuple[MultiIndex, ...]:
        # 组合编码按字典序递增，与运行协议的行顺序一致
        result = []
        for codes in itertools.combinations(range(self.n + self.max_degree), self.n):
            index = MultiIndex.from_encoding(codes)
            if index.degree == 0 and not self.include_constant:
                continue
            result.append(index)
        return tuple(result)

    def enumerate(self) -> List[MultiIndex]:
        return list(self.indices)

    @property
    def size(self) -> int:
        return int(comb(self.n + self.max_degree, self.max_degree, exact=True)) - (
            0 if self.include_constant else 1
        )

    @property
    def total_count(self) -> int:
        """张量积个数 (d+1)^n，仅用于协议头信息"""
        return (self.max_degree + 1) ** self.n

    @cached_property
    def exponent_matrix(self) -> np.ndarray:
        matrix = np.array([idx.exponents for idx in self.indices], dtype=float)
        matrix.setflags(write=False)
        return matrix

    def design_matrix(self, states: np.ndarray) -> np.ndarray:
        """对 (m, n) 状态矩阵的每一行求出全部单项式值，得到 (m, L') 矩阵"""
        states = np.atleast_2d(np.asarray(states, dtype=float))
        if states.shape[1] != self.n:
            raise DimensionError(f"状态维数 {states.shape[1]} 与基函数维数 {self.n} 不符")
        return np.prod(states[:, None, :] ** self.exponent_matrix[None, :, :], axis=2)

    def variables(self, variable: str = "y") -> str:
        return ",".join(f"{variable}{i}" for i in range(self.n))


def enumerate_basis(basis: MonomialBasis) -> List[MultiIndex]:
    return basis.enumerate()


def eval_monomial(index: MultiIndex, y: Sequence[float]) -> float:
    return index.eval(y)


def combination_encoding(index: MultiIndex) -> List[int]:
    return index.combination_encoding()
