"""单项式族: 枚举顺序、计数、组合编码和求值"""

from __future__ import annotations

import itertools
import math

import numpy as np
import pytest

from src.recon.basis import MonomialBasis, MultiIndex, combination_encoding, eval_monomial
from src.recon.errors import DimensionError


def _exponents(basis):
    return [list(idx.exponents) for idx in basis.enumerate()]


# ======================================================================
# Enumeration
# ======================================================================

class TestEnumerate:
    """运行协议的行顺序"""

    def test_two_components_degree_three_without_constant(self):
        basis = MonomialBasis(2, 3, include_constant=False)
        assert _exponents(basis) == [
            [0, 1], [0, 2], [0, 3], [1, 0], [1, 1], [1, 2], [2, 0], [2, 1], [3, 0],
        ]

    def test_two_components_degree_four(self):
        basis = MonomialBasis(2, 4)
        exponents = _exponents(basis)
        assert len(exponents) == 15
        assert exponents[:2] == [[0, 0], [0, 1]]
        assert exponents[-1] == [4, 0]

    def test_degree_zero(self):
        assert _exponents(MonomialBasis(3, 0)) == [[0, 0, 0]]

    @pytest.mark.parametrize("n, d", [(1, 0), (1, 5), (2, 2), (3, 3), (4, 6), (2, 6)])
    def test_count_matches_brute_force(self, n, d):
        expected = {
            e for e in itertools.product(range(d + 1), repeat=n) if sum(e) <= d
        }
        basis = MonomialBasis(n, d)
        found = [idx.exponents for idx in basis.enumerate()]
        assert len(found) == len(set(found)) == basis.size == math.comb(n + d, d)
        assert set(found) == expected

    def test_total_count(self):
        assert MonomialBasis(2, 3).total_count == 16

    def test_empty_family_rejected(self):
        with pytest.raises(ValueError):
            MonomialBasis(2, 0, include_constant=False)


# ======================================================================
# Combination encoding
# ======================================================================

class TestCombinationEncoding:

    @pytest.mark.parametrize("exponents, codes", [
        ((1, 1), [1, 3]),
        ((3, 0), [3, 4]),
        ((0, 0), [0, 1]),
        ((0, 4), [0, 5]),
    ])
    def test_examples(self, exponents, codes):
        assert combination_encoding(MultiIndex(exponents)) == codes

    def test_injective_and_invertible(self):
        basis = MonomialBasis(3, 4)
        codes = [tuple(idx.combination_encoding()) for idx in basis.indices]
        assert len(set(codes)) == len(codes)
        for idx, code in zip(basis.indices, codes):
            assert MultiIndex.from_encoding(code) == idx
            assert max(code) < basis.n + basis.max_degree

    def test_encodings_increase_along_enumeration(self):
        codes = [idx.combination_encoding() for idx in MonomialBasis(2, 4).indices]
        assert codes == sorted(codes)


# ======================================================================
# Evaluation
# ======================================================================

class TestEvalMonomial:

    def test_zero_power_of_zero_is_one(self):
        assert eval_monomial(MultiIndex((0, 0)), [0.0, 0.0]) == 1.0

    def test_product(self):
        assert eval_monomial(MultiIndex((2, 1)), [3.0, 2.0]) == 18.0

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionError):
            eval_monomial(MultiIndex((1, 1)), [1.0, 2.0, 3.0])

    def test_multiplicativity(self):
        rng = np.random.default_rng(3)
        y = rng.uniform(-2.0, 2.0, 3)
        for _ in range(10):
            a = MultiIndex(tuple(rng.integers(0, 3, 3)))
            b = MultiIndex(tuple(rng.integers(0, 3, 3)))
            assert eval_monomial(a + b, y) == pytest.approx(eval_monomial(a, y) * eval_monomial(b, y))

    def test_design_matrix_matches_eval(self):
        basis = MonomialBasis(2, 3)
        states = np.array([[0.5, -1.5], [2.0, 0.0], [-0.3, 0.7]])
        matrix = basis.design_matrix(states)
        assert matrix.shape == (3, basis.size)
        for i, y in enumerate(states):
            expected = [idx.eval(y) for idx in basis.indices]
            np.testing.assert_allclose(matrix[i], expected)

    def test_label(self):
        assert MultiIndex((3, 1)).label() == "y0^3 y1^1"
        assert MultiIndex((0, 0)).label() == ""
