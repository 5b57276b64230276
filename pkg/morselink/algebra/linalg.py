"""
精确线性代数

基于 sympy 的 DomainMatrix：域上用 rref，整数环上用 Smith 标准形求解。
矩阵统一用 Python 列表的列表表示（行优先），元素为环的规范代表元。
"""

import logging
from typing import List, Optional, Sequence, Tuple

from sympy.polys.matrices import DomainMatrix
from sympy.polys.matrices.normalforms import smith_normal_decomp

from .ring import Coefficient, CoefficientRing

logger = logging.getLogger(__name__)

Matrix = List[List[Coefficient]]


def zeros(rows: int, cols: int) -> Matrix:
    return [[0] * cols for _ in range(rows)]


def to_domain_matrix(rows: Sequence[Sequence[Coefficient]], ncols: int, ring: CoefficientRing) -> DomainMatrix:
    """转换为 DomainMatrix（调用方保证非空）"""
    data = [[ring.to_domain(value) for value in row] for row in rows]
    return DomainMatrix(data, (len(rows), ncols), ring.domain)


def from_domain_matrix(matrix: DomainMatrix, ring: CoefficientRing) -> Matrix:
    return [[ring.from_domain(value) for value in row] for row in matrix.to_list()]


def matmul(a: Sequence[Sequence[Coefficient]], b: Sequence[Sequence[Coefficient]],
           inner: int, cols: int, ring: CoefficientRing) -> Matrix:
    """矩阵乘法 a(m×inner) · b(inner×cols)"""
    result = zeros(len(a), cols)
    for i, row in enumerate(a):
        for t in range(inner):
            if row[t] == 0:
                continue
            for j in range(cols):
                if b[t][j] != 0:
                    result[i][j] = ring.add(result[i][j], ring.mul(row[t], b[t][j]))
    return result


def is_zero_matrix(matrix: Sequence[Sequence[Coefficient]]) -> bool:
    return all(value == 0 for row in matrix for value in row)


def matrix_rank(rows: Sequence[Sequence[Coefficient]], ncols: int, ring: CoefficientRing) -> int:
    """
    秩（整数环上按有理数域计算）

    Args:
        rows: 矩阵各行
        ncols: 列数
        ring: 系数环

    Returns:
        int: 秩
    """
    if not rows or ncols == 0:
        return 0
    field = ring.as_field()
    return int(to_domain_matrix(rows, ncols, field).rank())


def echelon_basis(vectors: Sequence[Sequence[Coefficient]], ncols: int,
                  ring: CoefficientRing) -> Tuple[Matrix, List[int]]:
    """
    行空间的约化阶梯基

    Returns:
        (rows, pivots): 非零行与其主元列
    """
    ring.require_field("echelon_basis")
    if not vectors or ncols == 0:
        return [], []
    reduced, pivots = to_domain_matrix(vectors, ncols, ring).rref()
    rows = from_domain_matrix(reduced, ring)
    return rows[:len(pivots)], list(pivots)


def _solve_field(a: Sequence[Sequence[Coefficient]], ncols: int, b: Sequence[Coefficient],
                 ring: CoefficientRing) -> Optional[List[Coefficient]]:
    augmented = [list(row) + [b[i]] for i, row in enumerate(a)]
    reduced, pivots = to_domain_matrix(augmented, ncols + 1, ring).rref()
    if ncols in pivots:
        return None
    rows = from_domain_matrix(reduced, ring)
    solution: List[Coefficient] = [ring.normalize(0)] * ncols
    for r, col in enumerate(pivots):
        solution[col] = rows[r][ncols]
    return solution


def _solve_integers(a: Sequence[Sequence[Coefficient]], ncols: int, b: Sequence[Coefficient],
                    ring: CoefficientRing) -> Optional[List[Coefficient]]:
    # D = S·A·T，A x = b  <=>  D w = S b，x = T w
    nrows = len(a)
    diag, left, right = smith_normal_decomp(to_domain_matrix(a, ncols, ring))
    d = from_domain_matrix(diag, ring)
    s = from_domain_matrix(left, ring)
    t = from_domain_matrix(right, ring)
    c = [sum(s[i][j] * b[j] for j in range(nrows)) for i in range(nrows)]
    w = [0] * ncols
    for i in range(nrows):
        pivot = d[i][i] if i < ncols else 0
        if pivot == 0:
            if c[i] != 0:
                return None
            continue
        if c[i] % pivot != 0:
            return None
        w[i] = c[i] // pivot
    return [sum(t[i][j] * w[j] for j in range(ncols)) for i in range(ncols)]


def solve(a: Sequence[Sequence[Coefficient]], ncols: int, b: Sequence[Coefficient],
          ring: CoefficientRing) -> Optional[List[Coefficient]]:
    """
    求 A x = b 的一个解

    Args:
        a: m×ncols 矩阵
        ncols: 未知数个数
        b: 长度 m 的右端
        ring: 系数环（整数环上为精确整数解）

    Returns:
        解向量；无解时返回 None
    """
    if ncols == 0:
        return [] if all(value == 0 for value in b) else None
    if not a:
        return [ring.normalize(0)] * ncols
    if ring.is_field:
        return _solve_field(a, ncols, b, ring)
    return _solve_integers(a, ncols, b, ring)
