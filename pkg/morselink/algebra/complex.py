"""
滤过链复形

生成元按度数分组，每个生成元带实数滤过值；边界矩阵 d_k 的行对应 k-1 度生成元、
列对应 k 度生成元。复形构造后不可变。
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

from ..core.errors import ErrorCode, MorseLinkError
from . import linalg
from .ring import Coefficient, CoefficientRing

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Generator:
    """生成元（临界点）"""
    id: str
    degree: int
    level: float

    def to_dict(self) -> dict:
        return {"id": self.id, "degree": self.degree, "level": self.level}


@dataclass(frozen=True, eq=False)
class Chain:
    """单一度数的稀疏链"""
    degree: int
    coefficients: Mapping[str, Coefficient]
    ring: CoefficientRing

    def __post_init__(self):
        cleaned = {}
        for key, value in self.coefficients.items():
            value = self.ring.normalize(value)
            if value != 0:
                cleaned[key] = value
        object.__setattr__(self, "coefficients", cleaned)

    @classmethod
    def zero(cls, degree: int, ring: CoefficientRing) -> "Chain":
        return cls(degree, {}, ring)

    @property
    def support(self) -> List[str]:
        return list(self.coefficients)

    def is_zero(self) -> bool:
        return not self.coefficients

    def coefficient(self, generator_id: str) -> Coefficient:
        return self.coefficients.get(generator_id, 0)

    def _check(self, other: "Chain") -> None:
        if other.degree != self.degree:
            raise MorseLinkError(ErrorCode.DEGREE_MISMATCH, f"度数不同: {self.degree} 与 {other.degree}")

    def __add__(self, other: "Chain") -> "Chain":
        self._check(other)
        merged = dict(self.coefficients)
        for key, value in other.coefficients.items():
            merged[key] = merged.get(key, 0) + value
        return Chain(self.degree, merged, self.ring)

    def __neg__(self) -> "Chain":
        return Chain(self.degree, {k: -v for k, v in self.coefficients.items()}, self.ring)

    def __sub__(self, other: "Chain") -> "Chain":
        return self + (-other)

    def scale(self, factor: Coefficient) -> "Chain":
        return Chain(self.degree, {k: v * factor for k, v in self.coefficients.items()}, self.ring)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Chain):
            return NotImplemented
        return self.degree == other.degree and self.coefficients == other.coefficients

    def to_dict(self) -> dict:
        return {
            "degree": self.degree,
            "coefficients": {k: self.ring.format(v) for k, v in sorted(self.coefficients.items())},
        }


@dataclass(frozen=True, eq=False)
class FilteredComplex:
    """
    滤过链复形

    orientation 为 +1 表示 f 的复形，-1 表示 -f 的复形；
    对偶运算依此选择符号规则，使得二次对偶还原原复形。
    """
    dimension: int
    ring: CoefficientRing
    generators: Tuple[Generator, ...]
    boundary: Mapping[int, linalg.Matrix]
    orientation: int = 1
    _index: Dict[str, Generator] = field(default_factory=dict, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "_index", {g.id: g for g in self.generators})

    # ------------------------------------------------------------------
    # 访问
    # ------------------------------------------------------------------

    def generator(self, generator_id: str) -> Generator:
        return self._index[generator_id]

    def has_generator(self, generator_id: str) -> bool:
        return generator_id in self._index

    def in_degree(self, k: int) -> List[Generator]:
        return [g for g in self.generators if g.degree == k]

    def ids(self, k: int) -> List[str]:
        return [g.id for g in self.generators if g.degree == k]

    def count(self, k: int) -> int:
        return sum(1 for g in self.generators if g.degree == k)

    def matrix(self, k: int) -> linalg.Matrix:
        """d_k：k 度到 k-1 度；缺省为零矩阵"""
        rows, cols = self.count(k - 1), self.count(k)
        stored = self.boundary.get(k)
        if stored is None:
            return linalg.zeros(rows, cols)
        return [list(row) for row in stored]

    def entry(self, source: str, target: str) -> Coefficient:
        """d(source) 中 target 的系数"""
        src = self.generator(source)
        matrix = self.matrix(src.degree)
        return matrix[self.ids(src.degree - 1).index(target)][self.ids(src.degree).index(source)]

    def chain(self, degree: int, coefficients: Optional[Mapping[str, Coefficient]] = None) -> Chain:
        coefficients = coefficients or {}
        for key in coefficients:
            if key not in self._index or self._index[key].degree != degree:
                raise MorseLinkError(ErrorCode.DEGREE_MISMATCH, f"生成元 {key} 不在 {degree} 度")
        return Chain(degree, coefficients, self.ring)

    def vector(self, c: Chain) -> List[Coefficient]:
        return [c.coefficient(gid) for gid in self.ids(c.degree)]

    def from_vector(self, degree: int, values: Sequence[Coefficient]) -> Chain:
        return Chain(degree, dict(zip(self.ids(degree), values)), self.ring)

    # ------------------------------------------------------------------
    # 运算
    # ------------------------------------------------------------------

    def d(self, c: Chain) -> Chain:
        """边界算子"""
        if c.degree <= 0:
            return Chain.zero(c.degree - 1, self.ring)
        matrix = self.matrix(c.degree)
        vec = self.vector(c)
        out = [sum(row[j] * vec[j] for j in range(len(vec))) for row in matrix]
        return self.from_vector(c.degree - 1, out)

    def level(self, c: Chain) -> float:
        return level(self, c)

    def fundamental_cycle(self) -> Chain:
        """最高度生成元之和"""
        return self.chain(self.dimension, {gid: 1 for gid in self.ids(self.dimension)})

    def rank(self, k: int, ring: Optional[CoefficientRing] = None) -> int:
        """rank(d_k)"""
        ring = ring or self.ring
        matrix = [[ring.normalize(v) for v in row] for row in self.matrix(k)]
        return linalg.matrix_rank(matrix, self.count(k), ring)

    def adjoint_sign(self, k: int) -> int:
        """Π(d' x, y) = sign · Π(x, d y)，y 为本复形 k 度链"""
        if self.orientation == 1:
            return -1 if (self.dimension - k + 1) % 2 else 1
        return -1 if k % 2 else 1

    def with_ring(self, ring: CoefficientRing) -> "FilteredComplex":
        """系数换环（整数约化到 Q 或 Z/p）"""
        boundary = {k: [[ring.normalize(v) for v in row] for row in m] for k, m in self.boundary.items()}
        return FilteredComplex(self.dimension, ring, self.generators, boundary, self.orientation)

    def boundary_entries(self) -> Dict[int, List[Tuple[str, str, Coefficient]]]:
        """稀疏形式：degree -> [(row-id, col-id, coefficient)]"""
        entries: Dict[int, List[Tuple[str, str, Coefficient]]] = {}
        for k in range(1, self.dimension + 1):
            rows, cols = self.ids(k - 1), self.ids(k)
            items = []
            for i, row in enumerate(self.matrix(k)):
                for j, value in enumerate(row):
                    if value != 0:
                        items.append((rows[i], cols[j], value))
            if items:
                entries[k] = items
        return entries


def make_complex(n: int, ring: CoefficientRing, generators: Iterable[Generator],
                 boundary: Mapping[int, Sequence[Sequence[Coefficient]]],
                 orientation: int = 1) -> FilteredComplex:
    """
    构造并校验滤过链复形

    Args:
        n: 维数
        ring: 系数环
        generators: 生成元
        boundary: degree -> 稠密矩阵 d_k
        orientation: +1 为 f，-1 为 -f

    Returns:
        FilteredComplex: 校验通过的复形

    Raises:
        MorseLinkError: D_SQUARED_NONZERO / FILTRATION_VIOLATION / DEGREE_MISMATCH
    """
    gens = tuple(generators)
    seen = set()
    for g in gens:
        if g.id in seen:
            raise MorseLinkError(ErrorCode.INVALID_CONFIG, f"生成元 id 重复: {g.id}")
        if not 0 <= g.degree <= n:
            raise MorseLinkError(ErrorCode.DEGREE_MISMATCH, f"生成元 {g.id} 的度数 {g.degree} 超出 0..{n}")
        seen.add(g.id)

    counts = {k: sum(1 for g in gens if g.degree == k) for k in range(-1, n + 2)}
    normalized: Dict[int, linalg.Matrix] = {}
    for k, matrix in boundary.items():
        rows = [list(row) for row in matrix]
        if not 1 <= k <= n and (rows and any(rows)):
            raise MorseLinkError(ErrorCode.DEGREE_MISMATCH, f"d_{k} 超出度数范围")
        if len(rows) != counts.get(k - 1, 0) or any(len(row) != counts.get(k, 0) for row in rows):
            raise MorseLinkError(
                ErrorCode.DEGREE_MISMATCH,
                f"d_{k} 的形状与生成元个数不符: 期望 {counts.get(k - 1, 0)}×{counts.get(k, 0)}",
            )
        if 1 <= k <= n:
            normalized[k] = [[ring.normalize(v) for v in row] for row in rows]

    cx = FilteredComplex(n, ring, gens, normalized, orientation)

    # d∘d = 0
    for k in range(2, n + 1):
        product = linalg.matmul(cx.matrix(k - 1), cx.matrix(k), cx.count(k - 1), cx.count(k), ring)
        if not linalg.is_zero_matrix(product):
            raise MorseLinkError(ErrorCode.D_SQUARED_NONZERO, f"d_{k - 1}∘d_{k} ≠ 0")

    # 滤过严格下降
    for g in gens:
        if g.degree == 0:
            continue
        image = cx.d(cx.chain(g.degree, {g.id: 1}))
        if not image.is_zero() and cx.level(image) >= g.level:
            raise MorseLinkError(
                ErrorCode.FILTRATION_VIOLATION,
                f"生成元 {g.id}: ℓ(d {g.id}) = {cx.level(image)} ≥ {g.level}",
            )
    return cx


def level(cx: FilteredComplex, c: Chain) -> float:
    """滤过值：支撑上生成元的最大值；零链为 -inf"""
    if c.is_zero():
        return -math.inf
    return max(cx.generator(gid).level for gid in c.support)


def dual_complex(cx: FilteredComplex) -> FilteredComplex:
    """
    对偶复形（-f 的复形）

    度数 k -> n-k，滤过值 v -> -v；f 复形的边界项按 (-1)^{n-k+1} 变号，
    -f 复形按 (-1)^{k} 变号（k 为源生成元在被对偶复形中的度数）。
    """
    n = cx.dimension
    dual_gens = tuple(Generator(g.id, n - g.degree, -g.level) for g in cx.generators)
    boundary: Dict[int, linalg.Matrix] = {}
    for j in range(1, n + 1):
        matrix = cx.matrix(j)
        if cx.orientation == 1:
            sign = -1 if (n - j + 1) % 2 else 1
        else:
            sign = -1 if j % 2 else 1
        # 原 d_j: (j-1)×j；对偶 d'_{n-j+1}: (n-j)×(n-j+1)，即转置
        transposed = [[sign * matrix[r][c] for r in range(len(matrix))] for c in range(cx.count(j))]
        boundary[n - j + 1] = transposed
    # 稳定排序保持各度数内原有顺序
    ordered = tuple(sorted(dual_gens, key=lambda g: g.degree))
    fixed = {k: [[cx.ring.normalize(v) for v in row] for row in m] for k, m in boundary.items()}
    return FilteredComplex(n, cx.ring, ordered, fixed, -cx.orientation)


def pi_pairing(x: Chain, y: Chain, n: int) -> Coefficient:
    """
    Π 配对：Σ_p a_p b_p

    Args:
        x: 对偶复形中 n-k 度的链
        y: 原复形中 k 度的链
        n: 维数

    Raises:
        MorseLinkError: DEGREE_MISMATCH
    """
    if x.degree != n - y.degree:
        raise MorseLinkError(ErrorCode.DEGREE_MISMATCH, f"Π 需要互补度数: {x.degree} + {y.degree} ≠ {n}")
    total = 0
    for key, value in x.coefficients.items():
        if key in y.coefficients:
            total += value * y.coefficients[key]
    return y.ring.normalize(total)


def _primitive(cx: FilteredComplex, y: Chain, what: str) -> Chain:
    """求 d z = y 的一个解"""
    k = y.degree
    if k + 1 > cx.dimension:
        if y.is_zero():
            return Chain.zero(k + 1, cx.ring)
        raise MorseLinkError(ErrorCode.NOT_A_BOUNDARY, f"{what} 不在边界像中")
    solution = linalg.solve(cx.matrix(k + 1), cx.count(k + 1), cx.vector(y), cx.ring)
    if solution is None:
        if not cx.ring.is_field:
            over_q = linalg.solve(cx.matrix(k + 1), cx.count(k + 1), cx.vector(y), cx.ring.as_field())
            if over_q is not None:
                raise MorseLinkError(ErrorCode.UNSOLVABLE_OVER_RING, f"{what} 仅在有理数上是边界")
        raise MorseLinkError(ErrorCode.NOT_A_BOUNDARY, f"{what} 不在边界像中")
    return cx.from_vector(k + 1, solution)


def primitive(cx: FilteredComplex, y: Chain) -> Chain:
    """公开接口：d z = y 的一个原像"""
    return _primitive(cx, y, "y")


def lambda_pairing(cx: FilteredComplex, x: Chain, y: Chain, cross_check: bool = False) -> Coefficient:
    """
    Λ 配对：Λ(x, y) = Π(x, z)，其中 d z = y

    Args:
        cx: y 所在的复形
        x: 对偶复形中的边界
        y: cx 中的边界
        cross_check: 同时用 x = d' w 的另一公式计算并比对

    Returns:
        环元素
    """
    n = cx.dimension
    if x.degree != n - y.degree - 1:
        raise MorseLinkError(ErrorCode.DEGREE_MISMATCH, f"Λ 需要 deg x + deg y = n - 1")
    dual = dual_complex(cx)
    w = _primitive(dual, x, "x")
    z = _primitive(cx, y, "y")
    value = pi_pairing(x, z, n)
    if cross_check:
        alternative = cx.ring.normalize(cx.adjoint_sign(y.degree + 1) * pi_pairing(w, y, n))
        if alternative != value:
            raise AssertionError(f"Λ 两种算法不一致: {value} ≠ {alternative}")
        logger.debug("Λ 交叉校验通过: %s", value)
    return value
