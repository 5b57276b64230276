"""
定向分片线性链

单形顶点存模型坐标（圆周、环面为提升坐标，球面为单位向量），附整数重数。
规范键把单形化为与提升无关的形式：顶点排序并记录置换奇偶，
从而相同几何单形可以合并、抵消。
"""

import logging
from dataclasses import dataclass
from typing import Dict, Iterable, List, Optional, Tuple

import numpy as np

from ..core.config import settings
from ..geometry.models import TWO_PI, ManifoldModel, ModelKind
from ..schemas.plchain import CellSchema, ChainDocument

logger = logging.getLogger(__name__)

CellKey = Tuple[float, ...]


@dataclass(frozen=True, eq=False)
class Cell:
    """定向仿射单形（球面上为测地单形）"""
    vertices: np.ndarray
    multiplicity: int = 1

    @property
    def dim(self) -> int:
        return self.vertices.shape[0] - 1

    def reversed(self) -> "Cell":
        return Cell(self.vertices, -self.multiplicity)

    def to_schema(self) -> CellSchema:
        return CellSchema(vertices=[[float(c) for c in v] for v in self.vertices], multiplicity=self.multiplicity)


def _permutation_parity(order: List[int]) -> int:
    parity = 0
    seen = [False] * len(order)
    for i in range(len(order)):
        if seen[i]:
            continue
        j, length = i, 0
        while not seen[j]:
            seen[j] = True
            j = order[j]
            length += 1
        parity += length - 1
    return -1 if parity % 2 else 1


def _round(values: np.ndarray) -> Tuple[float, ...]:
    digits = int(round(-np.log10(settings.SNAP_TOL)))
    return tuple(float(v) + 0.0 for v in np.round(values, digits))


def canonical_key(kind: ModelKind, vertices: np.ndarray) -> Tuple[CellKey, int]:
    """
    单形的规范键与定向符号

    Args:
        kind: 模型类型
        vertices: (k+1, d) 顶点

    Returns:
        (key, sign): 顶点按规范坐标排序，sign 为排序置换的奇偶
    """
    vertices = np.asarray(vertices, dtype=float)
    if kind is ModelKind.SPHERE:
        reduced = [_round(v) for v in vertices]
        order = sorted(range(len(vertices)), key=lambda i: reduced[i])
        return tuple(c for i in order for c in reduced[i]), _permutation_parity(order)

    period = _round(np.array([TWO_PI]))[0]
    reduced = []
    for v in vertices:
        r = np.array(_round(np.mod(v, TWO_PI)))
        r[r >= period] = 0.0
        reduced.append(tuple(float(c) for c in r))
    lowest = min(reduced)
    best = None
    # 回绕后重合的顶点（如首尾相接的闭环边）按相对偏移打破平局
    for first in (i for i in range(len(vertices)) if reduced[i] == lowest):
        offsets = {i: _round(vertices[i] - vertices[first]) for i in range(len(vertices))}
        rest = sorted((i for i in range(len(vertices)) if i != first), key=lambda i: (reduced[i], offsets[i]))
        key = reduced[first] + tuple(c for i in rest for c in offsets[i])
        if best is None or key < best[0]:
            best = (key, [first] + rest)
    return best[0], _permutation_parity(best[1])


def has_repeated_vertex(kind: ModelKind, vertices: np.ndarray) -> bool:
    key, _ = canonical_key(kind, vertices)
    d = len(vertices[0])
    if kind is ModelKind.SPHERE:
        parts = [key[i * d:(i + 1) * d] for i in range(len(vertices))]
        return len(set(parts)) < len(parts)
    zero = tuple([0.0] * d)
    offsets = [zero] + [key[d + i * d: d + (i + 1) * d] for i in range(len(vertices) - 1)]
    return len(set(offsets)) < len(offsets)


@dataclass(frozen=True, eq=False)
class PLChain:
    """
    k 维 PL 链

    cells 中同一几何单形可重复出现；normalized() 合并并去掉零重数。
    """
    dim: int
    kind: ModelKind
    cells: Tuple[Cell, ...] = ()

    @classmethod
    def empty(cls, dim: int, kind: ModelKind) -> "PLChain":
        return cls(dim, kind, ())

    @classmethod
    def points(cls, kind: ModelKind, points: Iterable, multiplicities: Optional[Iterable[int]] = None) -> "PLChain":
        points = [np.asarray(p, dtype=float).reshape(1, -1) for p in points]
        mults = list(multiplicities) if multiplicities is not None else [1] * len(points)
        return cls(0, kind, tuple(Cell(p, int(m)) for p, m in zip(points, mults)))

    @classmethod
    def polyline(cls, kind: ModelKind, vertices, multiplicity: int = 1) -> "PLChain":
        vertices = np.asarray(vertices, dtype=float)
        cells = tuple(
            Cell(vertices[i:i + 2].copy(), multiplicity)
            for i in range(len(vertices) - 1)
            if not has_repeated_vertex(kind, vertices[i:i + 2])
        )
        return cls(1, kind, cells)

    def is_empty(self) -> bool:
        return not self.normalized().cells

    def __add__(self, other: "PLChain") -> "PLChain":
        if other.dim != self.dim:
            raise ValueError(f"维数不同: {self.dim} 与 {other.dim}")
        return PLChain(self.dim, self.kind, self.cells + other.cells)

    def __neg__(self) -> "PLChain":
        return PLChain(self.dim, self.kind, tuple(c.reversed() for c in self.cells))

    def __sub__(self, other: "PLChain") -> "PLChain":
        return self + (-other)

    def scale(self, factor: int) -> "PLChain":
        if factor == 0:
            return PLChain.empty(self.dim, self.kind)
        return PLChain(self.dim, self.kind, tuple(Cell(c.vertices, c.multiplicity * factor) for c in self.cells))

    def map_vertices(self, fn) -> "PLChain":
        """对全部顶点施加同一映射（平移、旋转）"""
        return PLChain(self.dim, self.kind, tuple(
            Cell(np.array([fn(v) for v in c.vertices]), c.multiplicity) for c in self.cells
        ))

    def normalized(self) -> "PLChain":
        """合并同一单形、去掉零重数与退化单形"""
        merged: Dict[CellKey, List] = {}
        for cell in self.cells:
            if has_repeated_vertex(self.kind, cell.vertices):
                continue
            key, sign = canonical_key(self.kind, cell.vertices)
            if key in merged:
                merged[key][1] += sign * cell.multiplicity
            else:
                merged[key] = [cell.vertices, sign * cell.multiplicity, sign]
        cells = []
        for vertices, total, sign in merged.values():
            if total != 0:
                cells.append(Cell(vertices, total * sign))
        return PLChain(self.dim, self.kind, tuple(cells))

    def vertices(self) -> np.ndarray:
        if not self.cells:
            return np.zeros((0, 0))
        return np.vstack([c.vertices for c in self.cells])

    def f_range(self, model: ManifoldModel, samples: int = 8) -> Tuple[float, float]:
        """载体上 f 的 (min, max)，沿单形稠密采样"""
        if not self.cells:
            return (float("inf"), float("-inf"))
        values = []
        for cell in self.cells:
            values.append(model.values(sample_cell(model, cell, samples)))
        flat = np.concatenate(values)
        return float(flat.min()), float(flat.max())

    def equals(self, other: "PLChain") -> bool:
        """几何意义下相等（合并后逐单形比较）"""
        return (self - other).is_empty()

    def to_document(self, model_name: str = "") -> ChainDocument:
        return ChainDocument(dim=self.dim, model=model_name, cells=[c.to_schema() for c in self.normalized().cells])

    @classmethod
    def from_document(cls, doc: ChainDocument, kind: ModelKind) -> "PLChain":
        return cls(doc.dim, kind, tuple(Cell(np.asarray(c.vertices, dtype=float), c.multiplicity) for c in doc.cells))

    def __len__(self) -> int:
        return len(self.cells)


def sample_cell(model: ManifoldModel, cell: Cell, samples: int) -> np.ndarray:
    """单形上的采样点（重心坐标网格，球面上投回球面）"""
    vertices = cell.vertices
    if cell.dim == 0:
        return vertices.copy()
    base = vertices[0]
    rel = np.array([model.lift_near(v, base) for v in vertices]) if model.kind is not ModelKind.SPHERE else vertices
    points = []
    if cell.dim == 1:
        for t in np.linspace(0.0, 1.0, samples + 1):
            points.append((1 - t) * rel[0] + t * rel[1])
    else:
        for i in range(samples + 1):
            for j in range(samples + 1 - i):
                a, b = i / samples, j / samples
                points.append((1 - a - b) * rel[0] + a * rel[1] + b * rel[2])
    points = np.array(points)
    if model.kind is ModelKind.SPHERE:
        points = points / np.linalg.norm(points, axis=1, keepdims=True)
    return points


def boundary_pl(chain: PLChain) -> PLChain:
    """
    边界：Σ_i (-1)^i [v_0 .. v̂_i .. v_k]，内部面抵消

    Args:
        chain: k 维链

    Returns:
        PLChain: k-1 维链（0 维链的边界为空）
    """
    if chain.dim == 0:
        return PLChain.empty(0, chain.kind)
    faces = []
    for cell in chain.normalized().cells:
        k = cell.dim
        for i in range(k + 1):
            keep = [j for j in range(k + 1) if j != i]
            sign = -1 if i % 2 else 1
            faces.append(Cell(cell.vertices[keep].copy(), sign * cell.multiplicity))
    return PLChain(chain.dim - 1, chain.kind, tuple(faces)).normalized()
