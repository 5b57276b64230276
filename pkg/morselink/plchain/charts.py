"""
局部图卡

平坦模型：把单形顶点提升到同一基本域附近；球面：在单形中心做球心投影（大圆映为直线）。
"""

from itertools import product
from typing import Iterator, Optional

import numpy as np

from ..core.errors import ErrorCode, MorseLinkError
from ..geometry.models import TWO_PI, ManifoldModel, ModelKind


def lift_cell(vertices: np.ndarray) -> np.ndarray:
    """平坦模型：逐个顶点提升到前一个顶点附近"""
    lifted = np.array(vertices, dtype=float)
    for i in range(1, len(lifted)):
        d = lifted[i] - lifted[i - 1]
        lifted[i] = lifted[i] - TWO_PI * np.round(d / TWO_PI)
    return lifted


def lift_cells(vertices: np.ndarray) -> np.ndarray:
    """向量化版本，vertices 形如 (m, k+1, d)"""
    lifted = np.array(vertices, dtype=float)
    for i in range(1, lifted.shape[1]):
        d = lifted[:, i] - lifted[:, i - 1]
        lifted[:, i] = lifted[:, i] - TWO_PI * np.round(d / TWO_PI)
    return lifted


def gnomonic(points: np.ndarray, center: np.ndarray) -> np.ndarray:
    """
    球心投影到 center 处切平面（仍用 R³ 坐标表示）

    Raises:
        MorseLinkError: 点不在 center 所在半球
    """
    points = np.atleast_2d(points)
    dots = points @ center
    if np.any(dots <= 1e-6):
        raise MorseLinkError(ErrorCode.INVALID_CONFIG, "单形超出投影半球")
    return points / dots[:, None]


def chart_coordinates(model: ManifoldModel, vertices: np.ndarray, center: Optional[np.ndarray] = None) -> np.ndarray:
    """
    单形顶点的局部坐标（n 维）

    Args:
        model: 模型
        vertices: (k+1, d) 顶点
        center: 球面图卡中心，缺省为顶点均值方向

    Returns:
        np.ndarray: (k+1, n) 坐标，定向与流形一致
    """
    vertices = np.asarray(vertices, dtype=float)
    if model.kind is not ModelKind.SPHERE:
        return lift_cell(vertices)
    if center is None:
        center = vertices.mean(axis=0)
        center = center / np.linalg.norm(center)
    basis = model.tangent_basis(center)
    return gnomonic(vertices, center) @ basis.T


def extent(lifted: np.ndarray) -> np.ndarray:
    """提升后单形在各坐标方向的跨度，形如 (m, d)"""
    return lifted.max(axis=1) - lifted.min(axis=1)


def translates(lo_a: np.ndarray, hi_a: np.ndarray, lo_b: np.ndarray, hi_b: np.ndarray, pad: float) -> Iterator[np.ndarray]:
    """使 B 的包围盒平移后与 A 的包围盒相交的全部格点平移 2πm"""
    ranges = []
    for la, ha, lb, hb in zip(lo_a, hi_a, lo_b, hi_b):
        start = int(np.ceil((la - hb - pad) / TWO_PI))
        stop = int(np.floor((ha - lb + pad) / TWO_PI))
        ranges.append(range(start, stop + 1))
    for m in product(*ranges):
        yield TWO_PI * np.array(m, dtype=float)


def cross2(u: np.ndarray, v: np.ndarray, normal: Optional[np.ndarray] = None) -> np.ndarray:
    """平面叉积；normal 给定时为 (u × v)·normal（切平面内）"""
    if normal is None:
        return u[..., 0] * v[..., 1] - u[..., 1] * v[..., 0]
    return np.sum(np.cross(u, v) * normal, axis=-1)
