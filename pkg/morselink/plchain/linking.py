"""
链接数

lk(b_-, b_+) = ι(b_-, X)，∂X = b_+，dim b_- + dim b_+ = n - 1。
"""

import logging
from typing import Optional

import numpy as np

from ..core.config import settings
from ..core.errors import ErrorCode, MorseLinkError
from ..geometry.models import ManifoldModel, ModelKind
from .bounding import bounding_chain
from .chain import PLChain, boundary_pl
from .intersection import intersection_number
from .signs import sign_linksym

logger = logging.getLogger(__name__)


def _point_segment_distance(model: ManifoldModel, x: np.ndarray, a: np.ndarray, b: np.ndarray) -> float:
    if model.kind is ModelKind.SPHERE:
        # 弦距离，对短线段足够
        base = a
        x_local = x
    else:
        base = a
        x_local = model.lift_near(x, a)
        b = model.lift_near(b, a)
    d = b - base
    t = float(np.clip((x_local - base) @ d / max(float(d @ d), 1e-300), 0.0, 1.0))
    return float(np.linalg.norm(x_local - (base + t * d)))


def carrier_gap(a: PLChain, b: PLChain, model: ManifoldModel) -> float:
    """
    两条链载体的最小距离（仅支持其中一条为 0 维）

    Returns:
        float: 距离；任一为空时为 inf
    """
    a, b = a.normalized(), b.normalized()
    if not a.cells or not b.cells:
        return float("inf")
    if a.dim != 0:
        a, b = b, a
    if a.dim != 0:
        raise MorseLinkError(ErrorCode.INVALID_CONFIG, "carrier_gap 需要一条 0 维链")
    gap = float("inf")
    for point_cell in a.cells:
        x = point_cell.vertices[0]
        for cell in b.cells:
            if cell.dim == 0:
                gap = min(gap, model.distance(x, cell.vertices[0]))
            elif cell.dim == 1:
                gap = min(gap, _point_segment_distance(model, x, cell.vertices[0], cell.vertices[1]))
            else:
                raise MorseLinkError(ErrorCode.INVALID_CONFIG, "carrier_gap 只支持 0、1 维链")
    return gap


def linking_number(
    b_minus: PLChain,
    b_plus: PLChain,
    model: ManifoldModel,
    mesh_scale: Optional[float] = None,
    seed: Optional[int] = None,
    check_refined: bool = False,
) -> int:
    """
    链接数 lk(b_-, b_+)

    Args:
        b_minus: n-k-1 维闭链
        b_plus: k 维闭链
        model: 模型
        mesh_scale: 有界链细分尺度
        seed: 扰动种子
        check_refined: 在加密一倍的细分上重算并断言相同

    Returns:
        int: 链接数

    Raises:
        MorseLinkError: NOT_NULL_HOMOLOGOUS / CARRIERS_INTERSECT / INVALID_CONFIG
    """
    if b_minus.dim + b_plus.dim != model.n - 1:
        raise MorseLinkError(ErrorCode.INVALID_CONFIG,
                             f"链接需要维数和 n-1: {b_minus.dim} + {b_plus.dim} ≠ {model.n - 1}")
    for label, chain in (("b_-", b_minus), ("b_+", b_plus)):
        if not boundary_pl(chain).is_empty():
            raise MorseLinkError(ErrorCode.INVALID_CONFIG, f"{label} 不是闭链")
    if b_minus.is_empty() or b_plus.is_empty():
        return 0
    gap = carrier_gap(b_minus, b_plus, model)
    if gap <= settings.TRANSVERSALITY_EPS:
        raise MorseLinkError(ErrorCode.CARRIERS_INTERSECT, f"载体距离 {gap:.3g}")

    mesh_scale = mesh_scale or settings.MESH_SCALE
    filling = bounding_chain(b_plus, model, mesh_scale)
    value = intersection_number(b_minus, filling, model, seed=seed)
    if check_refined:
        refined = intersection_number(b_minus, bounding_chain(b_plus, model, mesh_scale / 2), model, seed=seed)
        if refined != value:
            raise AssertionError(f"链接数随细分改变: {value} ≠ {refined}")
    logger.debug("lk = %d（mesh_scale=%g）", value, mesh_scale)
    return value


def linking_symmetry_residual(f: PLChain, g: PLChain, model: ManifoldModel, seed: Optional[int] = None) -> int:
    """lk(g, f) - (-1)^{(k+1)(n-k)} lk(f, g)，f 为 k 维"""
    forward = linking_number(g, f, model, seed=seed)
    backward = linking_number(f, g, model, seed=seed)
    return forward - sign_linksym(model.n, f.dim) * backward
