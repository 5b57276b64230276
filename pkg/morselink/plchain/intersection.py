"""
交点计数

ι(A, B) = Σ mult_A · mult_B · or(T_A ⊕ T_B)，只处理 dim A + dim B = n 的横截情形：
点落在顶维单形内，或 2 维中两条线段横截相交。
靠近单形边界或夹角过小时抛 NonTransverseError，由调用方扰动重试。
"""

import logging
from dataclasses import dataclass
from typing import List

import numpy as np

from ..core.config import settings
from ..core.errors import ErrorCode, MorseLinkError, NonTransverseError
from ..geometry.models import TWO_PI, ManifoldModel, ModelKind
from .chain import PLChain
from .charts import cross2, extent, lift_cells, translates
from .jitter import run_with_jitter

logger = logging.getLogger(__name__)

# 单组向量化的最大 (点/线段, 单形) 对数
_BLOCK = 400_000


@dataclass(frozen=True, eq=False)
class Crossing:
    """一次横截相交：A 的第 a_index 个单元在参数 s 处与 B 的第 b_index 个单元相交"""
    a_index: int
    b_index: int
    s: float
    sign: int
    point: np.ndarray


def _nontransverse(what: str) -> NonTransverseError:
    return NonTransverseError(ErrorCode.NONTRANSVERSE_CROSSING, what)


def _cells_array(chain: PLChain) -> np.ndarray:
    return np.array([c.vertices for c in chain.cells], dtype=float)


# ----------------------------------------------------------------------
# 点定位
# ----------------------------------------------------------------------

def _flat_distances(y: np.ndarray, q: np.ndarray):
    """
    平坦图卡中点到单形各面的有向距离（内部为正）

    Args:
        y: (..., n) 点
        q: (..., n+1, n) 单形顶点

    Returns:
        (distances (..., n+1), orientation (...))
    """
    if q.shape[-1] == 1:
        o = np.sign(q[..., 1, 0] - q[..., 0, 0])
        d0 = (q[..., 1, 0] - y[..., 0]) * o
        d1 = (y[..., 0] - q[..., 0, 0]) * o
        return np.stack([d0, d1], axis=-1), o
    o = np.sign(cross2(q[..., 1, :] - q[..., 0, :], q[..., 2, :] - q[..., 0, :]))
    dists = []
    for j, k in ((1, 2), (2, 0), (0, 1)):
        edge = q[..., k, :] - q[..., j, :]
        length = np.linalg.norm(edge, axis=-1)
        dists.append(cross2(edge, y - q[..., j, :]) * o / np.where(length > 0, length, 1.0))
    return np.stack(dists, axis=-1), o


def _sphere_distances(x: np.ndarray, v: np.ndarray):
    """球面测地三角形的有向距离（大圆平面距离），外加半球条件"""
    o = np.sign(np.linalg.det(v))
    dists = []
    for j, k in ((1, 2), (2, 0), (0, 1)):
        normal = np.cross(v[..., j, :], v[..., k, :])
        length = np.linalg.norm(normal, axis=-1)
        dists.append(np.sum(normal * x, axis=-1) * o / np.where(length > 0, length, 1.0))
    same_side = np.sum(v.sum(axis=-2) * x, axis=-1) > 0
    return np.stack(dists, axis=-1), o, same_side


def _classify(dists: np.ndarray, extra_mask=None):
    eps = settings.TRANSVERSALITY_EPS
    low = dists.min(axis=-1)
    inside = low > eps
    near = np.abs(low) <= eps
    if extra_mask is not None:
        inside &= extra_mask
        near &= extra_mask
    return inside, near


def locate_points(model: ManifoldModel, points: np.ndarray, cells: np.ndarray) -> List[Crossing]:
    """
    点与顶维单形的相交

    Args:
        model: 模型
        points: (p, d) 点
        cells: (c, n+1, d) 顶维单形

    Returns:
        List[Crossing]: 每个 (点, 包含它的单形) 一条，sign 为单形定向

    Raises:
        NonTransverseError: 点落在某单形边界附近
    """
    points = np.atleast_2d(np.asarray(points, dtype=float))
    cells = np.asarray(cells, dtype=float)
    if points.size == 0 or cells.size == 0:
        return []
    hits: List[Crossing] = []
    chunk = max(1, _BLOCK // max(1, len(cells)))

    if model.kind is ModelKind.SPHERE:
        for start in range(0, len(points), chunk):
            block = points[start:start + chunk]
            dists, o, same_side = _sphere_distances(block[:, None, :], cells[None, :, :, :])
            inside, near = _classify(dists, same_side & (o != 0))
            if near.any():
                i, j = np.argwhere(near)[0]
                raise _nontransverse(f"点 {np.round(block[i], 9).tolist()} 在单形 {int(j)} 边界上")
            for i, j in np.argwhere(inside):
                hits.append(Crossing(start + int(i), int(j), 0.0, int(o[0, j]), block[i]))
        return hits

    lifted = lift_cells(cells)
    short = extent(lifted).max(axis=-1) < np.pi
    short_idx = np.flatnonzero(short)
    if short_idx.size:
        q = lifted[short_idx]
        for start in range(0, len(points), chunk):
            block = points[start:start + chunk]
            base = q[None, :, 0, :]
            y = block[:, None, :] + TWO_PI * np.round((base - block[:, None, :]) / TWO_PI)
            dists, o = _flat_distances(y, np.broadcast_to(q[None], (len(block),) + q.shape))
            inside, near = _classify(dists, o != 0)
            if near.any():
                i, j = np.argwhere(near)[0]
                raise _nontransverse(f"点 {np.round(block[i], 9).tolist()} 在单形 {int(short_idx[j])} 边界上")
            for i, j in np.argwhere(inside):
                hits.append(Crossing(start + int(i), int(short_idx[j]), 0.0, int(o[i, j]), y[i, j]))

    for j in np.flatnonzero(~short):
        q = lifted[j]
        lo, hi = q.min(axis=0), q.max(axis=0)
        for i, x in enumerate(points):
            for shift in translates(lo, hi, x, x, settings.TRANSVERSALITY_EPS):
                y = x + shift
                dists, o = _flat_distances(y, q)
                inside, near = _classify(dists, o != 0)
                if near:
                    raise _nontransverse(f"点 {np.round(x, 9).tolist()} 在单形 {int(j)} 边界上")
                if inside:
                    hits.append(Crossing(i, int(j), 0.0, int(o), y))
    return hits


# ----------------------------------------------------------------------
# 线段横截（n = 2）
# ----------------------------------------------------------------------

def _planar_segments(a0, a1, b0, b1, normal=None):
    """
    平面线段相交判定（normal 给定时在该切平面内）

    Returns:
        (inside, near, s, sign) 逐对数组
    """
    eps = settings.TRANSVERSALITY_EPS
    da, db, w = a1 - a0, b1 - b0, b0 - a0
    len_a = np.linalg.norm(da, axis=-1)
    len_b = np.linalg.norm(db, axis=-1)
    denom = cross2(da, db, normal)
    parallel = np.abs(denom) < eps * len_a * len_b
    safe = np.where(parallel, 1.0, denom)
    s = cross2(w, db, normal) / safe
    t = cross2(w, da, normal) / safe
    tol_a = eps / np.where(len_a > 0, len_a, 1.0)
    tol_b = eps / np.where(len_b > 0, len_b, 1.0)
    inside = (~parallel) & (s > -tol_a) & (s < 1 + tol_a) & (t > -tol_b) & (t < 1 + tol_b)
    near = inside & ((s < tol_a) | (s > 1 - tol_a) | (t < tol_b) | (t > 1 - tol_b))

    # 共线重叠
    offset = np.abs(cross2(w, da, normal)) / np.where(len_a > 0, len_a, 1.0)
    u0 = np.sum(w * da, axis=-1) / np.where(len_a > 0, len_a ** 2, 1.0)
    u1 = np.sum((b1 - a0) * da, axis=-1) / np.where(len_a > 0, len_a ** 2, 1.0)
    overlap = (np.maximum(u0, u1) > -tol_a) & (np.minimum(u0, u1) < 1 + tol_a)
    near |= parallel & (offset < eps) & overlap
    inside &= ~near
    return inside, near, s, np.sign(denom).astype(int)


def segment_crossings(model: ManifoldModel, segments_a: np.ndarray, segments_b: np.ndarray) -> List[Crossing]:
    """
    两组线段的横截交点（n = 2）

    Args:
        model: 模型
        segments_a: (p, 2, d)
        segments_b: (c, 2, d)

    Returns:
        List[Crossing]: sign = sign det[T_A, T_B]

    Raises:
        NonTransverseError: 端点相交、夹角过小或共线重叠
    """
    segments_a = np.asarray(segments_a, dtype=float)
    segments_b = np.asarray(segments_b, dtype=float)
    if segments_a.size == 0 or segments_b.size == 0:
        return []
    hits: List[Crossing] = []
    chunk = max(1, _BLOCK // max(1, len(segments_b)))

    if model.kind is ModelKind.SPHERE:
        mid_b = segments_b.mean(axis=1)
        len_b = np.linalg.norm(segments_b[:, 1] - segments_b[:, 0], axis=-1)
        for start in range(0, len(segments_a), chunk):
            block = segments_a[start:start + chunk]
            mid_a = block.mean(axis=1)
            len_a = np.linalg.norm(block[:, 1] - block[:, 0], axis=-1)
            gap = np.linalg.norm(mid_a[:, None, :] - mid_b[None, :, :], axis=-1)
            i_idx, j_idx = np.nonzero(gap <= len_a[:, None] + len_b[None, :] + 1e-6)
            if i_idx.size == 0:
                continue
            center = mid_a[i_idx] / np.linalg.norm(mid_a[i_idx], axis=-1, keepdims=True)

            def project(p):
                return p / np.sum(p * center, axis=-1, keepdims=True)

            a0, a1 = project(block[i_idx, 0]), project(block[i_idx, 1])
            b0, b1 = project(segments_b[j_idx, 0]), project(segments_b[j_idx, 1])
            inside, near, s, sign = _planar_segments(a0, a1, b0, b1, normal=center)
            if near.any():
                m = int(np.flatnonzero(near)[0])
                raise _nontransverse(f"线段 {start + int(i_idx[m])} 与 {int(j_idx[m])} 非横截")
            for m in np.flatnonzero(inside):
                point = a0[m] + s[m] * (a1[m] - a0[m])
                hits.append(Crossing(start + int(i_idx[m]), int(j_idx[m]), float(s[m]), int(sign[m]),
                                     point / np.linalg.norm(point)))
        return hits

    lifted_a = lift_cells(segments_a)
    lifted_b = lift_cells(segments_b)
    short_a = extent(lifted_a).max(axis=-1) < np.pi / 2
    short_b = extent(lifted_b).max(axis=-1) < np.pi / 2
    ia, ib = np.flatnonzero(short_a), np.flatnonzero(short_b)
    if ia.size and ib.size:
        qb = lifted_b[ib]
        for start in range(0, ia.size, chunk):
            rows = ia[start:start + chunk]
            qa = lifted_a[rows]
            shift = TWO_PI * np.round((qa[:, None, 0, :] - qb[None, :, 0, :]) / TWO_PI)
            b0 = qb[None, :, 0, :] + shift
            b1 = qb[None, :, 1, :] + shift
            a0 = np.broadcast_to(qa[:, None, 0, :], b0.shape)
            a1 = np.broadcast_to(qa[:, None, 1, :], b0.shape)
            inside, near, s, sign = _planar_segments(a0, a1, b0, b1)
            if near.any():
                i, j = np.argwhere(near)[0]
                raise _nontransverse(f"线段 {int(rows[i])} 与 {int(ib[j])} 非横截")
            for i, j in np.argwhere(inside):
                point = a0[i, j] + s[i, j] * (a1[i, j] - a0[i, j])
                hits.append(Crossing(int(rows[i]), int(ib[j]), float(s[i, j]), int(sign[i, j]), point))

    # 含长线段的配对逐个平移枚举
    long_pairs = [(i, j) for i in range(len(segments_a)) for j in range(len(segments_b))
                  if not (short_a[i] and short_b[j])]
    for i, j in long_pairs:
        qa, qb = lifted_a[i], lifted_b[j]
        for shift in translates(qa.min(axis=0), qa.max(axis=0), qb.min(axis=0), qb.max(axis=0),
                                settings.TRANSVERSALITY_EPS):
            inside, near, s, sign = _planar_segments(qa[0], qa[1], qb[0] + shift, qb[1] + shift)
            if near:
                raise _nontransverse(f"线段 {i} 与 {j} 非横截")
            if inside:
                hits.append(Crossing(i, j, float(s), int(sign), qa[0] + float(s) * (qa[1] - qa[0])))
    return hits


# ----------------------------------------------------------------------
# 链层面
# ----------------------------------------------------------------------

def _check_dims(a: PLChain, b: PLChain, model: ManifoldModel) -> None:
    if a.dim + b.dim != model.n:
        raise MorseLinkError(ErrorCode.INVALID_CONFIG, f"维数之和 {a.dim} + {b.dim} ≠ {model.n}")


def transverse_points(a: PLChain, b: PLChain, model: ManifoldModel) -> List[Crossing]:
    """
    A 与 B 的全部横截交点，sign 已乘入两侧重数与 or(T_A ⊕ T_B)

    Raises:
        NonTransverseError: 非横截
    """
    _check_dims(a, b, model)
    a, b = a.normalized(), b.normalized()
    if not a.cells or not b.cells:
        return []
    mult_a = [c.multiplicity for c in a.cells]
    mult_b = [c.multiplicity for c in b.cells]
    if a.dim == 0 or b.dim == 0:
        flipped = a.dim != 0
        points, tops = (b, a) if flipped else (a, b)
        m_points, m_tops = (mult_b, mult_a) if flipped else (mult_a, mult_b)
        found = locate_points(model, _cells_array(points)[:, 0, :], _cells_array(tops))
        return [Crossing(h.b_index if flipped else h.a_index, h.a_index if flipped else h.b_index, 0.0,
                         h.sign * m_points[h.a_index] * m_tops[h.b_index], h.point)
                for h in found]
    found = segment_crossings(model, _cells_array(a), _cells_array(b))
    return [Crossing(h.a_index, h.b_index, h.s, h.sign * mult_a[h.a_index] * mult_b[h.b_index], h.point)
            for h in found]


def intersection_number(a: PLChain, b: PLChain, model: ManifoldModel, seed: int = None, jitter: bool = True) -> int:
    """
    交点数 ι(A, B)

    Args:
        a: dim a 的链
        b: dim n-a 的链
        model: 模型
        seed: 扰动种子
        jitter: 非横截时是否扰动 B 重试

    Returns:
        int: 带符号交点数

    Raises:
        MorseLinkError: NONTRANSVERSE_AFTER_JITTER / INVALID_CONFIG
    """
    _check_dims(a, b, model)

    def count(moved_b: PLChain) -> int:
        return int(sum(h.sign for h in transverse_points(a, moved_b, model)))

    if not jitter:
        return count(b)
    seed = settings.DEFAULT_SEED if seed is None else seed
    return run_with_jitter(count, model, [b], seed, ErrorCode.NONTRANSVERSE_AFTER_JITTER)


def fiber_product(g0: PLChain, g1: PLChain, model: ManifoldModel) -> PLChain:
    """
    横截纤维积 g0 ×_M g1（0 维情形）

    交点按 ι(g1, g0) 的次序定号；维数和小于 n 时为空。

    Raises:
        MorseLinkError: 维数和大于 n（INVALID_CONFIG）
        NonTransverseError: 非横截
    """
    total = g0.dim + g1.dim
    if total < model.n:
        return PLChain.empty(0, model.kind)
    if total > model.n:
        raise MorseLinkError(ErrorCode.INVALID_CONFIG, f"只支持 0 维纤维积: {g0.dim} + {g1.dim} > {model.n}")
    crossings = transverse_points(g1, g0, model)
    return PLChain.points(model.kind, [model.wrap(h.point) for h in crossings], [h.sign for h in crossings])
