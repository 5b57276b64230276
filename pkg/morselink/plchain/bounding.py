"""
有界链构造

给定零调的 k 维闭链 b，构造 k+1 维链 X 使 ∂X = b：
  - 0 维：从基点出发的测地路径之和；
  - 球面 1 维：以最佳拟合平面法向为顶点的锥，径向按 mesh_scale 细分；
  - 环面 1 维：沿环路提升后作锥，用格点三角形补齐每个环路的同调类。
"""

import logging
import math
from typing import Dict, List, Optional, Tuple

import numpy as np

from ..core.config import settings
from ..core.errors import ErrorCode, MorseLinkError
from ..geometry.models import TWO_PI, ManifoldModel, ModelKind
from .chain import Cell, PLChain, boundary_pl, canonical_key

logger = logging.getLogger(__name__)

# 环面锥顶点的固定偏移，避开与环路顶点共线
_APEX_OFFSET = np.array([0.0123456, 0.0345678])


def _slerp(a: np.ndarray, b: np.ndarray, t: float) -> np.ndarray:
    omega = math.acos(float(np.clip(a @ b, -1.0, 1.0)))
    if omega < 1e-12:
        return a.copy()
    return (math.sin((1 - t) * omega) * a + math.sin(t * omega) * b) / math.sin(omega)


def _pieces(length: float, mesh_scale: float) -> int:
    return max(1, int(math.ceil(length / mesh_scale)))


def geodesic_path(model: ManifoldModel, a: np.ndarray, b: np.ndarray, mesh_scale: float) -> np.ndarray:
    """
    a 到 b 的细分测地线顶点

    平坦模型上 b 取 a 附近的提升（圆周上取正向），球面上为大圆弧。
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if model.kind is ModelKind.SPHERE:
        if a @ b < -1 + 1e-9:
            # 对径点：经过一个与 a 垂直的中间点
            middle = model.tangent_basis(a)[0]
            return np.vstack([geodesic_path(model, a, middle, mesh_scale)[:-1],
                              geodesic_path(model, middle, b, mesh_scale)])
        angle = math.acos(float(np.clip(a @ b, -1.0, 1.0)))
        count = _pieces(angle, mesh_scale)
        return np.array([_slerp(a, b, i / count) for i in range(count + 1)])
    if model.kind is ModelKind.CIRCLE:
        end = a + np.mod(b - a, TWO_PI)
    else:
        end = model.lift_near(b, a)
    count = _pieces(float(np.linalg.norm(end - a)), mesh_scale)
    return np.array([a + (end - a) * (i / count) for i in range(count + 1)])


def _bound_points(b: PLChain, model: ManifoldModel, mesh_scale: float) -> PLChain:
    cells = b.normalized().cells
    total = sum(c.multiplicity for c in cells)
    if total != 0:
        raise MorseLinkError(ErrorCode.NOT_NULL_HOMOLOGOUS, f"0 维链重数和为 {total}")
    if not cells:
        return PLChain.empty(1, model.kind)
    base = cells[0].vertices[0]
    chain = PLChain.empty(1, model.kind)
    for cell in cells[1:]:
        path = geodesic_path(model, base, cell.vertices[0], mesh_scale)
        chain = chain + PLChain.polyline(model.kind, path, cell.multiplicity)
    # 基点自身的重数由其余各点的路径起点抵消
    return chain.normalized()


def _strip(ray_p: List[np.ndarray], ray_q: List[np.ndarray], multiplicity: int) -> List[Cell]:
    """同一锥顶的两条细分射线之间的三角形带，定向与 [c, P, Q] 一致"""
    cells = [Cell(np.array([ray_p[0], ray_p[1], ray_q[1]]), multiplicity)]
    for i in range(1, len(ray_p) - 1):
        cells.append(Cell(np.array([ray_p[i], ray_p[i + 1], ray_q[i + 1]]), multiplicity))
        cells.append(Cell(np.array([ray_p[i], ray_q[i + 1], ray_q[i]]), multiplicity))
    return cells


def _sphere_apex(vertices: np.ndarray) -> np.ndarray:
    centered = vertices - vertices.mean(axis=0)
    _, vectors = np.linalg.eigh(centered.T @ centered)
    normal = vectors[:, 0]
    if (vertices @ normal).min() < (vertices @ -normal).min():
        normal = -normal
    if (vertices @ normal).min() < -1 + 1e-3:
        raise MorseLinkError(ErrorCode.INVALID_CONFIG, "闭链经过锥顶的对径点，无法作锥")
    return normal


def _bound_sphere_loop(b: PLChain, model: ManifoldModel, mesh_scale: float) -> PLChain:
    cells = b.normalized().cells
    vertices = np.vstack([c.vertices for c in cells])
    apex = _sphere_apex(vertices)
    levels = _pieces(float(np.max(np.arccos(np.clip(vertices @ apex, -1.0, 1.0)))), mesh_scale)
    rays: Dict[Tuple, List[np.ndarray]] = {}

    def ray(point: np.ndarray) -> List[np.ndarray]:
        key, _ = canonical_key(model.kind, point[None, :])
        if key not in rays:
            rays[key] = [apex] + [_slerp(apex, point, i / levels) for i in range(1, levels)] + [point]
        return rays[key]

    result: List[Cell] = []
    for cell in cells:
        p, q = cell.vertices
        result.extend(_strip(ray(p), ray(q), cell.multiplicity))
    return PLChain(2, model.kind, tuple(result)).normalized()


def _walk_loops(b: PLChain) -> List[List[np.ndarray]]:
    """
    把 1 维闭链拆成单位重数的有向环路，返回各环路的连续提升顶点（末点 = 首点 + D）

    Raises:
        MorseLinkError: 不是闭链（INVALID_CONFIG）
    """
    kind = b.kind
    edges = []
    for cell in b.normalized().cells:
        p, q = cell.vertices
        step = q - p
        step = step - TWO_PI * np.round(step / TWO_PI)
        for _ in range(abs(cell.multiplicity)):
            edges.append((p, step) if cell.multiplicity > 0 else (q, -step))

    def key(x):
        return canonical_key(kind, x[None, :])[0]

    outgoing: Dict[Tuple, List[int]] = {}
    for index, (start, _) in enumerate(edges):
        outgoing.setdefault(key(start), []).append(index)
    used = [False] * len(edges)
    loops = []
    for first in range(len(edges)):
        if used[first]:
            continue
        used[first] = True
        start, step = edges[first]
        points = [start.copy(), start + step]
        start_key = key(start)
        while key(points[-1]) != start_key:
            candidates = [i for i in outgoing.get(key(points[-1]), []) if not used[i]]
            if not candidates:
                raise MorseLinkError(ErrorCode.INVALID_CONFIG, "1 维链不是闭链")
            used[candidates[0]] = True
            points.append(points[-1] + edges[candidates[0]][1])
        loops.append(points)
    return loops


def _lattice(vector: np.ndarray) -> np.ndarray:
    return TWO_PI * np.round(vector / TWO_PI)


def _flat_rays(apex: np.ndarray, points: List[np.ndarray], mesh_scale: float) -> List[List[np.ndarray]]:
    """锥顶到各点的细分射线，各射线段数相同"""
    reach = max(float(np.linalg.norm(p - apex)) for p in points)
    levels = _pieces(reach, mesh_scale)
    return [[apex] + [apex + (p - apex) * (i / levels) for i in range(1, levels)] + [p] for p in points]


def _flat_cone(rays: List[List[np.ndarray]]) -> List[Cell]:
    cells: List[Cell] = []
    for j in range(len(rays) - 1):
        cells.extend(_strip(rays[j], rays[j + 1], 1))
    return cells


def _bound_torus_loop(b: PLChain, model: ManifoldModel, mesh_scale: float) -> PLChain:
    loops = _walk_loops(b)
    shifts = [_lattice(points[-1] - points[0]) for points in loops]
    total = np.sum(shifts, axis=0) if shifts else np.zeros(2)
    if np.any(np.abs(total) > 1e-6):
        raise MorseLinkError(ErrorCode.NOT_NULL_HOMOLOGOUS,
                             f"环路同调类之和 {np.round(total / TWO_PI).astype(int).tolist()} ≠ 0")
    for points, shift in zip(loops, shifts):
        # 末点对齐到精确的格点平移，保证抵消
        points[-1] = points[0] + shift

    cells: List[Cell] = []
    if all(not np.any(shift) for shift in shifts):
        for points in loops:
            apex = np.mean(points[:-1], axis=0) + _APEX_OFFSET
            cells.extend(_flat_cone(_flat_rays(apex, points, mesh_scale)))
        return PLChain(2, model.kind, tuple(cells)).normalized()

    # 公共锥顶 c：X = Σ(锥_j - T_j) - Σ L_j，
    # T_j = [c, P_j, c - D_j] 补齐环路首末射线，L_j = [c, c - S_{j-1}, c - S_j] 补齐 [c, c - D_j]
    apex = np.mean([np.mean(points[:-1], axis=0) for points in loops], axis=0) + _APEX_OFFSET
    partial = np.zeros(2)
    for points, shift in zip(loops, shifts):
        # 平移一个环路不改变其投影，取离锥顶最近的提升
        offset = _lattice(apex - points[0])
        rays = _flat_rays(apex, [p + offset for p in points], mesh_scale)
        cells.extend(_flat_cone(rays))
        if np.any(shift):
            toward_apex = rays[0][::-1]
            toward_shifted = [p - shift for p in rays[-1][::-1]]
            cells.extend(_strip(toward_shifted, toward_apex, -1))
        following = partial + shift
        if np.any(partial) or np.any(following):
            cells.append(Cell(np.array([apex, apex - partial, apex - following]), -1))
        partial = following
    return PLChain(2, model.kind, tuple(cells)).normalized()


def bounding_chain(b: PLChain, model: ManifoldModel, mesh_scale: Optional[float] = None) -> PLChain:
    """
    构造 X 使 ∂X = b

    Args:
        b: k 维闭链
        model: 模型
        mesh_scale: 细分尺度，缺省取 MESH_SCALE

    Returns:
        PLChain: k+1 维链

    Raises:
        MorseLinkError: NOT_NULL_HOMOLOGOUS（b 同调非零）/ INVALID_CONFIG（b 不是闭链或维数不支持）
    """
    mesh_scale = mesh_scale or settings.MESH_SCALE
    if model.kind is ModelKind.CIRCLE and b.dim == 1:
        # 圆周上的 1 维闭链是基本类的倍数
        if winding_number(b) != 0:
            raise MorseLinkError(ErrorCode.NOT_NULL_HOMOLOGOUS, f"环绕数 {winding_number(b)} ≠ 0")
        return PLChain.empty(2, model.kind)
    if b.dim >= model.n:
        raise MorseLinkError(ErrorCode.INVALID_CONFIG, f"不支持 {b.dim} 维链的有界链（n = {model.n}）")
    if not boundary_pl(b).is_empty():
        raise MorseLinkError(ErrorCode.INVALID_CONFIG, "输入不是闭链")
    if b.dim == 0:
        result = _bound_points(b, model, mesh_scale)
    elif b.is_empty():
        result = PLChain.empty(b.dim + 1, model.kind)
    elif model.kind is ModelKind.SPHERE:
        result = _bound_sphere_loop(b, model, mesh_scale)
    else:
        result = _bound_torus_loop(b, model, mesh_scale)
    logger.debug("有界链: %d 维输入 %d 个单形 → %d 个单形", b.dim, len(b.cells), len(result.cells))
    return result


def winding_number(b: PLChain) -> int:
    """圆周上 1 维闭链的环绕数"""
    total = 0.0
    for cell in b.normalized().cells:
        p, q = cell.vertices[:, 0]
        step = q - p
        step = step - TWO_PI * round(step / TWO_PI)
        total += cell.multiplicity * step
    return int(round(total / TWO_PI))
