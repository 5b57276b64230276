"""
临界点定位

网格播种（|grad|² 的离散局部极小）+ 切坐标 Newton 迭代，去重后按 Hessian 特征值定指标，
并给出满足定向约定的稳定/不稳定标架。
"""

import csv
import io
import logging
from dataclasses import dataclass, field, replace
from typing import Dict, List, Optional

import numpy as np

from ..core.config import settings
from ..core.errors import ErrorCode, MorseLinkError
from .models import ManifoldModel, ModelKind

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class CriticalPoint:
    """
    临界点

    unstable / stable 为环境坐标下的正交标架（行向量），
    radius 为平凡化球半径。
    """
    name: str
    coords: np.ndarray
    index: int
    value: float
    unstable: np.ndarray
    stable: np.ndarray
    eigenvalues: np.ndarray
    radius: float = 0.05

    def negated(self, n: int) -> "CriticalPoint":
        """-f 下的同一临界点：不稳定标架取原稳定标架，稳定标架取 (-1)^{k(n-k)} 倍原不稳定标架"""
        k = self.index
        factor = -1.0 if (k * (n - k)) % 2 else 1.0
        return replace(
            self,
            index=n - k,
            value=-self.value,
            unstable=self.stable.copy(),
            stable=factor * self.unstable,
            eigenvalues=-self.eigenvalues,
        )

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "coords": [float(c) for c in self.coords],
            "index": self.index,
            "value": self.value,
            "radius": self.radius,
        }


def _grid_candidates(model: ManifoldModel, grid: int) -> np.ndarray:
    """|grad|² 在网格上的离散局部极小"""
    seeds = model.seeds(grid)
    norms = np.sum(model.gradients(seeds) ** 2, axis=1)
    shape = (grid,) * model.n
    field_ = norms.reshape(shape)
    is_min = np.ones(shape, dtype=bool)
    for axis in range(model.n):
        periodic = not (model.kind is ModelKind.SPHERE and axis == 0)
        for shift in (1, -1):
            neighbour = np.roll(field_, shift, axis=axis)
            if not periodic:
                # 极角方向不回绕：边界行只和内侧比较
                edge = [slice(None)] * model.n
                edge[axis] = 0 if shift == 1 else -1
                neighbour[tuple(edge)] = np.inf
            is_min &= field_ <= neighbour
    candidates = seeds[is_min.ravel()]
    if model.kind is ModelKind.SPHERE:
        poles = np.array([[0.0, 0.0, 1.0], [0.0, 0.0, -1.0]])
        candidates = np.vstack([candidates, poles])
    return candidates


def _newton(model: ManifoldModel, x: np.ndarray) -> Optional[np.ndarray]:
    for _ in range(settings.NEWTON_MAX_ITER):
        g = model.gradient(x)
        if np.linalg.norm(g) < settings.NEWTON_TOL:
            return x
        basis = model.tangent_basis(x)
        h = model.hessian(x)
        try:
            step = np.linalg.solve(h, -(basis @ g))
        except np.linalg.LinAlgError:
            return None
        if np.linalg.norm(step) > 0.5:
            step = step * (0.5 / np.linalg.norm(step))
        x = model.retract(x, basis.T @ step)
        if np.linalg.norm(step) < 1e-15:
            break
    if np.linalg.norm(model.gradient(x)) < 1e-10:
        return x
    return None


def _normalize_sign(v: np.ndarray) -> np.ndarray:
    nonzero = np.flatnonzero(np.abs(v) > 1e-12)
    if nonzero.size and v[nonzero[0]] < 0:
        return -v
    return v


def _frames(model: ManifoldModel, x: np.ndarray):
    """
    按 Hessian 特征分解构造标架（切坐标中定向，再换回环境坐标）

    Returns:
        (index, eigenvalues, unstable, stable)
    """
    n = model.n
    h = model.hessian(x)
    eigenvalues, vectors = np.linalg.eigh((h + h.T) / 2)
    if np.min(np.abs(eigenvalues)) < settings.DEGENERACY_EPS:
        raise MorseLinkError(
            ErrorCode.DEGENERATE_CRITICAL_POINT,
            f"{model.name} 在 {np.round(x, 6).tolist()} 处 Hessian 特征值 {eigenvalues.tolist()}",
        )
    negative = [_normalize_sign(vectors[:, i]) for i in range(n) if eigenvalues[i] < 0]
    positive = [_normalize_sign(vectors[:, i]) for i in range(n) if eigenvalues[i] > 0]
    k = len(negative)
    if k == n:
        if np.linalg.det(np.array(negative)) < 0:
            negative[-1] = -negative[-1]
    elif k == 0:
        if np.linalg.det(np.array(positive)) < 0:
            positive[-1] = -positive[-1]
    elif np.linalg.det(np.array(positive + negative)) < 0:
        # (stable, unstable) 正定向
        positive[-1] = -positive[-1]
    basis = model.tangent_basis(x)
    unstable = np.array([basis.T @ v for v in negative]).reshape(k, model.ambient)
    stable = np.array([basis.T @ v for v in positive]).reshape(n - k, model.ambient)
    return k, eigenvalues, unstable, stable


def _names(model: ManifoldModel, raw: List[dict]) -> None:
    """极大 M1.. 按值降序，鞍点 s1.. 按值降序，极小 m1.. 按值升序；圆周模型可用自带标签"""
    labels = getattr(model, "labels", None)
    if labels:
        positions = model.critical_positions
        for item in raw:
            offsets = np.abs(model.displacement(positions[:, None], item["coords"][None, :]))[:, 0]
            item["name"] = labels[int(np.argmin(offsets))]
        return
    n = model.n
    prefixes = {n: "M", 0: "m"}
    for index in range(n + 1):
        group = [item for item in raw if item["index"] == index]
        group.sort(key=lambda item: item["value"], reverse=(index != 0))
        for i, item in enumerate(group, start=1):
            item["name"] = f"{prefixes.get(index, 's')}{i}"


def locate_critical_points(model: ManifoldModel, tol: Optional[float] = None) -> List[CriticalPoint]:
    """
    定位全部临界点

    Args:
        model: 模型（f 方向；对 -f 请对结果调用 CriticalPoint.negated）
        tol: 去重距离，缺省 1e-6

    Returns:
        List[CriticalPoint]: 按 (指标降序, 名称) 排序

    Raises:
        MorseLinkError: DEGENERATE_CRITICAL_POINT / CENSUS_MISMATCH
    """
    tol = tol or 1e-6
    found: List[np.ndarray] = []
    for seed in _grid_candidates(model, settings.SEED_GRID):
        x = _newton(model, seed)
        if x is None:
            continue
        x = model.wrap(x)
        if any(model.distance(x, y) < tol for y in found):
            continue
        found.append(x)

    raw = []
    for x in found:
        k, eigenvalues, unstable, stable = _frames(model, x)
        raw.append({"coords": x, "index": k, "value": model.value(x),
                    "eigenvalues": eigenvalues, "unstable": unstable, "stable": stable})

    census = {index: sum(1 for item in raw if item["index"] == index) for index in range(model.n + 1)}
    expected = {index: model.census.get(index, 0) for index in range(model.n + 1)}
    if model.census and census != expected:
        raise MorseLinkError(ErrorCode.CENSUS_MISMATCH, f"{model.name}: 期望 {expected}，实际 {census}")
    euler = sum((-1) ** item["index"] for item in raw)
    if euler != model.euler:
        raise MorseLinkError(ErrorCode.CENSUS_MISMATCH, f"{model.name}: 交错和 {euler} ≠ χ = {model.euler}")

    _names(model, raw)
    points = []
    for item in raw:
        others = [model.distance(item["coords"], other["coords"]) for other in raw if other is not item]
        radius = min([settings.BALL_RADIUS] + [0.25 * d for d in others])
        points.append(CriticalPoint(
            name=item["name"], coords=item["coords"], index=item["index"], value=item["value"],
            unstable=item["unstable"], stable=item["stable"], eigenvalues=item["eigenvalues"], radius=radius,
        ))
    points.sort(key=lambda p: (-p.index, p.name))
    logger.info("%s: 定位到 %d 个临界点 %s", model.name, len(points), census)
    return points


def normal_form_residual(model: ManifoldModel, crit: CriticalPoint, radius: float, samples: int = 16) -> float:
    """
    局部二次型逼近误差 max |f(x) - f(p) - ½ xᵀHx| / |x|²

    Args:
        model: 模型
        crit: 临界点
        radius: 采样半径
        samples: 方向数

    Returns:
        float: 最大相对误差
    """
    basis = model.tangent_basis(crit.coords)
    h = model.hessian(crit.coords)
    worst = 0.0
    for j in range(samples):
        angle = 2 * np.pi * j / samples
        direction = np.array([np.cos(angle), np.sin(angle)])[: model.n]
        if model.n == 1:
            direction = np.array([1.0 if j % 2 == 0 else -1.0])
        v = radius * direction
        x = model.retract(crit.coords, basis.T @ v)
        # 球面上按测地距离度量
        actual = model.tangent_coords(crit.coords, model.displacement(crit.coords, x))
        quadratic = 0.5 * actual @ h @ actual
        worst = max(worst, abs(model.value(x) - crit.value - quadratic) / float(actual @ actual))
    return worst


def census_csv(points: List[CriticalPoint]) -> str:
    """临界点普查 CSV：name, coords, index, value"""
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(["name", "coords", "index", "value"])
    for p in points:
        writer.writerow([p.name, " ".join(f"{c:.12g}" for c in p.coords), p.index, f"{p.value:.12g}"])
    return buffer.getvalue()


def euler_characteristic(points: List[CriticalPoint]) -> int:
    return sum((-1) ** p.index for p in points)


def by_name(points: List[CriticalPoint]) -> Dict[str, CriticalPoint]:
    return {p.name: p for p in points}
