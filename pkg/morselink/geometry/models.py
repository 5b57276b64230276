"""
模型流形

三类模型：圆周（1 维）、平环面（2 维，提升到 R² 的坐标）、嵌入单位球面（R³ 坐标）。
每个模型给出 Morse 函数及其梯度、Hessian，以及切空间标架、坐标回绕、位移与定向。
negated() 返回 -f 的同一模型视图。
"""

import copy
import logging
import math
from enum import Enum
from typing import Dict, Optional, Tuple

import numpy as np

from ..core.errors import ErrorCode, MorseLinkError

logger = logging.getLogger(__name__)

TWO_PI = 2.0 * math.pi


class ModelKind(str, Enum):
    """模型类型"""
    CIRCLE = "circle-union"
    TORUS = "flat-torus"
    SPHERE = "embedded-sphere"


class ManifoldModel:
    """
    模型流形基类

    子类实现 _f / _grad / _hess（未乘符号的原始函数），
    公开方法统一乘以 sign，sign = -1 即 -f。
    """

    kind: ModelKind
    n: int
    ambient: int
    euler: int
    # 有理系数 Betti 数 b_0..b_n
    betti: Tuple[int, ...]

    def __init__(self, name: str, census: Optional[Dict[int, int]] = None):
        self.name = name
        self.census = dict(census or {})
        self.sign = 1

    # ------------------------------------------------------------------
    # 函数值与导数
    # ------------------------------------------------------------------

    def value(self, x: np.ndarray) -> float:
        return float(self.sign * self._f(np.asarray(x, dtype=float)[None, :])[0])

    def values(self, points: np.ndarray) -> np.ndarray:
        return self.sign * self._f(np.atleast_2d(np.asarray(points, dtype=float)))

    def gradient(self, x: np.ndarray) -> np.ndarray:
        """黎曼梯度（环境坐标）"""
        return self.gradients(np.asarray(x, dtype=float)[None, :])[0]

    def gradients(self, points: np.ndarray) -> np.ndarray:
        return self.sign * self._grad(np.atleast_2d(np.asarray(points, dtype=float)))

    def hessian(self, x: np.ndarray) -> np.ndarray:
        """tangent_basis(x) 下的 n×n Hessian"""
        return self.sign * self._hess(np.asarray(x, dtype=float))

    @property
    def is_negated(self) -> bool:
        return self.sign == -1

    def negated(self) -> "ManifoldModel":
        """-f 视图（共享参数，不复制数据）"""
        other = copy.copy(self)
        other.sign = -self.sign
        return other

    # ------------------------------------------------------------------
    # 几何（子类实现）
    # ------------------------------------------------------------------

    def _f(self, points: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def _grad(self, points: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def _hess(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def tangent_basis(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def wrap(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def displacement(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def retract(self, x: np.ndarray, v: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def lift_near(self, x: np.ndarray, reference: np.ndarray) -> np.ndarray:
        """x 在 reference 附近的提升（球面上即 x 本身）"""
        return np.asarray(x, dtype=float)

    def seeds(self, grid: int) -> np.ndarray:
        raise NotImplementedError

    @property
    def diameter(self) -> float:
        raise NotImplementedError

    # ------------------------------------------------------------------
    # 通用几何
    # ------------------------------------------------------------------

    def distance(self, x: np.ndarray, y: np.ndarray) -> float:
        return float(np.linalg.norm(self.displacement(x, y)))

    def tangent_coords(self, x: np.ndarray, v: np.ndarray) -> np.ndarray:
        """切向量在正定向标架下的坐标"""
        return self.tangent_basis(x) @ np.asarray(v, dtype=float)

    def orientation(self, x: np.ndarray, *vectors: np.ndarray) -> float:
        """切向量组 (v1, ..., vn) 相对流形定向的行列式"""
        coords = np.array([self.tangent_coords(x, v) for v in vectors])
        if coords.shape == (1, 1):
            return float(coords[0, 0])
        return float(np.linalg.det(coords))

    def riemannian_hessian_ok(self, x: np.ndarray) -> bool:
        h = self.hessian(x)
        return bool(np.allclose(h, h.T, atol=1e-9))

    def check_gradient(self, points: np.ndarray, step: float = 1e-6) -> float:
        """
        梯度与有限差分方向导数的最大相对误差

        Args:
            points: 采样点
            step: 差分步长

        Returns:
            float: 最大相对误差
        """
        worst = 0.0
        for x in np.atleast_2d(points):
            basis = self.tangent_basis(x)
            grad = self.gradient(x)
            for e in basis:
                forward = self.value(self.retract(x, step * e))
                backward = self.value(self.retract(x, -step * e))
                numeric = (forward - backward) / (2 * step)
                analytic = float(grad @ e)
                scale = max(1.0, abs(analytic))
                worst = max(worst, abs(numeric - analytic) / scale)
        return worst

    def random_points(self, rng: np.random.Generator, count: int) -> np.ndarray:
        raise NotImplementedError

    def __repr__(self) -> str:
        sign = "-" if self.is_negated else ""
        return f"<{type(self).__name__} {sign}{self.name}>"


class FlatModel(ManifoldModel):
    """周期 2π 的平坦模型（圆周、环面），坐标保持提升不回绕"""

    def tangent_basis(self, x: np.ndarray) -> np.ndarray:
        return np.eye(self.n)

    def wrap(self, x: np.ndarray) -> np.ndarray:
        return np.mod(np.asarray(x, dtype=float), TWO_PI)

    def displacement(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        d = np.asarray(y, dtype=float) - np.asarray(x, dtype=float)
        return d - TWO_PI * np.round(d / TWO_PI)

    def retract(self, x: np.ndarray, v: np.ndarray) -> np.ndarray:
        return np.asarray(x, dtype=float) + np.asarray(v, dtype=float)

    def lift_near(self, x: np.ndarray, reference: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return x + TWO_PI * np.round((np.asarray(reference, dtype=float) - x) / TWO_PI)

    def seeds(self, grid: int) -> np.ndarray:
        axis = np.arange(grid) * (TWO_PI / grid)
        mesh = np.meshgrid(*([axis] * self.n), indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=1)

    @property
    def diameter(self) -> float:
        return math.pi * math.sqrt(self.n)

    def random_points(self, rng: np.random.Generator, count: int) -> np.ndarray:
        return rng.uniform(0.0, TWO_PI, size=(count, self.n))


class CircleModel(FlatModel):
    """
    圆周上的分段余弦插值函数

    临界值按逆时针循环给出（极大与极小交替）；第 i 段从 v_i 到 v_{i+1}，
    段长与 sqrt|v_{i+1} - v_i| 成正比，使函数整体 C²。
    """

    kind = ModelKind.CIRCLE
    n = 1
    ambient = 1
    euler = 0
    betti = (1, 1)

    def __init__(self, name: str, values, labels=None):
        values = [float(v) for v in values]
        if len(values) < 2 or len(values) % 2:
            raise MorseLinkError(ErrorCode.INVALID_CONFIG, "临界值个数必须为正偶数")
        count = len(values)
        for i in range(count):
            prev_v, v, next_v = values[i - 1], values[i], values[(i + 1) % count]
            if not ((v > prev_v and v > next_v) or (v < prev_v and v < next_v)):
                raise MorseLinkError(ErrorCode.INVALID_CONFIG, f"临界值未交替: 位置 {i}")
        super().__init__(name, census={1: count // 2, 0: count // 2})
        self.critical_values = np.array(values)
        self.labels = list(labels) if labels else None
        deltas = np.roll(self.critical_values, -1) - self.critical_values
        widths = np.sqrt(np.abs(deltas))
        self._deltas = deltas
        self._h = widths * (TWO_PI / widths.sum())
        self._starts = np.concatenate([[0.0], np.cumsum(self._h)[:-1]])

    @property
    def critical_positions(self) -> np.ndarray:
        return self._starts.copy()

    def _segment(self, theta: np.ndarray):
        t = np.mod(theta, TWO_PI)
        idx = np.clip(np.searchsorted(self._starts, t, side="right") - 1, 0, len(self._starts) - 1)
        s = (t - self._starts[idx]) / self._h[idx]
        return idx, s

    def _f(self, points: np.ndarray) -> np.ndarray:
        idx, s = self._segment(points[:, 0])
        return self.critical_values[idx] + self._deltas[idx] * (1 - np.cos(math.pi * s)) / 2

    def _grad(self, points: np.ndarray) -> np.ndarray:
        idx, s = self._segment(points[:, 0])
        slope = self._deltas[idx] * math.pi / (2 * self._h[idx]) * np.sin(math.pi * s)
        return slope[:, None]

    def _hess(self, x: np.ndarray) -> np.ndarray:
        idx, s = self._segment(np.atleast_1d(x[0]))
        curvature = self._deltas[idx] * (math.pi / self._h[idx]) ** 2 / 2 * np.cos(math.pi * s)
        return np.array([[float(curvature[0])]])


class TorusModel(FlatModel):
    """
    平环面 [0,2π)² 上的 cos x + cos y 加一个高斯鼓包

    鼓包产生一对可消去的极大/鞍点。
    """

    kind = ModelKind.TORUS
    n = 2
    ambient = 2
    euler = 0
    betti = (1, 2, 1)

    def __init__(self, name: str, amplitude: float = 0.8, width2: float = 0.09,
                 center=(math.pi / 2, math.pi / 2), census=None):
        super().__init__(name, census=census)
        self.amplitude = float(amplitude)
        self.width2 = float(width2)
        self.center = np.asarray(center, dtype=float)

    def _bump(self, points: np.ndarray):
        delta = points - self.center
        delta = delta - TWO_PI * np.round(delta / TWO_PI)
        weight = self.amplitude * np.exp(-np.sum(delta ** 2, axis=1) / self.width2)
        return delta, weight

    def _f(self, points: np.ndarray) -> np.ndarray:
        _, weight = self._bump(points)
        return np.cos(points[:, 0]) + np.cos(points[:, 1]) + weight

    def _grad(self, points: np.ndarray) -> np.ndarray:
        delta, weight = self._bump(points)
        return -np.sin(points) - (2.0 / self.width2) * weight[:, None] * delta

    def _hess(self, x: np.ndarray) -> np.ndarray:
        delta, weight = self._bump(x[None, :])
        delta, weight = delta[0], float(weight[0])
        h = np.diag(-np.cos(x))
        h = h + weight * (4.0 * np.outer(delta, delta) / self.width2 ** 2 - 2.0 * np.eye(2) / self.width2)
        return h


class SphereModel(ManifoldModel):
    """
    单位球面上的函数 f = F|_{S²}

    子类给出环境函数 F 的值、梯度与 Hessian（R³ 中）。
    """

    kind = ModelKind.SPHERE
    n = 2
    ambient = 3
    euler = 2
    betti = (1, 0, 1)

    # 环境函数（向量化）
    def ambient_value(self, points: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def ambient_gradient(self, points: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def ambient_hessian(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def _f(self, points: np.ndarray) -> np.ndarray:
        return self.ambient_value(points)

    def _grad(self, points: np.ndarray) -> np.ndarray:
        g = self.ambient_gradient(points)
        normal = np.sum(g * points, axis=1, keepdims=True)
        return g - normal * points

    def _hess(self, x: np.ndarray) -> np.ndarray:
        basis = self.tangent_basis(x)
        g = self.ambient_gradient(x[None, :])[0]
        h = self.ambient_hessian(x) - float(g @ x) * np.eye(3)
        return basis @ h @ basis.T

    def tangent_basis(self, x: np.ndarray) -> np.ndarray:
        """正定向标架：det[x, e1, e2] > 0"""
        x = np.asarray(x, dtype=float)
        x = x / np.linalg.norm(x)
        anchor = np.array([0.0, 0.0, 1.0]) if abs(x[2]) < 0.9 else np.array([1.0, 0.0, 0.0])
        e1 = anchor - (anchor @ x) * x
        e1 = e1 / np.linalg.norm(e1)
        e2 = np.cross(x, e1)
        return np.array([e1, e2])

    def wrap(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return x / np.linalg.norm(x, axis=-1, keepdims=True)

    def displacement(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        """y 相对 x 的切向位移（对数映射）"""
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        cos_angle = float(np.clip(x @ y, -1.0, 1.0))
        tangent = y - cos_angle * x
        norm = np.linalg.norm(tangent)
        if norm < 1e-15:
            if cos_angle > 0:
                return np.zeros(3)
            # 对径点：任取一条测地线，长度为 π
            return math.pi * self.tangent_basis(x)[0]
        return tangent * (math.acos(cos_angle) / norm)

    def retract(self, x: np.ndarray, v: np.ndarray) -> np.ndarray:
        y = np.asarray(x, dtype=float) + np.asarray(v, dtype=float)
        return y / np.linalg.norm(y)

    def seeds(self, grid: int) -> np.ndarray:
        polar = (np.arange(grid) + 0.5) * (math.pi / grid)
        azimuth = np.arange(grid) * (TWO_PI / grid)
        p, a = np.meshgrid(polar, azimuth, indexing="ij")
        points = np.stack([np.sin(p) * np.cos(a), np.sin(p) * np.sin(a), np.cos(p)], axis=-1)
        return points.reshape(-1, 3)

    @property
    def diameter(self) -> float:
        return math.pi

    def random_points(self, rng: np.random.Generator, count: int) -> np.ndarray:
        points = rng.normal(size=(count, 3))
        return points / np.linalg.norm(points, axis=1, keepdims=True)


class HeightSphere(SphereModel):
    """高度函数 f = z"""

    def __init__(self, name: str):
        super().__init__(name, census={2: 1, 0: 1})

    def ambient_value(self, points: np.ndarray) -> np.ndarray:
        return points[:, 2].copy()

    def ambient_gradient(self, points: np.ndarray) -> np.ndarray:
        g = np.zeros_like(points)
        g[:, 2] = 1.0
        return g

    def ambient_hessian(self, x: np.ndarray) -> np.ndarray:
        return np.zeros((3, 3))


class RemappedSphere(SphereModel):
    """
    f = φ ∘ f0，f0 = z + κx² + δx

    φ 为严格递增的 PCHIP 插值，把 f0 的临界值映到指定的目标临界值；
    临界点集合与指标不变。
    """

    def __init__(self, name: str, remap, curvature: float = 1.0, tilt: float = 0.3, census=None):
        super().__init__(name, census=census)
        self.curvature = float(curvature)
        self.tilt = float(tilt)
        self.remap = remap
        self._slope = remap.derivative()
        self._bend = remap.derivative(2)

    def base_value(self, points: np.ndarray) -> np.ndarray:
        return points[:, 2] + self.curvature * points[:, 0] ** 2 + self.tilt * points[:, 0]

    def _base_gradient(self, points: np.ndarray) -> np.ndarray:
        g = np.zeros_like(points)
        g[:, 0] = 2 * self.curvature * points[:, 0] + self.tilt
        g[:, 2] = 1.0
        return g

    def ambient_value(self, points: np.ndarray) -> np.ndarray:
        return self.remap(self.base_value(points))

    def ambient_gradient(self, points: np.ndarray) -> np.ndarray:
        slope = self._slope(self.base_value(points))
        return slope[:, None] * self._base_gradient(points)

    def ambient_hessian(self, x: np.ndarray) -> np.ndarray:
        point = x[None, :]
        base = float(self.base_value(point)[0])
        g0 = self._base_gradient(point)[0]
        h0 = np.zeros((3, 3))
        h0[0, 0] = 2 * self.curvature
        return float(self._bend(base)) * np.outer(g0, g0) + float(self._slope(base)) * h0
