"""
负梯度流积分

solve_ivp（RK45）积分 ẋ = -∇f(x)，进入汇点平凡化球时以终止事件停下；
打靶用的定步长 RK4 对整批射线向量化推进。
"""

import logging
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy.integrate import solve_ivp

from ..core.config import settings
from ..core.errors import ErrorCode, MorseLinkError
from ..geometry.critical import CriticalPoint
from ..geometry.models import ManifoldModel, ModelKind

logger = logging.getLogger(__name__)

# 守卫球取平凡化半径的这一比例
GUARD_FRACTION = 0.01
# 球面积分结果允许的模长偏差（超出视为离开流形）
SPHERE_DRIFT = 1e-3


@dataclass(frozen=True, eq=False)
class FlowPath:
    """
    一段积分结果

    points 为环境坐标（平坦模型保持连续提升），sink 为停下时所在球的临界点；
    guarded 为 True 表示停在守卫点（通常是鞍点）附近。
    """
    times: np.ndarray
    points: np.ndarray
    sink: Optional[CriticalPoint]
    guarded: bool = False

    @property
    def end(self) -> np.ndarray:
        return self.points[-1]


def offsets(model: ManifoldModel, base: np.ndarray, points: np.ndarray) -> np.ndarray:
    """
    批量位移（球面上取弦向量，符号判定与对数映射一致）

    Args:
        model: 模型
        base: 基点
        points: (m, d) 点

    Returns:
        np.ndarray: (m, d)
    """
    points = np.atleast_2d(np.asarray(points, dtype=float))
    if model.kind is ModelKind.SPHERE:
        return points - np.asarray(base, dtype=float)[None, :]
    d = points - np.asarray(base, dtype=float)[None, :]
    return d - 2.0 * np.pi * np.round(d / (2.0 * np.pi))


def retract_rows(model: ManifoldModel, base: np.ndarray, vectors: np.ndarray) -> np.ndarray:
    points = np.asarray(base, dtype=float)[None, :] + np.asarray(vectors, dtype=float)
    if model.kind is ModelKind.SPHERE:
        points = points / np.linalg.norm(points, axis=1, keepdims=True)
    return points


def velocities(model: ManifoldModel, x: np.ndarray) -> np.ndarray:
    """
    整批点的流速 -∇f

    球面上先把点投影回单位球再取切向梯度，并加上指向球面的修正项
    -(|x|² - 1) x，使积分器的截断误差不会累积成法向漂移。
    """
    x = np.atleast_2d(np.asarray(x, dtype=float))
    if model.kind is not ModelKind.SPHERE:
        return -model.gradients(x)
    norm2 = np.sum(x * x, axis=1, keepdims=True)
    u = x / np.sqrt(norm2)
    v = -model.gradients(u)
    v = v - np.sum(v * u, axis=1, keepdims=True) * u
    return v - (norm2 - 1.0) * u


def rk4_step(model: ManifoldModel, x: np.ndarray, h: float) -> np.ndarray:
    """
    整批点的一步经典 RK4

    定步长，不做误差控制：打靶只比较射线的去向，调用方取 h = FLOW_MAX_STEP，
    与 solve_ivp 的最大步长一致。球面上每步后归一化。
    """
    k1 = velocities(model, x)
    k2 = velocities(model, x + 0.5 * h * k1)
    k3 = velocities(model, x + 0.5 * h * k2)
    k4 = velocities(model, x + h * k3)
    out = x + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
    if model.kind is ModelKind.SPHERE:
        out = out / np.linalg.norm(out, axis=1, keepdims=True)
    return out


def _ball_event(model: ManifoldModel, center: np.ndarray, radius: float):
    def event(t, x):
        if model.kind is ModelKind.SPHERE:
            x = x / np.linalg.norm(x)
        return model.distance(center, x) - radius

    event.terminal = True
    event.direction = -1
    return event


def integrate(
    model: ManifoldModel,
    x0: np.ndarray,
    crits: Sequence[CriticalPoint],
    tol: Optional[float] = None,
    sinks: Optional[Sequence[CriticalPoint]] = None,
    guards: Optional[Sequence[CriticalPoint]] = None,
    max_time: Optional[float] = None,
) -> FlowPath:
    """
    从 x0 沿 -∇f 积分，直到进入某个汇点的平凡化球

    Args:
        model: 模型（方向已含 f 或 -f）
        x0: 起点（非临界点）
        crits: 该方向下的临界点
        tol: 相对容差，缺省取 FLOW_RTOL
        sinks: 终止球所属的临界点，缺省为 crits 中指标 0 的点
        guards: 守卫点，缺省为 crits 中其余点；进入其小球同样停下并标记 guarded
        max_time: 积分时长上限

    Returns:
        FlowPath: 轨道采样与汇点

    Raises:
        MorseLinkError: STEP_LIMIT_EXCEEDED / LEFT_DOMAIN / INVALID_CONFIG
    """
    x0 = np.asarray(x0, dtype=float)
    if float(np.linalg.norm(model.gradient(x0))) < settings.NEWTON_TOL:
        raise MorseLinkError(ErrorCode.INVALID_CONFIG, f"起点 {np.round(x0, 9).tolist()} 是临界点")
    sinks = list(sinks) if sinks is not None else [c for c in crits if c.index == 0]
    if guards is None:
        sink_names = {c.name for c in sinks}
        guards = [c for c in crits if c.name not in sink_names]

    for c in sinks:
        if model.distance(c.coords, x0) <= c.radius:
            return FlowPath(np.array([0.0]), x0[None, :].copy(), c)

    targets = [(c, c.radius, False) for c in sinks] + [(c, GUARD_FRACTION * c.radius, True) for c in guards]
    events = [_ball_event(model, c.coords, r) for c, r, _ in targets]

    def rhs(t, x):
        return velocities(model, x[None, :])[0]

    rtol = tol or settings.FLOW_RTOL
    horizon = max_time or settings.FLOW_MAX_TIME
    sol = solve_ivp(rhs, (0.0, horizon), x0, method="RK45", events=events, rtol=rtol,
                    atol=settings.FLOW_ATOL, max_step=settings.FLOW_MAX_STEP)
    points = sol.y.T
    if not np.all(np.isfinite(points)):
        raise MorseLinkError(ErrorCode.LEFT_DOMAIN, f"积分出现非有限值（起点 {np.round(x0, 9).tolist()}）")
    if model.kind is ModelKind.SPHERE:
        drift = float(np.max(np.abs(np.linalg.norm(points, axis=1) - 1.0)))
        if drift > SPHERE_DRIFT:
            raise MorseLinkError(ErrorCode.LEFT_DOMAIN, f"离开球面: 模长偏差 {drift:.3g}")
        points = points / np.linalg.norm(points, axis=1, keepdims=True)

    for j, (crit, _, guarded) in enumerate(targets):
        if sol.t_events[j].size:
            logger.debug("轨道停在 %s（t=%.4g，guarded=%s）", crit.name, sol.t_events[j][0], guarded)
            return FlowPath(sol.t, points, crit, guarded)
    raise MorseLinkError(ErrorCode.STEP_LIMIT_EXCEEDED,
                         f"t = {horizon} 内未进入任何临界点球（起点 {np.round(x0, 9).tolist()}）")
