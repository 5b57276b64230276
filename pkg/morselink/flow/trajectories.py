"""
连接轨道的搜索与计数

指标 1 的源点：沿 ±u_p 两支直接积分；
指标 2 的源点：在不稳定圆周上均匀打靶，按经过鞍点时落在 W^u(q) 哪一侧分类，
相邻射线分类翻转处即有一条到 q 的连接轨道，再细分二分到参数容差。
"""

import csv
import io
import logging
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from ..core.config import settings
from ..core.errors import ErrorCode, MorseLinkError
from ..geometry.critical import CriticalPoint, locate_critical_points
from ..geometry.models import ManifoldModel
from .integrate import FlowPath, integrate, offsets, retract_rows, rk4_step

logger = logging.getLogger(__name__)

# 射线正好落在 W^s(q) 上时收敛到 q 而不再下降，记为 STUCK
STUCK = 2
STUCK_DISTANCE = 1e-8


@dataclass(frozen=True, eq=False)
class Trajectory:
    """
    一条连接轨道

    points 首尾为源点与汇点（平坦模型下为与采样连续的提升），
    对应 times 记为 -inf / +inf；angle 为打靶参数（仅指标 2 的源点）。
    """
    source: CriticalPoint
    sink: CriticalPoint
    sign: int
    times: np.ndarray
    points: np.ndarray
    angle: Optional[float] = None

    @property
    def key(self) -> Tuple[str, str]:
        return self.source.name, self.sink.name

    @property
    def samples(self) -> List[Tuple[float, np.ndarray]]:
        return [(float(t), x) for t, x in zip(self.times, self.points) if np.isfinite(t)]

    def segments(self) -> np.ndarray:
        return np.stack([self.points[:-1], self.points[1:]], axis=1)

    def reversed(self, source: CriticalPoint, sink: CriticalPoint, sign: int) -> "Trajectory":
        """-f 下的同一条轨道（时间反向）"""
        return Trajectory(source, sink, sign, -self.times[::-1], self.points[::-1].copy(), self.angle)

    def is_descending(self, model: ManifoldModel) -> bool:
        values = model.values(self.points)
        return bool(np.all(np.diff(values) < 0))

    def to_row(self) -> dict:
        return {
            "source": self.source.name,
            "sink": self.sink.name,
            "sign": self.sign,
            "samples": len(self.samples),
            "angle": "" if self.angle is None else f"{self.angle:.12f}",
        }


def critical_points_for(model: ManifoldModel) -> List[CriticalPoint]:
    """模型当前方向下的临界点；-f 的标架由 f 的标架按约定换出"""
    if model.is_negated:
        return [c.negated(model.n) for c in locate_critical_points(model.negated())]
    return locate_critical_points(model)


def trajectory_sign(model: ManifoldModel, source: CriticalPoint, sink: CriticalPoint, points: np.ndarray) -> int:
    """
    连接轨道的定向符号

    指标 1 的源点：沿 +u_p 离开为 +1；
    n = 2 且指标 2 的源点：轨道从 q + s 一侧进入鞍点 q，符号为 -sign det[s, u_q]。

    Args:
        model: 模型
        source: 源点
        sink: 汇点
        points: 轨道采样（首尾为源、汇）

    Returns:
        int: ±1
    """
    if source.index == 1:
        leaving = model.displacement(source.coords, points[1])
        return 1 if float(leaving @ source.unstable[0]) > 0 else -1
    if source.index == 2 and model.n == 2:
        arriving = model.displacement(sink.coords, points[-2])
        side = 1.0 if float(arriving @ sink.stable[0]) > 0 else -1.0
        det = model.orientation(sink.coords, side * sink.stable[0], sink.unstable[0])
        return -1 if det > 0 else 1
    raise MorseLinkError(ErrorCode.INVALID_CONFIG, f"不支持指标 {source.index} 的源点（n = {model.n}）")


def _assemble(model: ManifoldModel, source: CriticalPoint, sink: CriticalPoint, path: FlowPath,
              angle: Optional[float] = None) -> Trajectory:
    head = model.lift_near(source.coords, path.points[0])
    tail = model.lift_near(sink.coords, path.points[-1])
    points = np.vstack([head[None, :], path.points, tail[None, :]])
    times = np.concatenate([[-np.inf], path.times, [np.inf]])
    sign = trajectory_sign(model, source, sink, points)
    return Trajectory(source, sink, sign, times, points, angle)


# ----------------------------------------------------------------------
# 指标 1：两支
# ----------------------------------------------------------------------

def _branches(model: ManifoldModel, p: CriticalPoint, crits: Sequence[CriticalPoint]) -> List[Trajectory]:
    sinks = [c for c in crits if c.index == p.index - 1]
    guards = [c for c in crits if c.index >= p.index and c.name != p.name]
    found = []
    for direction in (1.0, -1.0):
        x0 = model.retract(p.coords, direction * settings.BRANCH_OFFSET * p.unstable[0])
        path = integrate(model, x0, crits, sinks=sinks, guards=guards)
        if path.guarded:
            raise MorseLinkError(ErrorCode.NONTRANSVERSE_CONNECTION, f"{p.name} 的一支流向 {path.sink.name}")
        found.append(_assemble(model, p, path.sink, path))
    return found


# ----------------------------------------------------------------------
# 指标 2：打靶 + 细分二分
# ----------------------------------------------------------------------

def _saddle_margin(q: CriticalPoint) -> float:
    """分类所用的水平 f(q) - η"""
    return 0.5 * abs(float(np.min(q.eigenvalues))) * q.radius ** 2


def ray_starts(model: ManifoldModel, p: CriticalPoint, angles: np.ndarray) -> np.ndarray:
    u1, u2 = p.unstable
    dirs = np.cos(angles)[:, None] * u1[None, :] + np.sin(angles)[:, None] * u2[None, :]
    return retract_rows(model, p.coords, settings.SHOOTING_RADIUS * dirs)


def shoot(model: ManifoldModel, p: CriticalPoint, angles: np.ndarray, saddles: Sequence[CriticalPoint],
          crits: Sequence[CriticalPoint]) -> np.ndarray:
    """
    向量化打靶并按鞍点分类

    射线首次降到 f(q) - η 以下时，若距 q 不超过 SADDLE_WINDOW，
    记 sign⟨x - q, u_q⟩，否则记 0；落入极小点球后不再推进。
    尚未定类却已进入 q 的 STUCK_DISTANCE 邻域的射线记 STUCK 并停止推进
    （对称模型里恰好沿分界线出发的射线）。

    Args:
        model: 模型
        p: 指标 2 的源点
        angles: 射线参数
        saddles: 需要分类的鞍点
        crits: 全部临界点

    Returns:
        np.ndarray: (射线数, 鞍点数) 的 {-1, 0, +1, STUCK}
    """
    angles = np.asarray(angles, dtype=float)
    x = ray_starts(model, p, angles)
    count = len(angles)
    levels = np.array([q.value - _saddle_margin(q) for q in saddles])
    classes = np.zeros((count, len(saddles)), dtype=int)
    settled = np.zeros((count, len(saddles)), dtype=bool)
    minima = [c for c in crits if c.index == 0]
    h = settings.FLOW_MAX_STEP
    active = np.arange(count)
    for _ in range(int(settings.FLOW_MAX_TIME / h)):
        if active.size == 0:
            break
        x[active] = rk4_step(model, x[active], h)
        xa = x[active]
        fa = model.values(xa)
        for j, q in enumerate(saddles):
            fresh = ~settled[active, j] & (fa < levels[j])
            if not fresh.any():
                continue
            rows = active[fresh]
            off = offsets(model, q.coords, xa[fresh])
            side = np.where(off @ q.unstable[0] > 0, 1, -1)
            classes[rows, j] = np.where(np.linalg.norm(off, axis=1) < settings.SADDLE_WINDOW, side, 0)
            settled[rows, j] = True
        for j, q in enumerate(saddles):
            waiting = ~settled[active, j]
            if not waiting.any():
                continue
            near = np.zeros(active.size, dtype=bool)
            near[waiting] = np.linalg.norm(offsets(model, q.coords, xa[waiting]), axis=1) < STUCK_DISTANCE
            if near.any():
                rows = active[near]
                classes[rows, j] = STUCK
                settled[rows] = True
        in_sink = np.zeros(active.size, dtype=bool)
        for m in minima:
            in_sink |= np.linalg.norm(offsets(model, m.coords, xa), axis=1) < m.radius
        settled[active[in_sink]] = True
        active = active[~settled[active].all(axis=1)]
    if active.size:
        logger.debug("%s: %d 条射线在时限内未定类", p.name, active.size)
    return classes


def _refine(model: ManifoldModel, p: CriticalPoint, q: CriticalPoint, lo: float, hi: float, side: int,
            crits: Sequence[CriticalPoint]) -> float:
    """在 [lo, hi] 内把分类从 side 翻到 -side 的位置细分到 BISECTION_TOL；命中 STUCK 射线时直接返回其参数"""
    splits = settings.REFINE_SPLITS
    while hi - lo > settings.BISECTION_TOL:
        grid = np.linspace(lo, hi, splits + 2)
        inner = shoot(model, p, grid[1:-1], [q], crits)[:, 0]
        seq = [side] + [int(c) for c in inner] + [-side]
        for i in range(len(seq) - 1):
            if seq[i] == side and seq[i + 1] == STUCK:
                return float(grid[i + 1])
            if seq[i] == side and seq[i + 1] == -side:
                lo, hi = float(grid[i]), float(grid[i + 1])
                break
        else:
            raise MorseLinkError(ErrorCode.BISECTION_FAILED,
                                 f"{p.name}→{q.name}: 区间 [{lo:.12g}, {hi:.12g}] 内分类不连续 {seq}")
    return 0.5 * (lo + hi)


def _separatrices(model: ManifoldModel, p: CriticalPoint, crits: Sequence[CriticalPoint],
                  rays: Optional[int] = None) -> List[Trajectory]:
    saddles = [c for c in crits if c.index == p.index - 1]
    if not saddles:
        return []
    rays = rays or settings.SHOOTING_RAYS
    angles = np.arange(rays) * (2.0 * np.pi / rays)
    classes = shoot(model, p, angles, saddles, crits)
    found = []
    for j, q in enumerate(saddles):
        c = classes[:, j]
        flips = np.flatnonzero(c * np.roll(c, -1) == -1)
        # side, STUCK, -side：中间那条射线本身就是连接轨道
        hits = np.flatnonzero((np.abs(c) == 1) & (np.roll(c, -1) == STUCK) & (np.roll(c, -2) == -c))
        starts = [(int(i), False) for i in flips] + [(int(i), True) for i in hits]
        for i, exact in sorted(starts):
            if exact:
                angle = float(angles[(i + 1) % rays])
            else:
                lo = float(angles[i])
                hi = float(angles[i + 1]) if i + 1 < rays else float(angles[0]) + 2.0 * np.pi
                angle = _refine(model, p, q, lo, hi, int(c[i]), crits)
            x0 = ray_starts(model, p, np.array([angle]))[0]
            try:
                path = integrate(model, x0, crits, sinks=[q], guards=[])
            except MorseLinkError as exc:
                raise MorseLinkError(ErrorCode.BISECTION_FAILED, f"{p.name}→{q.name}: {exc.detail}") from exc
            found.append(_assemble(model, p, q, path, angle=float(np.mod(angle, 2.0 * np.pi))))
        logger.debug("%s→%s: %d 条连接轨道", p.name, q.name, len(starts))
    return found


def trajectories_from(model: ManifoldModel, p: CriticalPoint, crits: Sequence[CriticalPoint],
                      rays: Optional[int] = None) -> List[Trajectory]:
    """
    p 出发、到指标低 1 的临界点的全部连接轨道

    Raises:
        MorseLinkError: NONTRANSVERSE_CONNECTION / BISECTION_FAILED / STEP_LIMIT_EXCEEDED / LEFT_DOMAIN
    """
    if p.index == 0:
        return []
    if p.index == 1:
        return _branches(model, p, crits)
    if p.index == 2 and model.n == 2:
        return _separatrices(model, p, crits, rays)
    raise MorseLinkError(ErrorCode.INVALID_CONFIG, f"不支持 n = {model.n} 中指标 {p.index} 的源点")


def count_flowlines(model: ManifoldModel, p: CriticalPoint, q: CriticalPoint,
                    crits: Optional[Sequence[CriticalPoint]] = None,
                    rays: Optional[int] = None) -> Tuple[int, List[Trajectory]]:
    """
    带符号的连接轨道数 m_f(p, q)

    Args:
        model: 模型
        p: 源点
        q: 汇点，|p| - |q| = 1
        crits: 该方向下的全部临界点，缺省重新定位
        rays: 打靶射线数

    Returns:
        (count, trajectories)
    """
    if p.index - q.index != 1:
        raise MorseLinkError(ErrorCode.INVALID_CONFIG, f"|{p.name}| - |{q.name}| = {p.index - q.index} ≠ 1")
    crits = list(crits) if crits is not None else critical_points_for(model)
    found = [t for t in trajectories_from(model, p, crits, rays) if t.sink.name == q.name]
    return sum(t.sign for t in found), found


def group_by_pair(trajectories: Sequence[Trajectory]) -> Dict[Tuple[str, str], Tuple[Trajectory, ...]]:
    grouped: Dict[Tuple[str, str], List[Trajectory]] = {}
    for t in trajectories:
        grouped.setdefault(t.key, []).append(t)
    return {key: tuple(items) for key, items in grouped.items()}


def trajectory_csv(trajectories: Sequence[Trajectory]) -> str:
    """轨道数据库 CSV：source, sink, sign, samples, angle"""
    buffer = io.StringIO()
    writer = csv.DictWriter(buffer, fieldnames=["source", "sink", "sign", "samples", "angle"], lineterminator="\n")
    writer.writeheader()
    for t in trajectories:
        writer.writerow(t.to_row())
    return buffer.getvalue()
