"""
由 Morse 链构造伪边界

unstable_chain 给出紧化不稳定流形的 PL 近似：指标 0 为点，指标 1 为两支流线弧，
指标 2 为不稳定圆周上射线扫出的三角剖分圆盘（射线在汇点封口）。
pseudoboundary_from_chain 把 a = Σ a_i p_i 的各不稳定流形相加得到 Y，
Δa 配对核对边界上连接轨道的抵消，b = ∂Y 只剩 |z_j| 份 W^u(q_j)，z = d a。
"""

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Tuple, Union

import numpy as np

from ..algebra import Chain
from ..core.config import settings
from ..core.errors import ErrorCode, MorseLinkError
from ..flow import MorseData, Trajectory, integrate, ray_starts, shoot
from ..geometry.critical import CriticalPoint
from ..geometry.models import TWO_PI, ManifoldModel, ModelKind
from ..plchain import Cell, PLChain, boundary_pl, canonical_key
from ..schemas import IdentityReport

logger = logging.getLogger(__name__)

# 判定分界线两侧时的角度偏移
SIDE_OFFSET = 1e-6


def _resample(model: ManifoldModel, points: np.ndarray, pieces: int) -> np.ndarray:
    """按弧长把折线重采样为 pieces 段，首尾不动"""
    points = np.asarray(points, dtype=float)
    steps = np.linalg.norm(np.diff(points, axis=0), axis=1)
    arc = np.concatenate([[0.0], np.cumsum(steps)])
    if arc[-1] <= 0.0:
        return np.repeat(points[:1], pieces + 1, axis=0)
    targets = np.linspace(0.0, arc[-1], pieces + 1)
    out = np.column_stack([np.interp(targets, arc, points[:, j]) for j in range(points.shape[1])])
    out[0], out[-1] = points[0], points[-1]
    if model.kind is ModelKind.SPHERE:
        out = out / np.linalg.norm(out, axis=1, keepdims=True)
    return out


def _outgoing(md: MorseData, p: CriticalPoint) -> List[Trajectory]:
    return [t for key in sorted(md.trajectories) if key[0] == p.name for t in md.trajectories[key]]


def branch_polyline(md: MorseData, t: Trajectory) -> np.ndarray:
    """连接轨道的标准折线（同一轨道在各处取同一组顶点，边界才能逐单形抵消）"""
    return _resample(md.model, t.points, settings.DISK_PIECES)


# ----------------------------------------------------------------------
# 指标 2：射线扫出的圆盘
# ----------------------------------------------------------------------

@dataclass
class _Curve:
    angle: float
    order: int
    points: np.ndarray
    sink: str
    separatrix: Optional[int] = None


def _angular_gap(a: float, b: float) -> float:
    d = abs(a - b) % TWO_PI
    return min(d, TWO_PI - d)


def _regular_rays(md: MorseData, p: CriticalPoint, rays: int, avoid: List[float]) -> List[_Curve]:
    model = md.model
    angles = np.arange(rays) * (TWO_PI / rays)
    keep = [a for a in angles if all(_angular_gap(a, s) > 0.25 * TWO_PI / rays for s in avoid)]
    curves = []
    for angle, x0 in zip(keep, ray_starts(model, p, np.array(keep))):
        path = integrate(model, x0, md.crits)
        if path.guarded:
            logger.debug("%s: 角度 %.6f 的射线贴近 %s，跳过", p.name, angle, path.sink.name)
            continue
        head = model.lift_near(p.coords, path.points[0])
        tail = model.lift_near(path.sink.coords, path.points[-1])
        line = np.vstack([head[None, :], path.points, tail[None, :]])
        curves.append(_Curve(float(angle), 0, _resample(model, line, 2 * settings.DISK_PIECES), path.sink.name))
    return curves


def _branch_by_side(md: MorseData, q: CriticalPoint, side: int) -> Trajectory:
    for t in _outgoing(md, q):
        if t.sign == side:
            return t
    raise MorseLinkError(ErrorCode.BISECTION_FAILED, f"{q.name} 没有符号为 {side:+d} 的一支")


def _joined(md: MorseData, separatrix: Trajectory, branch: Trajectory) -> np.ndarray:
    head = _resample(md.model, separatrix.points, settings.DISK_PIECES)
    tail = branch_polyline(md, branch)
    shift = head[-1] - tail[0]
    if md.model.kind is ModelKind.SPHERE:
        shift = np.zeros_like(shift)
    else:
        shift = TWO_PI * np.round(shift / TWO_PI)
    return np.vstack([head, tail[1:] + shift])


def _separatrix_curves(md: MorseData, p: CriticalPoint, index: int, t: Trajectory) -> List[_Curve]:
    flanks = np.array([t.angle - SIDE_OFFSET, t.angle + SIDE_OFFSET])
    sides = shoot(md.model, p, flanks, [t.sink], md.crits)[:, 0]
    if sides[0] == 0 or sides[0] != -sides[1]:
        raise MorseLinkError(ErrorCode.BISECTION_FAILED,
                             f"{p.name}→{t.sink.name}: 分界线两侧分类 {sides.tolist()} 不相反")
    curves = []
    for order, side in ((1, int(sides[0])), (2, int(sides[1]))):
        branch = _branch_by_side(md, t.sink, side)
        curves.append(_Curve(float(t.angle), order, _joined(md, t, branch), branch.sink.name, index))
    return curves


def _strip(left: np.ndarray, right: np.ndarray) -> List[Cell]:
    """left 在角度较小一侧；定向与 (径向, 角向) 一致"""
    cells = []
    for i in range(len(left) - 1):
        cells.append(Cell(np.array([left[i], left[i + 1], right[i + 1]])))
        cells.append(Cell(np.array([left[i], right[i + 1], right[i]])))
    return cells


def _disk(md: MorseData, p: CriticalPoint, rays: int) -> PLChain:
    separatrices = _outgoing(md, p)
    curves = _regular_rays(md, p, rays, [t.angle for t in separatrices])
    for index, t in enumerate(separatrices):
        curves.extend(_separatrix_curves(md, p, index, t))
    curves.sort(key=lambda c: (c.angle, c.order))
    if len(curves) < 2:
        raise MorseLinkError(ErrorCode.BISECTION_FAILED, f"{p.name}: 可用射线不足")

    cells: List[Cell] = []
    for i, left in enumerate(curves):
        right = curves[(i + 1) % len(curves)]
        if left.separatrix is not None and left.order == 1 and right.separatrix == left.separatrix:
            continue
        if left.sink != right.sink:
            raise MorseLinkError(ErrorCode.BISECTION_FAILED,
                                 f"{p.name}: 角度 {left.angle:.6f} 与 {right.angle:.6f} 的射线汇点不同，"
                                 f"射线数 {rays} 不足")
        cells.extend(_strip(left.points, right.points))
    disk = PLChain(2, md.model.kind, tuple(cells)).normalized()
    logger.debug("%s: 圆盘 %d 条曲线、%d 个三角形", p.name, len(curves), len(disk.cells))
    return disk


def unstable_chain(md: MorseData, p: Union[CriticalPoint, str], resolution: Optional[int] = None) -> PLChain:
    """
    W^u(p) 的 PL 近似，定向取自不稳定标架

    Args:
        md: Morse 数据（f 或 -f 方向）
        p: 临界点或其名称
        resolution: 指标 2 时的射线数，缺省 DISK_RESOLUTION

    Returns:
        PLChain: |p| 维链

    Raises:
        MorseLinkError: INVALID_CONFIG / BISECTION_FAILED / 积分错误
    """
    if isinstance(p, str):
        p = md.crit(p)
    kind = md.model.kind
    if p.index == 0:
        return PLChain.points(kind, [p.coords])
    if p.index == 1:
        chain = PLChain.empty(1, kind)
        for t in _outgoing(md, p):
            line = branch_polyline(md, t)
            chain = chain + PLChain.polyline(kind, line if t.sign > 0 else line[::-1])
        return chain.normalized()
    if p.index == 2 and md.n == 2:
        return _disk(md, p, resolution or settings.DISK_RESOLUTION)
    raise MorseLinkError(ErrorCode.INVALID_CONFIG, f"不支持 n = {md.n} 中指标 {p.index} 的不稳定流形")


# ----------------------------------------------------------------------
# Δa 配对与伪边界
# ----------------------------------------------------------------------

@dataclass
class DeltaPairing:
    """z = d a，以及每个 q 上相互抵消的轨道对与剩余轨道"""
    z: Dict[str, int]
    pairs: Dict[str, List[Tuple[str, str]]] = field(default_factory=dict)
    leftovers: Dict[str, List[Tuple[str, int]]] = field(default_factory=dict)


def integer_coefficients(a: Chain) -> Dict[str, int]:
    """
    Raises:
        MorseLinkError: INVALID_CONFIG（非整数系数）
    """
    out = {}
    for gid, value in a.coefficients.items():
        frac = Fraction(value)
        if frac.denominator != 1:
            raise MorseLinkError(ErrorCode.INVALID_CONFIG, f"伪边界构造需要整数系数: {gid} = {value}")
        if frac:
            out[gid] = int(frac)
    return out


def _label(t: Trajectory, copy: int) -> str:
    angle = "" if t.angle is None else f"@{t.angle:.6f}"
    return f"{t.source.name}→{t.sink.name}{angle}#{copy}"


def delta_pairing(md: MorseData, a: Chain) -> DeltaPairing:
    """
    Δa：每个 k 度临界点 q 上带符号的轨道集合，按角度参数排序后贪心配对相反符号

    只用于诊断与前置校验：pseudoboundary_from_chain 不按这里的配对拼接，
    拼接来自 ∂Y 中同一条轨道折线的逐单形抵消（各不稳定链共用 branch 折线）。
    配对失败说明 d a 的系数与轨道计数不一致，此时抵消后的 b 也不会是伪边界。

    Raises:
        MorseLinkError: UNPAIRABLE_DELTA（剩余轨道与 d a 不符）
    """
    coefficients = integer_coefficients(a)
    k = a.degree - 1
    z = {}
    for q in md.of_index(k):
        total = sum(coef * md.signed_count(name, q.name) for name, coef in coefficients.items())
        if total:
            z[q.name] = total
    result = DeltaPairing(z=z)
    for q in md.of_index(k):
        items = []
        for name, coef in sorted(coefficients.items()):
            for t in md.trajectories.get((name, q.name), ()):
                for copy in range(abs(coef)):
                    items.append((t.angle if t.angle is not None else 0.0, name, copy, t,
                                  t.sign * (1 if coef > 0 else -1)))
        items.sort(key=lambda item: (item[1], item[0], item[2]))
        stack: List[Tuple[str, int]] = []
        pairs = []
        for _, _, copy, t, sign in items:
            label = _label(t, copy)
            if stack and stack[-1][1] == -sign:
                other, _ = stack.pop()
                pairs.append((other, label))
            else:
                stack.append((label, sign))
        remaining = sum(sign for _, sign in stack)
        if remaining != z.get(q.name, 0) or len(stack) != abs(remaining):
            raise MorseLinkError(ErrorCode.UNPAIRABLE_DELTA,
                                 f"{q.name}: 配对后剩余 {remaining}（{len(stack)} 条），d a 的系数为 {z.get(q.name, 0)}")
        if pairs:
            result.pairs[q.name] = pairs
        if stack:
            result.leftovers[q.name] = stack
    return result


def pseudoboundary_from_chain(md: MorseData, a: Chain, resolution: Optional[int] = None,
                              cache: Optional[Dict[str, PLChain]] = None) -> Tuple[PLChain, PLChain]:
    """
    由整数 Morse 链 a 构造 (Y, b)，b = ∂Y 为 k 维伪边界

    Y = Σ a_p · W^u(p)；相反符号的成对轨道在 ∂Y 中逐单形抵消，
    剩下的是 d a 在各 W^u(q) 上的倍数。delta_pairing 先做一遍组合校验并给出日志里的 z。

    Args:
        md: Morse 数据（f 或 -f 方向）
        a: k+1 度整数链，k+1 ∈ {1, 2}
        resolution: 圆盘射线数
        cache: 临界点名称到不稳定链的缓存，多次构造时复用

    Returns:
        (Y, b)

    Raises:
        MorseLinkError: INVALID_CONFIG / UNPAIRABLE_DELTA / 积分错误
    """
    if a.degree not in (1, 2) or a.degree > md.n:
        raise MorseLinkError(ErrorCode.INVALID_CONFIG, f"不支持 {a.degree} 度链（n = {md.n}）")
    pairing = delta_pairing(md, a)
    kind = md.model.kind
    y = PLChain.empty(a.degree, kind)
    for name, coef in sorted(integer_coefficients(a).items()):
        if cache is None:
            piece = unstable_chain(md, name, resolution)
        else:
            if name not in cache:
                cache[name] = unstable_chain(md, name, resolution)
            piece = cache[name]
        y = y + piece.scale(coef)
    y = y.normalized()
    b = boundary_pl(y).normalized()
    logger.info("%s: 伪边界 %d 维，%d 个单形，z = %s", md.model.name, b.dim, len(b.cells), pairing.z)
    return y, b


# ----------------------------------------------------------------------
# 伪边界性质
# ----------------------------------------------------------------------

def _keyed(chain: PLChain) -> Dict[tuple, int]:
    out = {}
    for cell in chain.normalized().cells:
        key, sign = canonical_key(chain.kind, cell.vertices)
        out[key] = sign * cell.multiplicity
    return out


def local_multiplicities(md: MorseData, b: PLChain, q: CriticalPoint) -> List[int]:
    """b 在 W^u(q) 各单形上的重数（相对 W^u(q) 自身定向）"""
    own = _keyed(unstable_chain(md, q))
    found = _keyed(b)
    return [found.get(key, 0) * sign for key, sign in own.items()]


def check_pseudoboundary(md: MorseData, a: Chain, b: PLChain, tol: float = 1e-3, fixture: str = "") -> IdentityReport:
    """
    伪边界的性质：∂b = 0；b 落在 k 度临界点的不稳定流形之并；
    在每个 q_j 附近恰为 |z_j| 份 W^u(q_j)；max f|b = max f(q_j)（方向取 md 自身）

    Returns:
        IdentityReport
    """
    k = a.degree - 1
    z = delta_pairing(md, a).z
    residual: Dict[str, float] = {}
    if not boundary_pl(b).is_empty():
        residual["closed"] = 1
    covered = {}
    for q in md.of_index(k):
        covered.update(_keyed(unstable_chain(md, q)))
    stray = [key for key in _keyed(b) if key not in covered]
    if stray:
        residual["containment"] = len(stray)
    witnesses = []
    for q in md.of_index(k):
        values = set(local_multiplicities(md, b, q))
        expected = abs(z.get(q.name, 0))
        witnesses.append({"q": q.name, "z": z.get(q.name, 0), "multiplicities": sorted(values)})
        if len(values) != 1 or abs(values.pop()) != expected:
            residual[f"local:{q.name}"] = 1
    support = [md.crit(name).value for name in z]
    expected_top = max(support) if support else float("-inf")
    top = b.f_range(md.model)[1] if b.cells else float("-inf")
    if support and abs(top - expected_top) > tol:
        residual["max_f"] = top - expected_top
    if bool(z) == b.is_empty():
        residual["empty"] = 1
    status = "pass" if not residual else "fail"
    report = IdentityReport(
        identity="pseudoboundary",
        fixture=fixture or md.model.name,
        status=status,
        k=k,
        lhs=None if not b.cells else top,
        rhs=None if not support else expected_top,
        residual=residual,
        residual_max=max((abs(float(v)) for v in residual.values()), default=0.0),
        ring=md.cx_f.ring.label,
        witnesses=witnesses,
        detail=f"a = {integer_coefficients(a)}",
    )
    level = logging.INFO if report.passed else logging.WARNING
    logger.log(level, "pseudoboundary [%s]: %s", report.fixture, status)
    return report
