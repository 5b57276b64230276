"""
链层面的运算

- cap_map：I_g，统计穿过 g 的连接轨道（链层面的卷积积）
- two_point_map：I_{g0,g1}，统计先穿过 g0、后穿过 g1 的轨道
- ChainMap：以 (源, 靶) -> 整数 存储的链映射，支持复合与加法
"""

import logging
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Optional, Tuple

import numpy as np

from ..algebra import Chain, FilteredComplex
from ..core.config import settings
from ..core.errors import ErrorCode, MorseLinkError, NonTransverseError
from ..geometry.critical import CriticalPoint
from ..plchain import PLChain, carrier_gap, locate_points, run_with_jitter, segment_crossings, transverse_points
from .integrate import FlowPath, integrate
from .morse_data import MorseData

logger = logging.getLogger(__name__)

# 两次穿越在轨道参数上的最小间隔
SIMULTANEOUS_GAP = 1e-6


@dataclass(frozen=True)
class ChainMap:
    """
    链映射

    entries[(p, q)] 为 q 在 F(p) 中的系数，shift = |p| - |q|。
    """
    shift: int
    entries: Mapping[Tuple[str, str], int] = field(default_factory=dict)

    @classmethod
    def zero(cls, shift: int) -> "ChainMap":
        return cls(shift, {})

    @classmethod
    def from_complex(cls, cx: FilteredComplex) -> "ChainMap":
        """边界算子 d"""
        entries = {(src, tgt): int(value) for items in cx.boundary_entries().values() for tgt, src, value in items}
        return cls(1, entries)

    @classmethod
    def build(cls, shift: int, raw: Mapping[Tuple[str, str], int]) -> "ChainMap":
        return cls(shift, {key: int(value) for key, value in raw.items() if value != 0})

    def __add__(self, other: "ChainMap") -> "ChainMap":
        if other.shift != self.shift:
            raise MorseLinkError(ErrorCode.DEGREE_MISMATCH, f"链映射次数不同: {self.shift} 与 {other.shift}")
        total: Dict[Tuple[str, str], int] = defaultdict(int, self.entries)
        for key, value in other.entries.items():
            total[key] += value
        return ChainMap.build(self.shift, total)

    def __neg__(self) -> "ChainMap":
        return self.scale(-1)

    def __sub__(self, other: "ChainMap") -> "ChainMap":
        return self + (-other)

    def scale(self, factor: int) -> "ChainMap":
        return ChainMap.build(self.shift, {key: factor * value for key, value in self.entries.items()})

    def compose(self, first: "ChainMap") -> "ChainMap":
        """self ∘ first（先作用 first）"""
        total: Dict[Tuple[str, str], int] = defaultdict(int)
        for (p, q), a in first.entries.items():
            for (q2, r), b in self.entries.items():
                if q2 == q:
                    total[(p, r)] += a * b
        return ChainMap.build(self.shift + first.shift, total)

    def apply(self, cx: FilteredComplex, chain: Chain) -> Chain:
        total: Dict[str, int] = defaultdict(int)
        for (p, q), value in self.entries.items():
            coefficient = chain.coefficient(p)
            if coefficient:
                total[q] += coefficient * value
        return Chain(chain.degree - self.shift, dict(total), cx.ring)

    def matrix(self, cx: FilteredComplex, k: int) -> List[List[int]]:
        """CM_k -> CM_{k-shift} 的稠密矩阵"""
        rows, cols = cx.ids(k - self.shift), cx.ids(k)
        return [[self.entries.get((p, q), 0) for p in cols] for q in rows]

    def is_zero(self) -> bool:
        return not self.entries

    def max_abs(self) -> int:
        return max((abs(v) for v in self.entries.values()), default=0)

    def to_dict(self) -> dict:
        return {
            "shift": self.shift,
            "entries": [[p, q, v] for (p, q), v in sorted(self.entries.items())],
        }


# ----------------------------------------------------------------------
# 穿越检测
# ----------------------------------------------------------------------

def check_clearance(md: MorseData, g: PLChain) -> None:
    """
    低维链须与全部临界点保持平凡化半径以外的距离

    Raises:
        MorseLinkError: CHAIN_TOO_CLOSE_TO_CRITICAL
    """
    if g.dim >= md.n or g.is_empty():
        return
    for c in md.crits:
        center = PLChain.points(md.model.kind, [c.coords])
        gap = carrier_gap(center, g, md.model)
        if gap <= c.radius:
            raise MorseLinkError(ErrorCode.CHAIN_TOO_CLOSE_TO_CRITICAL,
                                 f"链载体距 {c.name} 仅 {gap:.3g}（半径 {c.radius:.3g}）")


def crossings_along(md: MorseData, points: np.ndarray, g: PLChain) -> List[Tuple[float, int]]:
    """
    折线与 n-1 维链的横截穿越

    Args:
        md: Morse 数据
        points: 沿流方向的折线顶点
        g: n-1 维链

    Returns:
        List[(position, e)]: position 为折线参数（段号 + 段内比例），
        e = or(X ⊕ T g) · 重数，X 为折线方向

    Raises:
        NonTransverseError: 穿越非横截
    """
    g = g.normalized()
    if not g.cells or len(points) < 2:
        return []
    segments = np.stack([points[:-1], points[1:]], axis=1)
    model = md.model
    if model.n == 1:
        located = np.array([c.vertices[0] for c in g.cells])
        hits = locate_points(model, located, segments)
        out = []
        for h in hits:
            a0, a1 = segments[h.b_index, 0, 0], segments[h.b_index, 1, 0]
            s = (h.point[0] - a0) / (a1 - a0)
            out.append((h.b_index + float(s), h.sign * g.cells[h.a_index].multiplicity))
        return out
    cells = np.array([c.vertices for c in g.cells])
    hits = segment_crossings(model, segments, cells)
    return [(h.a_index + h.s, h.sign * g.cells[h.b_index].multiplicity) for h in hits]


def flow_ends(md: MorseData, x: np.ndarray) -> Tuple[CriticalPoint, CriticalPoint, FlowPath, FlowPath]:
    """
    过 x 的流线两端 (α(x), ω(x)) 以及前向、后向两段路径

    Raises:
        NonTransverseError: 流线贴近鞍点（x 几乎落在分界线上）
    """
    forward = integrate(md.model, x, md.crits)
    neg = md.negated()
    backward = integrate(neg.model, x, neg.crits)
    for path in (forward, backward):
        if path.guarded:
            raise NonTransverseError(ErrorCode.NONTRANSVERSE_CROSSING,
                                     f"过 {np.round(x, 9).tolist()} 的流线贴近 {path.sink.name}")
    return md.crit(backward.sink.name), forward.sink, forward, backward


# ----------------------------------------------------------------------
# I_g
# ----------------------------------------------------------------------

def _cap_entries(md: MorseData, g: PLChain) -> ChainMap:
    shift = md.n - g.dim
    entries: Dict[Tuple[str, str], int] = defaultdict(int)
    if shift == 0:
        for c in md.crits:
            center = PLChain.points(md.model.kind, [c.coords])
            local = sum(h.sign for h in transverse_points(center, g, md.model))
            entries[(c.name, c.name)] += local
    elif shift == 1:
        for (p, q), trajectories in md.trajectories.items():
            for t in trajectories:
                entries[(p, q)] += t.sign * sum(e for _, e in crossings_along(md, t.points, g))
    else:
        for cell in g.normalized().cells:
            alpha, omega, _, _ = flow_ends(md, cell.vertices[0])
            entries[(alpha.name, omega.name)] += cell.multiplicity
    return ChainMap.build(shift, entries)


def cap_map(md: MorseData, g: PLChain, jitter: bool = True, seed: Optional[int] = None) -> ChainMap:
    """
    I_g: CM_k -> CM_{k-(n-v)}

    Args:
        md: Morse 数据（f 或 -f 方向）
        g: v 维 PL 链
        jitter: 非横截时扰动重试
        seed: 扰动种子

    Returns:
        ChainMap: shift = n - v

    Raises:
        MorseLinkError: CHAIN_TOO_CLOSE_TO_CRITICAL / NONTRANSVERSE_CROSSING / INVALID_CONFIG
    """
    n, v = md.n, g.dim
    if not 0 <= v <= n:
        raise MorseLinkError(ErrorCode.INVALID_CONFIG, f"链维数 {v} 超出 0..{n}")
    if g.is_empty():
        return ChainMap.zero(n - v)
    check_clearance(md, g)
    if not jitter:
        return _cap_entries(md, g)
    seed = settings.DEFAULT_SEED if seed is None else seed
    return run_with_jitter(lambda chain: _cap_entries(md, chain), md.model, [g], seed,
                           ErrorCode.NONTRANSVERSE_CROSSING)


# ----------------------------------------------------------------------
# I_{g0,g1}
# ----------------------------------------------------------------------

def _ordered_pairs(first: List[Tuple[float, int]], second: List[Tuple[float, int]]) -> int:
    total = 0
    for s0, e0 in first:
        for s1, e1 in second:
            if abs(s1 - s0) <= SIMULTANEOUS_GAP:
                raise NonTransverseError(ErrorCode.SIMULTANEOUS_CROSSING, f"轨道参数 {s0:.9g} 处同时穿过两条链")
            if s1 > s0:
                total += e0 * e1
    return total


def _two_point_entries(md: MorseData, g0: PLChain, g1: PLChain) -> ChainMap:
    n, v0, v1 = md.n, g0.dim, g1.dim
    shift = 2 * n - v0 - v1 - 1
    if shift <= 0 or shift > n:
        # 指标差不在 1..n，没有可数的轨道
        return ChainMap.zero(shift)
    entries: Dict[Tuple[str, str], int] = defaultdict(int)
    if shift == 1 and v0 == v1 == n - 1:
        epsilon = 1 if n == 1 else -1
        for (p, q), trajectories in md.trajectories.items():
            for t in trajectories:
                first = crossings_along(md, t.points, g0)
                second = crossings_along(md, t.points, g1) if first else []
                entries[(p, q)] += epsilon * t.sign * _ordered_pairs(first, second)
    elif shift == 2 and n == 2 and {v0, v1} == {0, 1}:
        points, arcs = (g0, g1) if v0 == 0 else (g1, g0)
        arcs = arcs.normalized()
        cells = np.array([c.vertices for c in arcs.cells])
        for cell in points.normalized().cells:
            alpha, omega, forward, backward = flow_ends(md, cell.vertices[0])
            # 点在前：沿前向路径找弧；弧在前：沿后向路径找弧（方向为 -X，符号正好相反）
            path = forward if v0 == 0 else backward
            segments = np.stack([path.points[:-1], path.points[1:]], axis=1)
            hits = segment_crossings(md.model, segments, cells)
            total = sum(h.sign * arcs.cells[h.b_index].multiplicity for h in hits)
            entries[(alpha.name, omega.name)] += cell.multiplicity * total
    else:
        raise MorseLinkError(ErrorCode.INVALID_CONFIG, f"未实现的维数组合 n={n}, v0={v0}, v1={v1}")
    return ChainMap.build(shift, entries)


def two_point_map(md: MorseData, g0: PLChain, g1: PLChain, jitter: bool = True,
                  seed: Optional[int] = None) -> ChainMap:
    """
    I_{g0,g1}: CM_k -> CM_{k+1-(2n-v0-v1)}

    统计 (γ, t > 0)，γ(0) 在 g0 上、γ(t) 在 g1 上。

    Args:
        md: Morse 数据
        g0: v0 维链
        g1: v1 维链
        jitter: 非横截或同时穿越时扰动重试（两条链同一位移）
        seed: 扰动种子

    Returns:
        ChainMap: shift = 2n - v0 - v1 - 1

    Raises:
        MorseLinkError: CHAIN_TOO_CLOSE_TO_CRITICAL / NONTRANSVERSE_CROSSING /
            INVALID_CONFIG（n = 2 时点与 2 维链的组合未实现）
    """
    n = md.n
    for g in (g0, g1):
        if not 0 <= g.dim <= n:
            raise MorseLinkError(ErrorCode.INVALID_CONFIG, f"链维数 {g.dim} 超出 0..{n}")
    shift = 2 * n - g0.dim - g1.dim - 1
    if g0.is_empty() or g1.is_empty():
        return ChainMap.zero(shift)
    check_clearance(md, g0)
    check_clearance(md, g1)
    if not jitter:
        return _two_point_entries(md, g0, g1)
    seed = settings.DEFAULT_SEED if seed is None else seed
    return run_with_jitter(lambda a, b: _two_point_entries(md, a, b), md.model, [g0, g1], seed,
                           ErrorCode.NONTRANSVERSE_CROSSING)

