"""
Morse 数据：临界点、连接轨道与 f / -f 两个 Morse 复形
"""

import logging
from dataclasses import dataclass, replace
from typing import Dict, List, Mapping, Optional, Tuple

from ..algebra import (
    INTEGERS,
    Chain,
    CoefficientRing,
    FilteredComplex,
    Generator,
    dual_complex,
    make_complex,
    morse_inequality_decomposition,
)
from ..core.errors import ErrorCode, MorseLinkError
from ..geometry.critical import CriticalPoint
from ..geometry.models import ManifoldModel
from .trajectories import (
    Trajectory,
    critical_points_for,
    group_by_pair,
    trajectories_from,
    trajectory_csv,
    trajectory_sign,
)

logger = logging.getLogger(__name__)

PairMap = Mapping[Tuple[str, str], Tuple[Trajectory, ...]]


def _order(crits) -> Tuple[CriticalPoint, ...]:
    return tuple(sorted(crits, key=lambda c: (-c.index, c.name)))


@dataclass(frozen=True, eq=False)
class MorseData:
    """
    一个方向（f 或 -f）下的完整 Morse 数据

    neg_* 字段保存相反方向的数据，negated() 交换两者，二次取反还原。
    """
    model: ManifoldModel
    crits: Tuple[CriticalPoint, ...]
    neg_crits: Tuple[CriticalPoint, ...]
    trajectories: PairMap
    neg_trajectories: PairMap
    cx_f: FilteredComplex
    cx_neg: FilteredComplex

    @property
    def n(self) -> int:
        return self.model.n

    def crit(self, name: str) -> CriticalPoint:
        for c in self.crits:
            if c.name == name:
                return c
        raise KeyError(name)

    def of_index(self, k: int) -> List[CriticalPoint]:
        return [c for c in self.crits if c.index == k]

    def negated(self) -> "MorseData":
        return MorseData(
            model=self.model.negated(),
            crits=self.neg_crits,
            neg_crits=self.crits,
            trajectories=self.neg_trajectories,
            neg_trajectories=self.trajectories,
            cx_f=self.cx_neg,
            cx_neg=self.cx_f,
        )

    def fundamental(self) -> Chain:
        """M_f：指标 n 的临界点之和"""
        return self.cx_f.fundamental_cycle()

    def all_trajectories(self) -> List[Trajectory]:
        return [t for key in sorted(self.trajectories) for t in self.trajectories[key]]

    def signed_count(self, source: str, sink: str) -> int:
        return sum(t.sign for t in self.trajectories.get((source, sink), ()))

    def trajectory_csv(self) -> str:
        return trajectory_csv(self.all_trajectories())


def _complex(n: int, ring: CoefficientRing, crits, trajectories: PairMap, orientation: int) -> FilteredComplex:
    gens = [Generator(c.name, c.index, round(c.value, 10)) for c in crits]
    boundary: Dict[int, List[List[int]]] = {}
    for k in range(1, n + 1):
        sources = [c.name for c in crits if c.index == k]
        targets = [c.name for c in crits if c.index == k - 1]
        boundary[k] = [
            [sum(t.sign for t in trajectories.get((p, q), ())) for p in sources]
            for q in targets
        ]
    return make_complex(n, ring, gens, boundary, orientation=orientation)


def _entries(cx: FilteredComplex) -> Dict[Tuple[str, str], int]:
    return {(src, tgt): value for items in cx.boundary_entries().values() for tgt, src, value in items}


def check_dual_entries(cx_f: FilteredComplex, cx_neg: FilteredComplex) -> List[Tuple[str, str, int, int]]:
    """逐项比较 -f 复形与 f 复形的对偶：返回 (源, 靶, 实际, 期望) 的不一致项"""
    actual, expected = _entries(cx_neg), _entries(dual_complex(cx_f))
    return [(src, tgt, actual.get((src, tgt), 0), expected.get((src, tgt), 0))
            for src, tgt in sorted(set(actual) | set(expected))
            if actual.get((src, tgt), 0) != expected.get((src, tgt), 0)]


def check_homology(model: ManifoldModel, cx: FilteredComplex) -> List[int]:
    """
    域系数同调与模型的已知 Betti 数比较

    漏掉或多算连接轨道时 d M = 0 与对偶校验都可能仍然成立，Betti 数不会。

    Returns:
        List[int]: Poincaré 多项式系数

    Raises:
        MorseLinkError: HOMOLOGY_MISMATCH
    """
    field = cx.ring.as_field()
    poincare = morse_inequality_decomposition(cx if field == cx.ring else cx.with_ring(field), field).poincare
    if poincare != list(model.betti):
        raise MorseLinkError(ErrorCode.HOMOLOGY_MISMATCH,
                             f"{model.name}: Poincaré 多项式 {poincare} ≠ {list(model.betti)}")
    return poincare


def build_morse_data(model: ManifoldModel, ring: Optional[CoefficientRing] = None,
                     rays: Optional[int] = None) -> MorseData:
    """
    构造 Morse 数据

    -f 的连接轨道取 f 轨道的反向，符号按 -f 的标架重新计算，
    因此与 dual_complex(cx_f) 的逐项比较是对定向约定的独立校验。

    Args:
        model: 模型（f 方向）
        ring: 系数环，缺省为整数
        rays: 打靶射线数，缺省取配置

    Returns:
        MorseData: 校验通过的数据

    Raises:
        MorseLinkError: DUALM_VIOLATION / D_SQUARED_NONZERO / HOMOLOGY_MISMATCH / 轨道搜索的各类错误
    """
    ring = ring or INTEGERS
    n = model.n
    crits = _order(critical_points_for(model))
    neg_model = model.negated()
    neg_crits = _order(c.negated(n) for c in crits)
    neg_by_name = {c.name: c for c in neg_crits}

    forward: List[Trajectory] = []
    for p in crits:
        forward.extend(trajectories_from(model, p, crits, rays))
    backward = []
    for t in forward:
        source, sink = neg_by_name[t.sink.name], neg_by_name[t.source.name]
        flipped = t.reversed(source, sink, 0)
        backward.append(replace(flipped, sign=trajectory_sign(neg_model, source, sink, flipped.points)))

    trajectories, neg_trajectories = group_by_pair(forward), group_by_pair(backward)
    cx_f = _complex(n, ring, crits, trajectories, orientation=1)
    cx_neg = _complex(n, ring, neg_crits, neg_trajectories, orientation=-1)

    mismatches = check_dual_entries(cx_f, cx_neg)
    if mismatches:
        src, tgt, actual, expected = mismatches[0]
        raise MorseLinkError(ErrorCode.DUALM_VIOLATION,
                             f"{model.name}: d_-f({src}) 中 {tgt} 的系数 {actual} ≠ {expected}（共 {len(mismatches)} 项）")
    for label, cx in (("M_f", cx_f), ("M_-f", cx_neg)):
        if not cx.d(cx.fundamental_cycle()).is_zero():
            raise MorseLinkError(ErrorCode.D_SQUARED_NONZERO, f"{model.name}: d {label} ≠ 0")
    check_homology(model, cx_f)

    logger.info("%s: %d 条连接轨道，boundary %s", model.name, len(forward),
                {k: len(v) for k, v in cx_f.boundary_entries().items()})
    return MorseData(model, crits, neg_crits, trajectories, neg_trajectories, cx_f, cx_neg)
