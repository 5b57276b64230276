"""
链接对

b_+ 为 k 维、b_- 为 n-k-1 维闭链，二者载体不相交；
参与链层面运算时还要求两者都避开全部临界点的平凡化球。
"""

import logging
from dataclasses import dataclass
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

from ..core.config import settings
from ..core.errors import ErrorCode, MorseLinkError
from ..flow import MorseData, check_clearance, offsets
from ..geometry.critical import CriticalPoint
from ..geometry.models import ManifoldModel
from ..plchain import PLChain, boundary_pl, carrier_gap

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class LinkPair:
    """(b_+, b_-) 链接对"""
    b_plus: PLChain
    b_minus: PLChain
    k: int
    label: str = ""

    def levels(self, model: ManifoldModel) -> Tuple[float, float]:
        """(max f|b_+, min f|b_-)"""
        _, top = self.b_plus.f_range(model)
        bottom, _ = self.b_minus.f_range(model)
        return top, bottom

    def separation(self, model: ManifoldModel) -> float:
        top, bottom = self.levels(model)
        return bottom - top

    def summary(self, model: ManifoldModel) -> dict:
        top, bottom = self.levels(model)
        return {
            "label": self.label,
            "k": self.k,
            "max_f_plus": top,
            "min_f_minus": bottom,
            "separation": bottom - top,
            "cells_plus": len(self.b_plus.normalized()),
            "cells_minus": len(self.b_minus.normalized()),
        }


def make_pair(md: MorseData, b_plus: PLChain, b_minus: PLChain, label: str = "",
              avoid_critical: bool = True) -> LinkPair:
    """
    校验并构造链接对

    Args:
        md: Morse 数据
        b_plus: k 维闭链
        b_minus: n-k-1 维闭链
        label: 标签
        avoid_critical: 是否要求避开临界点（链层面运算需要）

    Returns:
        LinkPair

    Raises:
        MorseLinkError: INVALID_CONFIG / CARRIERS_INTERSECT / CHAIN_TOO_CLOSE_TO_CRITICAL
    """
    n, k = md.n, b_plus.dim
    if not 0 <= k <= n - 1:
        raise MorseLinkError(ErrorCode.INVALID_CONFIG, f"b_+ 的维数 {k} 超出 0..{n - 1}")
    if b_minus.dim != n - k - 1:
        raise MorseLinkError(ErrorCode.INVALID_CONFIG, f"b_- 应为 {n - k - 1} 维，实际 {b_minus.dim}")
    for what, chain in (("b_+", b_plus), ("b_-", b_minus)):
        if not boundary_pl(chain).is_empty():
            raise MorseLinkError(ErrorCode.INVALID_CONFIG, f"{what} 不是闭链")
    gap = carrier_gap(b_minus, b_plus, md.model)
    if gap <= settings.TRANSVERSALITY_EPS:
        raise MorseLinkError(ErrorCode.CARRIERS_INTERSECT, f"{label or 'pair'}: 载体距离 {gap:.3g}")
    if avoid_critical:
        check_clearance(md, b_plus)
        check_clearance(md, b_minus)
    return LinkPair(b_plus.normalized(), b_minus.normalized(), k, label)


# ----------------------------------------------------------------------
# 临界点附近的局部位移
# ----------------------------------------------------------------------

Move = Callable[[np.ndarray], np.ndarray]


def bump_move(model: ManifoldModel, crit: CriticalPoint, shift: np.ndarray) -> Move:
    """
    以 crit 为中心的局部平移：2r 以内整体平移 shift，5r 处衰减到零

    |shift| = 2r 时径向导数不超过 2/3，映射仍是微分同胚。
    """
    inner, outer = 2.0 * crit.radius, 5.0 * crit.radius

    def move(x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        distance = float(np.linalg.norm(offsets(model, crit.coords, x[None, :])[0]))
        if distance >= outer:
            return x
        weight = 1.0 if distance <= inner else (outer - distance) / (outer - inner)
        return model.retract(x, weight * shift)

    return move


def _tangent_frame(crit: CriticalPoint) -> np.ndarray:
    return np.vstack([crit.stable, crit.unstable]).reshape(-1, crit.coords.shape[0])


def _candidate_shifts(model: ManifoldModel, crit: CriticalPoint, rng: np.random.Generator) -> Sequence[np.ndarray]:
    frame = _tangent_frame(crit)
    length = settings.WITNESS_SHIFT * crit.radius
    if model.n == 1:
        return [length * frame[0], -length * frame[0]]
    count = settings.WITNESS_DIRECTIONS
    phase = float(rng.uniform(0.0, 2.0 * np.pi / count))
    angles = phase + np.arange(count) * (2.0 * np.pi / count)
    return [length * (np.cos(a) * frame[0] + np.sin(a) * frame[1]) for a in angles]


def _clearance(model: ManifoldModel, crit: CriticalPoint, chains: Sequence[PLChain]) -> float:
    center = PLChain.points(model.kind, [crit.coords])
    return min((carrier_gap(center, chain, model) for chain in chains if chain.cells), default=float("inf"))


def _move_once(md: MorseData, chains: List[PLChain], rng: np.random.Generator) -> List[PLChain]:
    model = md.model
    for crit in md.crits:
        if _clearance(model, crit, chains) > 1.5 * crit.radius:
            continue
        best, best_gap = chains, -1.0
        for shift in _candidate_shifts(model, crit, rng):
            move = bump_move(model, crit, shift)
            trial = [chain.map_vertices(move) for chain in chains]
            gap = _clearance(model, crit, trial)
            if gap > best_gap:
                best, best_gap = trial, gap
        chains = best
    return chains


def displace_chains(md: MorseData, chains: Sequence[PLChain], seed: Optional[int] = None,
                    label: str = "") -> List[PLChain]:
    """
    用同一近恒等微分同胚移动一组链，使其避开全部临界点

    对每个过近的临界点，在若干候选方向中取移动后离它最远的一个；
    种子决定候选方向的相位，失败时换下一组方向，最多 JITTER_RETRIES 次。

    Raises:
        MorseLinkError: CHAIN_TOO_CLOSE_TO_CRITICAL（重试耗尽）
    """
    seed = settings.DEFAULT_SEED if seed is None else seed
    rng = np.random.default_rng(seed)
    base = [chain.normalized() for chain in chains]
    last: Optional[MorseLinkError] = None
    for attempt in range(settings.JITTER_RETRIES):
        moved = _move_once(md, base, rng)
        try:
            for chain in moved:
                check_clearance(md, chain)
        except MorseLinkError as exc:
            last = exc
            logger.warning("%s: 第 %d 次位移后仍贴近临界点: %s", label or "chains", attempt + 1, exc.detail)
            continue
        if attempt:
            logger.info("%s: 第 %d 次位移成功", label or "chains", attempt + 1)
        return [chain.normalized() for chain in moved]
    raise last


def displace_pair(md: MorseData, b_plus: PLChain, b_minus: PLChain, seed: Optional[int] = None,
                  label: str = "") -> LinkPair:
    """
    移动链接对使其可参与链层面运算

    Raises:
        MorseLinkError: CHAIN_TOO_CLOSE_TO_CRITICAL / CARRIERS_INTERSECT
    """
    moved_plus, moved_minus = displace_chains(md, [b_plus, b_minus], seed=seed, label=label)
    return make_pair(md, moved_plus, moved_minus, label=label)
