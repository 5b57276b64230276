"""
几何链接分离度 β^geom 的下界搜索

见证策略：取 β^alg 的代数见证 (x, y)，求原像 a_+（d a_+ = y）与 a_-（d' a_- = x），
提升为整数链后构造伪边界 b_+、b_-；分离度 min f|b_- - max f|b_+ 即为下界。
随机策略另外尝试小整数系数的随机 Morse 链。
"""

import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Tuple

import numpy as np

from ..algebra import (
    INTEGERS,
    RATIONALS,
    Chain,
    CoefficientRing,
    RingKind,
    beta_alg_sup,
    dual_complex,
    lambda_pairing,
    primitive,
)
from ..core.config import settings
from ..core.errors import ErrorCode, MorseLinkError
from ..flow import MorseData
from ..plchain import PLChain, linking_number
from ..schemas import IdentityReport
from .identities import plain
from .pairs import LinkPair, make_pair
from .pseudoboundary import pseudoboundary_from_chain

logger = logging.getLogger(__name__)

STRATEGIES = ("witness", "random")


def integer_lift(chain: Chain) -> Tuple[Chain, int]:
    """
    域系数链提升为整数链

    Q 上乘以分母的最小公倍数；Z/p 上取绝对值最小的代表元。

    Returns:
        (整数链, 倍数)
    """
    ring = chain.ring
    if ring.kind is RingKind.MOD_P:
        p = ring.p
        coefficients = {g: (int(v) if int(v) <= p // 2 else int(v) - p) for g, v in chain.coefficients.items()}
        return Chain(chain.degree, coefficients, INTEGERS), 1
    values = {g: Fraction(v) for g, v in chain.coefficients.items()}
    scale = 1
    for v in values.values():
        scale = scale * v.denominator // math.gcd(scale, v.denominator)
    return Chain(chain.degree, {g: int(v * scale) for g, v in values.items()}, INTEGERS), scale


@dataclass
class GeometricSeparation:
    """β^geom 下界与见证"""
    k: int
    bound: float
    beta_alg: float
    strategy: str
    ring: str
    pair: Optional[LinkPair] = None
    lk: int = 0
    lam: Optional[object] = None
    candidates: int = 0
    notes: List[str] = field(default_factory=list)

    def summary(self) -> str:
        if self.pair is None:
            return "; ".join(self.notes) or "none"
        return f"{self.pair.label} lk={self.lk} sep={self.bound:.6g}"

    def to_dict(self, model=None) -> dict:
        out = {
            "k": self.k,
            "bound": self.bound,
            "beta_alg": self.beta_alg,
            "strategy": self.strategy,
            "ring": self.ring,
            "lk": self.lk,
            "lam": None if self.lam is None else plain(self.lam),
            "candidates": self.candidates,
            "notes": list(self.notes),
        }
        if self.pair is not None and model is not None:
            out["pair"] = self.pair.summary(model)
        return out


@dataclass
class _Candidate:
    pair: LinkPair
    lk: int
    separation: float
    lam: Optional[object] = None


def _linked(lk: int, ring: CoefficientRing) -> bool:
    return ring.normalize(lk) != 0


def _candidate(md: MorseData, neg: MorseData, a_plus: Chain, a_minus: Chain, ring: CoefficientRing,
               label: str, seed: int, caches: Tuple[Dict[str, PLChain], Dict[str, PLChain]]) -> Optional[_Candidate]:
    _, b_plus = pseudoboundary_from_chain(md, a_plus, cache=caches[0])
    _, b_minus = pseudoboundary_from_chain(neg, a_minus, cache=caches[1])
    if b_plus.is_empty() or b_minus.is_empty():
        return None
    try:
        pair = make_pair(md, b_plus, b_minus, label=label, avoid_critical=False)
        lk = linking_number(pair.b_minus, pair.b_plus, md.model, seed=seed)
    except MorseLinkError as exc:
        if exc.code in (ErrorCode.CARRIERS_INTERSECT, ErrorCode.NONTRANSVERSE_AFTER_JITTER,
                        ErrorCode.NONTRANSVERSE_CROSSING):
            logger.debug("%s: 候选 %s 不可用: %s", md.model.name, label, exc.detail)
            return None
        raise
    if not _linked(lk, ring):
        return None
    return _Candidate(pair, lk, pair.separation(md.model))


def _witness_candidate(md: MorseData, k: int, ring: CoefficientRing, seed: int, caches) -> Tuple[Optional[_Candidate], float]:
    fcx = md.cx_f.with_ring(ring) if md.cx_f.ring != ring else md.cx_f
    result = beta_alg_sup(fcx, k, ring)
    if result.witness is None:
        return None, result.beta
    w = result.witness
    a_plus, scale_plus = integer_lift(primitive(fcx, w.y))
    a_minus, scale_minus = integer_lift(primitive(dual_complex(fcx), w.x))
    found = _candidate(md, md.negated(), a_plus, a_minus, ring, "witness", seed, caches)
    if found is not None:
        found.lam = ring.normalize(lambda_pairing(fcx, w.x, w.y) * scale_plus * scale_minus)
        logger.info("%s k=%d: 见证 lk = %d，Λ = %s，分离度 %.6g", md.model.name, k, found.lk,
                    found.lam, found.separation)
    return found, result.beta


def _random_chain(rng: np.random.Generator, ids: List[str], degree: int) -> Chain:
    values = rng.integers(-1, 2, size=len(ids))
    return Chain(degree, {g: int(v) for g, v in zip(ids, values) if v}, INTEGERS)


def beta_geom_search(md: MorseData, k: int, strategy: str = "witness", ring: Optional[CoefficientRing] = None,
                     seed: Optional[int] = None, trials: int = 16) -> GeometricSeparation:
    """
    β^geom_k 的下界

    Args:
        md: Morse 数据
        k: 度数，0 ≤ k ≤ n-1
        strategy: witness / random（random 在见证之外再试随机链）
        ring: 域，缺省 Q
        seed: 随机种子
        trials: random 策略的尝试次数

    Returns:
        GeometricSeparation: 找不到非平凡链接对时下界为 0，notes 记 NO_LINKED_PAIR_FOUND
    """
    if strategy not in STRATEGIES:
        raise MorseLinkError(ErrorCode.INVALID_CONFIG, f"未知策略 {strategy}，可选 {', '.join(STRATEGIES)}")
    n = md.n
    if not 0 <= k <= n - 1:
        raise MorseLinkError(ErrorCode.INVALID_CONFIG, f"k = {k} 超出 0..{n - 1}")
    ring = (ring or RATIONALS).as_field()
    seed = settings.DEFAULT_SEED if seed is None else seed
    caches: Tuple[Dict[str, PLChain], Dict[str, PLChain]] = ({}, {})

    candidates: List[_Candidate] = []
    best, beta_alg = _witness_candidate(md, k, ring, seed, caches)
    if best is not None:
        candidates.append(best)

    if strategy == "random":
        rng = np.random.default_rng(seed)
        neg = md.negated()
        plus_ids, minus_ids = md.cx_f.ids(k + 1), md.cx_neg.ids(n - k)
        for trial in range(trials):
            a_plus = _random_chain(rng, plus_ids, k + 1)
            a_minus = _random_chain(rng, minus_ids, n - k)
            if a_plus.is_zero() or a_minus.is_zero():
                continue
            found = _candidate(md, neg, a_plus, a_minus, ring, f"random-{trial}", seed, caches)
            if found is not None:
                candidates.append(found)

    result = GeometricSeparation(k=k, bound=0.0, beta_alg=beta_alg, strategy=strategy, ring=ring.label,
                                 candidates=len(candidates))
    if not candidates:
        result.notes.append(ErrorCode.NO_LINKED_PAIR_FOUND.value)
        logger.warning("%s k=%d: 未找到非平凡链接的伪边界对，下界取 0", md.model.name, k)
        return result
    top = max(candidates, key=lambda c: c.separation)
    result.bound = max(0.0, top.separation)
    result.pair, result.lk, result.lam = top.pair, top.lk, top.lam
    logger.info("%s k=%d: β^geom ≥ %.6g（β^alg = %.6g，%d 个候选）", md.model.name, k, result.bound,
                beta_alg, len(candidates))
    return result


def verify_beta_equality(md: MorseData, k: int, tol: Optional[float] = None, ring: Optional[CoefficientRing] = None,
                         seed: Optional[int] = None, fixture: str = "") -> IdentityReport:
    """
    β^alg_k = β^geom_k：下界不超过 β^alg + tol，见证下界不低于 β^alg - tol；
    同时核对见证的 lk 与 Λ(d a_-, d a_+) 带符号相等（Z/p 上按模 p 比较），差值记入 residual["linking"]

    Returns:
        IdentityReport
    """
    tol = settings.DEFAULT_TOL if tol is None else tol
    seed = settings.DEFAULT_SEED if seed is None else seed
    search = beta_geom_search(md, k, "witness", ring, seed)
    residual: Dict[str, float] = {}
    if search.bound > search.beta_alg + tol:
        residual["upper"] = search.bound - search.beta_alg
    if search.bound < search.beta_alg - tol:
        residual["lower"] = search.beta_alg - search.bound
    witnesses = [search.to_dict(md.model)]
    if search.lam is not None:
        field = (ring or RATIONALS).as_field()
        gap = field.normalize(field.normalize(search.lk) - search.lam)
        if gap != 0:
            residual["linking"] = abs(float(gap))
    report = IdentityReport(
        identity="beta_alg_equals_geom",
        fixture=fixture or md.model.name,
        status="pass" if not residual else "fail",
        k=k,
        lhs=search.beta_alg,
        rhs=search.bound,
        residual=residual,
        residual_max=max(residual.values(), default=0.0),
        seed=seed,
        ring=search.ring,
        witnesses=witnesses,
        detail=f"tol={tol}",
    )
    level = logging.INFO if report.passed else logging.WARNING
    logger.log(level, "beta_alg_equals_geom [%s] k=%d: %s", report.fixture, k, report.status)
    return report
