"""
用伪边界实现链接矩阵的秩

取 d_{k+1} 的 r 个线性无关列 y_i = d p_i，解出 w_j 使 ⟨w_j, y_i⟩ = δ_ij，
以 a_{i,+} = p_i、a_{j,-} = w_j（-f 的 n-k 度链）构造伪边界；
整体位移避开临界点后，链接矩阵的秩应为 r 且修正项全为 0。
"""

import logging
from typing import List, Optional, Tuple

from ..algebra import INTEGERS, RATIONALS, Chain, CoefficientRing, linalg
from ..core.config import settings
from ..core.errors import ErrorCode, MorseLinkError
from ..flow import MorseData
from ..plchain import PLChain, sign_linksym
from ..schemas import IdentityReport
from .identities import link_entries, matrix_rank
from .pairs import displace_chains
from .pseudoboundary import pseudoboundary_from_chain
from .separation import integer_lift

logger = logging.getLogger(__name__)

# 位移种子的尝试次数
REALIZATION_SEEDS = 8


def independent_columns(md: MorseData, k: int, ring: CoefficientRing) -> List[str]:
    """d_{k+1} 中贪心选出的线性无关列（按生成元次序）"""
    fcx = md.cx_f.with_ring(ring)
    chosen: List[str] = []
    vectors: List[list] = []
    for gid in fcx.ids(k + 1):
        image = fcx.vector(fcx.d(fcx.chain(k + 1, {gid: 1})))
        trial = vectors + [image]
        if linalg.matrix_rank(trial, fcx.count(k), ring) == len(trial):
            chosen.append(gid)
            vectors = trial
    return chosen


def dual_system(md: MorseData, k: int, columns: List[str], ring: CoefficientRing) -> List[Chain]:
    """
    解 ⟨w_j, d p_i⟩ = δ_ij，返回提升到整数的 -f 链 w_j

    Raises:
        MorseLinkError: NOT_A_BOUNDARY（列不独立）
    """
    fcx = md.cx_f.with_ring(ring)
    rows = [fcx.vector(fcx.d(fcx.chain(k + 1, {gid: 1}))) for gid in columns]
    ids = fcx.ids(k)
    out = []
    for j in range(len(columns)):
        target = [ring.normalize(1 if i == j else 0) for i in range(len(columns))]
        solution = linalg.solve(rows, len(ids), target, ring)
        if solution is None:
            raise MorseLinkError(ErrorCode.NOT_A_BOUNDARY, f"k={k}: 第 {j} 个对偶方程无解")
        lifted, _ = integer_lift(Chain(md.n - k, dict(zip(ids, solution)), ring))
        out.append(lifted)
    return out


def realization_chains(md: MorseData, k: int, ring: CoefficientRing) -> Tuple[List[PLChain], List[PLChain]]:
    """未位移的 (b_{i,+}) 与 (b_{j,-})"""
    columns = independent_columns(md, k, ring)
    if not columns:
        return [], []
    neg = md.negated()
    caches = ({}, {})
    plus = [pseudoboundary_from_chain(md, Chain(k + 1, {gid: 1}, INTEGERS), cache=caches[0])[1] for gid in columns]
    minus = [pseudoboundary_from_chain(neg, w, cache=caches[1])[1] for w in dual_system(md, k, columns, ring)]
    return plus, minus


def verify_rank_realization(md: MorseData, k: int, ring: Optional[CoefficientRing] = None,
                            seed: Optional[int] = None, fixture: str = "") -> IdentityReport:
    """
    构造伪边界族，使链接矩阵的秩等于 rank d_{k+1} 且修正项全为 0

    Args:
        md: Morse 数据
        k: 度数
        ring: 域，缺省 Q；Z 按 Q 处理
        seed: 起始位移种子，失败时依次加 1
        fixture: 报告里的夹具名

    Returns:
        IdentityReport
    """
    ring = (ring or RATIONALS).as_field()
    seed = settings.DEFAULT_SEED if seed is None else seed
    target = md.cx_f.with_ring(ring).rank(k + 1) if 0 <= k < md.n else 0
    plus, minus = realization_chains(md, k, ring) if target else ([], [])

    tried: List[int] = []
    matrix: List[List[int]] = []
    corrections: List[List[int]] = []
    rank = 0
    for attempt in range(REALIZATION_SEEDS if plus else 1):
        current = seed + attempt
        tried.append(current)
        if not plus:
            break
        try:
            moved = displace_chains(md, plus + minus, seed=current, label=f"realization k={k}")
        except MorseLinkError as exc:
            if exc.code is not ErrorCode.CHAIN_TOO_CLOSE_TO_CRITICAL:
                raise
            continue
        moved_plus, moved_minus = moved[:len(plus)], moved[len(plus):]
        lks, corrections = link_entries(md, moved_plus, moved_minus, current)
        sign = sign_linksym(md.n, k)
        matrix = [[lk - sign * c for lk, c in zip(lr, cr)] for lr, cr in zip(lks, corrections)]
        rank = matrix_rank(matrix, len(moved_minus), ring)
        if rank == target and not any(c for row in corrections for c in row):
            break
        logger.warning("%s k=%d: 种子 %d 下秩 %d / %d 或修正项非零，换种子重试", md.model.name, k, current, rank, target)

    nonzero = sum(1 for row in corrections for c in row if c)
    residual = {}
    if rank != target:
        residual["rank"] = target - rank
    if nonzero:
        residual["corrections"] = nonzero
    report = IdentityReport(
        identity="rank_realization",
        fixture=fixture or md.model.name,
        status="pass" if not residual else "fail",
        k=k,
        lhs=rank,
        rhs=target,
        residual=residual,
        residual_max=float(max((abs(v) for v in residual.values()), default=0)),
        seed=tried[-1] if tried else seed,
        ring=ring.label,
        witnesses=[{"matrix": matrix, "corrections": corrections, "seeds": tried}],
    )
    level = logging.INFO if report.passed else logging.WARNING
    logger.log(level, "rank_realization [%s] k=%d: %s（秩 %d / %d）", report.fixture, k, report.status, rank, target)
    return report
