"""
链接恒等式与链接矩阵

    Λ(I_{b_-} M_{-f}, I_{b_+} M_f) = lk(b_-, b_+) - (-1)^{(n-k)(k+1)} Π(M_{-f}, I_{b_+,b_-} M_f)

两条链在外层统一扰动，内层的 I_g、I_{g0,g1} 与链接数不再单独扰动。
"""

import logging
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

from ..algebra import RATIONALS, CoefficientRing, lambda_pairing, linalg, pi_pairing, primitive
from ..core.config import settings
from ..core.errors import ErrorCode, MorseLinkError
from ..flow import MorseData, cap_map, two_point_map
from ..plchain import PLChain, linking_number, run_with_jitter, sign_linksym
from ..schemas import IdentityReport
from .pairs import LinkPair

logger = logging.getLogger(__name__)


def plain(value):
    """报告里的环元素：整数原样，分数转字符串"""
    if isinstance(value, Fraction):
        return int(value) if value.denominator == 1 else str(value)
    return int(value) if float(value).is_integer() else value


def _in_image(cx, chain) -> bool:
    try:
        primitive(cx, chain)
    except MorseLinkError as exc:
        if exc.code in (ErrorCode.NOT_A_BOUNDARY, ErrorCode.UNSOLVABLE_OVER_RING):
            return False
        raise
    return True


def _terms(md: MorseData, b_plus: PLChain, b_minus: PLChain, seed: int) -> Dict[str, object]:
    n, k = md.n, b_plus.dim
    ring = md.cx_f.ring
    m_f, m_neg = md.fundamental(), md.cx_neg.fundamental_cycle()
    x = cap_map(md.negated(), b_minus, jitter=False).apply(md.cx_neg, m_neg)
    y = cap_map(md, b_plus, jitter=False).apply(md.cx_f, m_f)
    images = {"plus": _in_image(md.cx_f, y), "minus": _in_image(md.cx_neg, x)}
    lam = lambda_pairing(md.cx_f, x, y) if all(images.values()) else None
    correction = pi_pairing(m_neg, two_point_map(md, b_plus, b_minus, jitter=False).apply(md.cx_f, m_f), n)
    lk = linking_number(b_minus, b_plus, md.model, seed=seed)
    rhs = ring.normalize(lk - sign_linksym(n, k) * correction)
    return {"lam": lam, "lk": lk, "correction": correction, "rhs": rhs, "images": images,
            "x": x.to_dict(), "y": y.to_dict()}


def linking_terms(md: MorseData, b_plus: PLChain, b_minus: PLChain, seed: Optional[int] = None) -> Dict[str, object]:
    """
    恒等式两边的各项

    Returns:
        dict: lam（不在边界像中时为 None）、lk、correction、rhs、images

    Raises:
        MorseLinkError: NONTRANSVERSE_AFTER_JITTER / CHAIN_TOO_CLOSE_TO_CRITICAL / NOT_NULL_HOMOLOGOUS
    """
    seed = settings.DEFAULT_SEED if seed is None else seed
    return run_with_jitter(lambda bp, bm: _terms(md, bp, bm, seed), md.model, [b_plus, b_minus], seed,
                           ErrorCode.NONTRANSVERSE_AFTER_JITTER)


def check_linking_identity(md: MorseData, pair: LinkPair, seed: Optional[int] = None,
                           fixture: str = "") -> IdentityReport:
    """
    链接恒等式，并检查 I_{b_±} M_{±f} 落在边界像中

    Args:
        md: Morse 数据
        pair: 链接对
        seed: 扰动种子
        fixture: 报告里的夹具名

    Returns:
        IdentityReport
    """
    seed = settings.DEFAULT_SEED if seed is None else seed
    terms = linking_terms(md, pair.b_plus, pair.b_minus, seed)
    residual: Dict[str, object] = {}
    for side, ok in terms["images"].items():
        if not ok:
            residual[f"image:{side}"] = 1
    if terms["lam"] is not None:
        diff = md.cx_f.ring.normalize(terms["lam"] - terms["rhs"])
        if diff != 0:
            residual["identity"] = plain(diff)
    residual_max = max((abs(float(Fraction(str(v)))) for v in residual.values()), default=0.0)
    report = IdentityReport(
        identity="linking_identity",
        fixture=fixture or md.model.name,
        status="pass" if not residual else "fail",
        k=pair.k,
        lhs=None if terms["lam"] is None else plain(terms["lam"]),
        rhs=plain(terms["rhs"]),
        residual=residual,
        residual_max=residual_max,
        seed=seed,
        ring=md.cx_f.ring.label,
        witnesses=[{
            "label": pair.label,
            "lk": terms["lk"],
            "correction": plain(terms["correction"]),
            **{key: value for key, value in pair.summary(md.model).items() if key != "label"},
        }],
    )
    level = logging.INFO if report.passed else logging.WARNING
    logger.log(level, "linking_identity [%s] %s: %s", report.fixture, pair.label or "pair", report.status)
    return report


def link_entries(md: MorseData, plus_list: Sequence[PLChain], minus_list: Sequence[PLChain],
                 seed: Optional[int] = None) -> Tuple[List[List[int]], List[List[int]]]:
    """
    逐对计算 lk(b_{j,-}, b_{i,+}) 与修正项 Π(M_{-f}, I_{b_{i,+}, b_{j,-}} M_f)

    Returns:
        (lk 矩阵, 修正项矩阵)，行对应 plus_list
    """
    seed = settings.DEFAULT_SEED if seed is None else seed
    n = md.n
    m_f, m_neg = md.fundamental(), md.cx_neg.fundamental_cycle()

    def entry(b_plus: PLChain, b_minus: PLChain) -> Tuple[int, int]:
        lk = linking_number(b_minus, b_plus, md.model, seed=seed)
        mapped = two_point_map(md, b_plus, b_minus, jitter=False).apply(md.cx_f, m_f)
        return int(lk), int(pi_pairing(m_neg, mapped, n))

    lks, corrections = [], []
    for bp in plus_list:
        row = [run_with_jitter(entry, md.model, [bp, bm], seed, ErrorCode.NONTRANSVERSE_AFTER_JITTER)
               for bm in minus_list]
        lks.append([value for value, _ in row])
        corrections.append([value for _, value in row])
    return lks, corrections


def _field(ring: Optional[CoefficientRing]) -> CoefficientRing:
    return (ring or RATIONALS).as_field()


def matrix_rank(matrix: List[List[int]], ncols: int, ring: CoefficientRing) -> int:
    if not matrix or not ncols:
        return 0
    return linalg.matrix_rank([[ring.normalize(v) for v in row] for row in matrix], ncols, ring)


def link_matrix(md: MorseData, plus_list: Sequence[PLChain], minus_list: Sequence[PLChain],
                ring: Optional[CoefficientRing] = None,
                seed: Optional[int] = None) -> Tuple[List[List[int]], int]:
    """
    L_ij = lk(b_{j,-}, b_{i,+}) - (-1)^{(n-k)(k+1)} Π(M_{-f}, I_{b_{i,+}, b_{j,-}} M_f)

    Args:
        md: Morse 数据
        plus_list: k 维闭链
        minus_list: n-k-1 维闭链
        ring: 求秩所用的域；缺省为 Q，Z 按 Q 处理
        seed: 扰动种子

    Returns:
        (L, rank)
    """
    ring = _field(ring)
    lks, corrections = link_entries(md, plus_list, minus_list, seed)
    matrix = [
        [lk - sign_linksym(md.n, bp.dim) * c for lk, c in zip(lk_row, c_row)]
        for bp, lk_row, c_row in zip(plus_list, lks, corrections)
    ]
    rank = matrix_rank(matrix, len(minus_list), ring)
    logger.info("%s: 链接矩阵 %d×%d，秩 %d（%s）", md.model.name, len(plus_list), len(minus_list), rank, ring.label)
    return matrix, rank


def check_link_rank_bound(md: MorseData, plus_list: Sequence[PLChain], minus_list: Sequence[PLChain], k: int,
                          ring: Optional[CoefficientRing] = None, seed: Optional[int] = None,
                          fixture: str = "") -> IdentityReport:
    """rank L ≤ rank d_{f,k+1}"""
    ring = _field(ring)
    seed = settings.DEFAULT_SEED if seed is None else seed
    matrix, rank = link_matrix(md, plus_list, minus_list, ring, seed)
    bound = md.cx_f.with_ring(ring).rank(k + 1) if k + 1 <= md.n else 0
    excess = max(0, rank - bound)
    return IdentityReport(
        identity="link_rank_bound",
        fixture=fixture or md.model.name,
        status="pass" if excess == 0 else "fail",
        k=k,
        lhs=rank,
        rhs=bound,
        residual=excess,
        residual_max=float(excess),
        seed=seed,
        ring=ring.label,
        witnesses=[{"matrix": matrix}],
    )
