"""
链层面恒等式校验

每个校验返回 IdentityReport，residual 为残差映射的非零项，
残差必须逐项为 0。带链的校验在外层统一扰动全部链，内层运算不再单独扰动。
"""

import logging
from typing import Dict, Optional, Tuple

from ..algebra import pi_pairing
from ..core.config import settings
from ..core.errors import ErrorCode, MorseLinkError
from ..plchain import PLChain, boundary_pl, fiber_product, run_with_jitter
from ..schemas import IdentityReport
from .morse_data import MorseData, check_dual_entries
from .operations import ChainMap, cap_map, two_point_map

logger = logging.getLogger(__name__)


def _power(exponent: int) -> int:
    return -1 if exponent % 2 else 1


def _report(identity: str, md: MorseData, fixture: str, residual: Dict[str, int], seed: int,
            detail: str = "", **extra) -> IdentityReport:
    residual_max = max((abs(v) for v in residual.values()), default=0)
    report = IdentityReport(
        identity=identity,
        fixture=fixture or md.model.name,
        status="pass" if residual_max == 0 else "fail",
        residual=residual,
        residual_max=float(residual_max),
        seed=seed,
        ring=md.cx_f.ring.label,
        detail=detail,
        **extra,
    )
    level = logging.INFO if report.passed else logging.WARNING
    logger.log(level, "%s [%s]: %s（残差 %s）", identity, report.fixture, report.status, residual_max)
    return report


def _residual_entries(chain_map: ChainMap) -> Dict[str, int]:
    return {f"{p}->{q}": v for (p, q), v in sorted(chain_map.entries.items())}


def check_cap_leibniz(md: MorseData, g: PLChain, seed: Optional[int] = None, fixture: str = "") -> IdentityReport:
    """
    I_{∂g} - d I_g + (-1)^{n-v} I_g d = 0

    Args:
        md: Morse 数据
        g: v 维链
        seed: 扰动种子
        fixture: 报告里的夹具名

    Returns:
        IdentityReport
    """
    seed = settings.DEFAULT_SEED if seed is None else seed
    n, v = md.n, g.dim
    d = ChainMap.from_complex(md.cx_f)

    def residual(chain: PLChain) -> ChainMap:
        cap = cap_map(md, chain, jitter=False)
        if v > 0:
            cap_boundary = cap_map(md, boundary_pl(chain), jitter=False)
        else:
            cap_boundary = ChainMap.zero(n - v + 1)
        return cap_boundary - d.compose(cap) + cap.compose(d).scale(_power(n - v))

    result = run_with_jitter(residual, md.model, [g], seed, ErrorCode.NONTRANSVERSE_CROSSING)
    return _report("cap_leibniz", md, fixture, _residual_entries(result), seed, detail=f"v={v}")


def two_point_boundary_terms(md: MorseData, g0: PLChain, g1: PLChain) -> Tuple[ChainMap, ...]:
    """
    两点映射边界恒等式的六项（已乘符号，不扰动）

    Returns:
        (I_{∂g0,g1}, ±I_{g0,∂g1}, ±I_{g0,g1} d, d I_{g0,g1}, ±I_{g1} I_{g0}, ±I_{g0×g1})
    """
    n, v0, v1 = md.n, g0.dim, g1.dim
    target = 2 * n - v0 - v1
    d = ChainMap.from_complex(md.cx_f)
    both = two_point_map(md, g0, g1, jitter=False)
    first = two_point_map(md, boundary_pl(g0), g1, jitter=False) if v0 > 0 else ChainMap.zero(target)
    second = (two_point_map(md, g0, boundary_pl(g1), jitter=False).scale(_power(v0))
              if v1 > 0 else ChainMap.zero(target))
    third = both.compose(d).scale(_power(v0 + v1))
    fourth = d.compose(both)
    fifth = cap_map(md, g1, jitter=False).compose(cap_map(md, g0, jitter=False)).scale(_power(v0 * (n - v1)))
    if v0 + v1 == n:
        sixth = cap_map(md, fiber_product(g0, g1, md.model), jitter=False).scale(_power(1 + n * (n - v1)))
    else:
        sixth = ChainMap.zero(target)
    return first, second, third, fourth, fifth, sixth


def check_two_point_boundary(md: MorseData, g0: PLChain, g1: PLChain, seed: Optional[int] = None,
                             fixture: str = "") -> IdentityReport:
    """
    I_{∂g0,g1} + (-1)^{v0} I_{g0,∂g1} + (-1)^{v0+v1} I_{g0,g1} d + d I_{g0,g1}
    + (-1)^{v0(n-v1)} I_{g1} I_{g0} + (-1)^{1+n(n-v1)} I_{g0×g1} = 0

    Raises:
        MorseLinkError: INVALID_CONFIG（v0 + v1 > n，纤维积不是点集）
    """
    seed = settings.DEFAULT_SEED if seed is None else seed
    n, v0, v1 = md.n, g0.dim, g1.dim
    if v0 + v1 > n:
        raise MorseLinkError(ErrorCode.INVALID_CONFIG, f"只支持 v0 + v1 ≤ n: {v0} + {v1} > {n}")

    def residual(a: PLChain, b: PLChain) -> ChainMap:
        total = ChainMap.zero(2 * n - v0 - v1)
        for term in two_point_boundary_terms(md, a, b):
            total = total + term
        return total

    result = run_with_jitter(residual, md.model, [g0, g1], seed, ErrorCode.NONTRANSVERSE_CROSSING)
    return _report("two_point_boundary", md, fixture, _residual_entries(result), seed,
                   detail=f"v0={v0}, v1={v1}")


def check_cap_adjoint(md: MorseData, g: PLChain, seed: Optional[int] = None, fixture: str = "") -> IdentityReport:
    """
    Π(I^{-f}_g x, y) = (-1)^{(n-v)(n-k)} Π(x, I^f_g y)，对全部基元对逐项比较
    """
    seed = settings.DEFAULT_SEED if seed is None else seed
    n, v = md.n, g.dim
    shift = n - v
    neg = md.negated()

    def both(chain: PLChain):
        return cap_map(md, chain, jitter=False), cap_map(neg, chain, jitter=False)

    forward, backward = run_with_jitter(both, md.model, [g], seed, ErrorCode.NONTRANSVERSE_CROSSING)
    residual: Dict[str, int] = {}
    for y in md.crits:
        k = y.index
        for x in md.crits:
            if x.index != k - shift:
                continue
            lhs = backward.entries.get((x.name, y.name), 0)
            rhs = _power(shift * (n - k)) * forward.entries.get((y.name, x.name), 0)
            if lhs != rhs:
                residual[f"{x.name},{y.name}"] = lhs - rhs
    return _report("cap_adjoint", md, fixture, residual, seed, detail=f"v={v}")


def check_point_count(md: MorseData, g: PLChain, seed: Optional[int] = None, fixture: str = "") -> IdentityReport:
    """0 维链的带符号点数 = Π(M_{-f}, I_g M_f)"""
    seed = settings.DEFAULT_SEED if seed is None else seed
    if g.dim != 0:
        raise MorseLinkError(ErrorCode.INVALID_CONFIG, "点数校验需要 0 维链")
    expected = sum(c.multiplicity for c in g.normalized().cells)
    cap = cap_map(md, g, seed=seed)
    image = cap.apply(md.cx_f, md.fundamental())
    value = int(pi_pairing(md.cx_neg.fundamental_cycle(), image, md.n))
    residual = {"count": value - expected} if value != expected else {}
    return _report("point_count", md, fixture, residual, seed, lhs=expected, rhs=value)


def check_boundary_squared(md: MorseData, fixture: str = "") -> IdentityReport:
    """d² = 0 与 d M_{±f} = 0（两个方向）"""
    residual: Dict[str, int] = {}
    for label, cx in (("f", md.cx_f), ("-f", md.cx_neg)):
        d = ChainMap.from_complex(cx)
        for key, value in _residual_entries(d.compose(d)).items():
            residual[f"{label}:d²:{key}"] = value
        image = d.apply(cx, cx.fundamental_cycle())
        for gid, value in image.coefficients.items():
            residual[f"{label}:dM:{gid}"] = int(value)
    return _report("boundary_squared", md, fixture, residual, settings.DEFAULT_SEED)


def check_dual_signs(md: MorseData, fixture: str = "") -> IdentityReport:
    """-f 复形逐项等于 f 复形的对偶"""
    residual = {f"{src}->{tgt}": actual - expected
                for src, tgt, actual, expected in check_dual_entries(md.cx_f, md.cx_neg)}
    return _report("dual_signs", md, fixture, residual, settings.DEFAULT_SEED)
