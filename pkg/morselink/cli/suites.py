"""
校验套件

    identities  链层面恒等式：d² = 0、cap 的 Leibniz 公式、两点映射的边界公式、cap 伴随、点数
    dualm       -f 复形与 f 复形对偶的逐项符号
    linklink    β^geom 见证对上的链接恒等式
    alggeom     β^alg = β^geom
    main2       伪边界族实现链接矩阵的秩

套件按固定次序依次运行，报告次序与内容只依赖运行配置。
"""

import logging
from typing import Callable, Dict, List, Tuple

from ..core.config import settings
from ..core.errors import ErrorCode, MorseLinkError
from ..flow import (
    check_boundary_squared,
    check_cap_adjoint,
    check_cap_leibniz,
    check_dual_signs,
    check_point_count,
    check_two_point_boundary,
)
from ..geometry.models import ModelKind
from ..linktheory import check_linking_identity, verify_beta_equality, verify_rank_realization
from ..schemas import IdentityReport
from .fixtures import Fixture, sample_arc, sample_points, witness_pair
from .run_config import RunConfig

logger = logging.getLogger(__name__)

Suite = Callable[[Fixture, RunConfig], List[IdentityReport]]


def suite_identities(fx: Fixture, config: RunConfig) -> List[IdentityReport]:
    md, seed, rng = fx.md, fx.seed, fx.rng(1)
    arc = sample_arc(md, rng)
    points = sample_points(md, rng)
    first = sample_points(md, rng, 1)
    second = sample_arc(md, rng) if md.n >= 2 else sample_points(md, rng, 2)
    return [
        check_boundary_squared(md, fx.name).model_copy(update={"seed": seed}),
        check_cap_leibniz(md, arc, seed, fx.name),
        check_two_point_boundary(md, first, second, seed, fx.name),
        check_cap_adjoint(md, arc, seed, fx.name),
        check_point_count(md, points, seed, fx.name),
    ]


def suite_dualm(fx: Fixture, config: RunConfig) -> List[IdentityReport]:
    return [check_dual_signs(fx.md, fx.name).model_copy(update={"seed": fx.seed})]


def _vacuous(identity: str, fx: Fixture, k: int, ring: str) -> IdentityReport:
    return IdentityReport(
        identity=identity,
        fixture=fx.name,
        status="skip",
        k=k,
        lhs=0,
        rhs=0,
        residual={},
        seed=fx.seed,
        ring=ring,
        detail=f"{ErrorCode.NO_LINKED_PAIR_FOUND.value}: 只有空伪边界，没有可检验的链接对",
    )


def suite_linklink(fx: Fixture, config: RunConfig) -> List[IdentityReport]:
    field = config.coefficient_ring.as_field()
    reports = []
    for k in config.degrees_for(fx.n):
        pair = witness_pair(fx, k, field)
        if pair is None:
            reports.append(_vacuous("linking_identity", fx, k, fx.md.cx_f.ring.label))
            continue
        reports.append(check_linking_identity(fx.md, pair, fx.seed, fx.name))
    return reports


def suite_alggeom(fx: Fixture, config: RunConfig) -> List[IdentityReport]:
    tol = config.tol
    if fx.md.model.kind is not ModelKind.CIRCLE:
        tol = max(tol, settings.GEOM_TOL)
    field = config.coefficient_ring.as_field()
    return [verify_beta_equality(fx.md, k, tol, field, fx.seed, fx.name) for k in config.degrees_for(fx.n)]


def suite_main2(fx: Fixture, config: RunConfig) -> List[IdentityReport]:
    field = config.coefficient_ring.as_field()
    return [verify_rank_realization(fx.md, k, field, fx.seed, fx.name) for k in config.degrees_for(fx.n)]


SUITE_FUNCTIONS: Dict[str, Suite] = {
    "identities": suite_identities,
    "dualm": suite_dualm,
    "linklink": suite_linklink,
    "alggeom": suite_alggeom,
    "main2": suite_main2,
}


def _error_report(suite: str, fx: Fixture, exc: MorseLinkError) -> IdentityReport:
    return IdentityReport(
        identity=suite,
        fixture=fx.name,
        status="error",
        residual={"code": exc.code.value},
        residual_max=1.0,
        seed=fx.seed,
        ring=fx.md.cx_f.ring.label,
        detail=exc.detail,
    )


def run_suites(fx: Fixture, config: RunConfig) -> List[Tuple[str, IdentityReport]]:
    """
    依次运行选中的套件；单个套件内的 MorseLinkError 记为 status = "error" 的报告，不中断其余套件

    Returns:
        [(套件名, 报告)]
    """
    out: List[Tuple[str, IdentityReport]] = []
    for name in config.selected_suites():
        try:
            reports = SUITE_FUNCTIONS[name](fx, config)
        except MorseLinkError as exc:
            logger.error("套件 %s [%s] 出错: %s", name, fx.name, exc)
            reports = [_error_report(name, fx, exc)]
        passed = sum(1 for r in reports if r.passed)
        skipped = sum(1 for r in reports if r.skipped)
        logger.info("套件 %s [%s]: %d / %d 通过，%d 跳过", name, fx.name, passed, len(reports), skipped)
        out.extend((name, report) for report in reports)
    return out
