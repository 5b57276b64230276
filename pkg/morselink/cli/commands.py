"""
子命令：verify、beta、export、oracle

每个子命令返回退出码：0 全部通过，1 有失败报告。
"""

import logging
from typing import Dict, List

from ..algebra import INTEGERS, Chain, beta_alg_sup, dump_complex, morse_inequality_decomposition
from ..core.errors import ErrorCode, MorseLinkError
from ..geometry import census_csv
from ..linktheory import (
    beta_geom_search,
    check_oracle_linking,
    circle_oracle,
    load_circle_config,
    oracle_beta_equality,
    pseudoboundary_from_chain,
)
from ..schemas import BetaRow
from .fixtures import load_fixture
from .run_config import RunConfig
from .suites import run_suites
from .writers import beta_csv, beta_table, fixture_dir, write_json, write_reports, write_text

logger = logging.getLogger(__name__)


def _finish(reports, directory) -> int:
    failed = [(suite, r) for suite, r in reports if r.failed]
    skipped = [(suite, r) for suite, r in reports if r.skipped]
    passed = len(reports) - len(failed) - len(skipped)
    print(f"共 {len(reports)} 份报告，{passed} 份通过，{len(skipped)} 份跳过，已写入 {directory}")
    # 只有全部为 pass 时返回 0
    if failed or skipped:
        suite, first = (failed or skipped)[0]
        k = "" if first.k is None else f" k={first.k}"
        print(f"首个未通过: {suite}/{first.identity}{k} [{first.fixture}] {first.status} {first.detail}".rstrip())
        return 1
    return 0


def cmd_verify(config: RunConfig) -> int:
    """运行选中的校验套件并写出 JSON 报告"""
    fixture = load_fixture(config)
    reports = run_suites(fixture, config)
    directory = fixture_dir(config.out, fixture.name)
    write_reports(directory, reports)
    for suite, report in reports:
        k = "" if report.k is None else f" k={report.k}"
        print(f"  [{report.status:>5}] {suite:<10} {report.identity}{k}")
    return _finish(reports, directory)


def cmd_beta(config: RunConfig) -> int:
    """逐度数的 q_k、β^alg 与 β^geom 下界"""
    fixture = load_fixture(config)
    md = fixture.md
    field = config.coefficient_ring.as_field()
    q = morse_inequality_decomposition(md.cx_f, field).q
    rows: List[BetaRow] = []
    for k in config.degrees_for(fixture.n):
        beta_alg = beta_alg_sup(md.cx_f, k, field).beta
        search = beta_geom_search(md, k, config.strategy, field, fixture.seed)
        rows.append(BetaRow(k=k, q_k=q[k], beta_alg=beta_alg, beta_geom=search.bound, witness=search.summary()))
    print(f"{fixture.name}（{field.label}，种子 {fixture.seed}）")
    print(beta_table(rows))
    path = write_text(fixture_dir(config.out, fixture.name) / "beta.csv", beta_csv(rows))
    print(f"已写入 {path}")
    return 0


def cmd_export(config: RunConfig) -> int:
    """导出复形 JSON、临界点与轨道 CSV、伪边界链 JSON"""
    fixture = load_fixture(config)
    md = fixture.md
    directory = fixture_dir(config.out, fixture.name)
    write_text(directory / "complex_f.json", dump_complex(md.cx_f) + "\n")
    write_text(directory / "complex_neg.json", dump_complex(md.cx_neg) + "\n")
    write_text(directory / "critical_points.csv", census_csv(list(md.crits)))
    write_text(directory / "trajectories.csv", md.trajectory_csv())

    chains: Dict[str, list] = {}
    cache: dict = {}
    for k in config.degrees_for(fixture.n):
        entries = []
        for gid in md.cx_f.ids(k + 1):
            _, b = pseudoboundary_from_chain(md, Chain(k + 1, {gid: 1}, INTEGERS), cache=cache)
            if b.is_empty():
                continue
            entries.append({"generator": gid, "chain": b.to_document(md.model.name).model_dump()})
        chains[str(k)] = entries
    write_json(directory / "pseudoboundaries.json", chains)
    print(f"已导出 {fixture.name} 到 {directory}")
    return 0


def cmd_oracle(config: RunConfig) -> int:
    """圆周组合配置：β^alg、β^geom 与链接恒等式"""
    if not config.circle:
        raise MorseLinkError(ErrorCode.INVALID_CONFIG, "oracle 需要 --circle")
    circle = load_circle_config(config.circle)
    ring = config.coefficient_ring
    result = circle_oracle(circle, ring)
    reports = [("oracle", oracle_beta_equality(circle))]
    if result.linking:
        reports.insert(0, ("oracle", check_oracle_linking(circle, ring)))
    directory = fixture_dir(config.out, circle.name)
    write_json(directory / "oracle.json", result.to_dict())
    write_reports(directory, reports)
    print(f"{circle.name}: β^alg = {result.beta_alg:.6g}，β^geom = {result.beta_geom:.6g}")
    if result.linking:
        terms = result.linking
        print(f"lk = {terms['lk']}，修正项 = {terms['correction']}，Λ = {terms['lam']}")
    return _finish(reports, directory)


COMMANDS = {
    "verify": cmd_verify,
    "beta": cmd_beta,
    "export": cmd_export,
    "oracle": cmd_oracle,
}
