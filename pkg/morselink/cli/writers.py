"""
报告与表格的写出

同一份数据总是写出同样的字节：JSON 键排序、缩进固定，不含时间戳。
"""

import csv
import io
import json
import logging
import re
from fractions import Fraction
from pathlib import Path
from typing import Any, Iterable, List, Tuple

from ..core.errors import ErrorCode, MorseLinkError
from ..schemas import BetaRow, IdentityReport

logger = logging.getLogger(__name__)

BETA_FIELDS = ["k", "q_k", "beta_alg", "beta_geom", "witness"]


def slug(name: str) -> str:
    return re.sub(r"[^a-z0-9]+", "-", name.lower()).strip("-") or "fixture"


def fixture_dir(out: str, fixture: str) -> Path:
    path = Path(out) / slug(fixture)
    try:
        path.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise MorseLinkError(ErrorCode.IO_ERROR, f"无法创建输出目录 {path}: {exc}")
    return path


def write_text(path: Path, text: str) -> Path:
    """
    Raises:
        MorseLinkError: IO_ERROR
    """
    try:
        path.write_text(text, encoding="utf-8")
    except OSError as exc:
        raise MorseLinkError(ErrorCode.IO_ERROR, f"无法写入 {path}: {exc}")
    logger.debug("已写出 %s", path)
    return path


def _plain(value: Any) -> Any:
    # numpy 标量与分数
    if hasattr(value, "item"):
        return value.item()
    if isinstance(value, Fraction):
        return str(value)
    raise TypeError(f"无法序列化 {type(value).__name__}")


def dumps(data: Any) -> str:
    return json.dumps(data, ensure_ascii=False, indent=2, sort_keys=True, default=_plain) + "\n"


def write_json(path: Path, data: Any) -> Path:
    return write_text(path, dumps(data))


def write_reports(directory: Path, reports: Iterable[Tuple[str, IdentityReport]]) -> List[Path]:
    """逐份写出 NN-套件-恒等式.json，另写 summary.json"""
    paths, summary = [], []
    for i, (suite, report) in enumerate(reports, start=1):
        name = f"{i:02d}-{suite}-{report.identity}"
        if report.k is not None:
            name += f"-k{report.k}"
        paths.append(write_json(directory / f"{name}.json", report.model_dump()))
        summary.append({"file": f"{name}.json", "suite": suite, "identity": report.identity,
                        "k": report.k, "status": report.status})
    write_json(directory / "summary.json", summary)
    return paths


def beta_csv(rows: List[BetaRow]) -> str:
    buffer = io.StringIO()
    writer = csv.DictWriter(buffer, fieldnames=BETA_FIELDS, lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow(row.model_dump())
    return buffer.getvalue()


def beta_table(rows: List[BetaRow]) -> str:
    """终端表格"""
    header = f"{'k':>3}  {'q_k':>4}  {'β^alg':>10}  {'β^geom ≥':>10}  witness"
    lines = [header, "-" * len(header)]
    for row in rows:
        lines.append(f"{row.k:>3}  {row.q_k:>4}  {row.beta_alg:>10.6g}  {row.beta_geom:>10.6g}  {row.witness}")
    return "\n".join(lines)
