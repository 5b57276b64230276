"""
圆周并上的精确组合计算

每个分支是一串按逆时针排列的标记点（极大、极小、b_+、b_-、探针），
两相邻临界点之间为一段单调斜坡。所有量都由区间组合直接算出，
用作数值流水线的对照。
"""

import logging
try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from dataclasses import dataclass, field
from itertools import combinations
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from pydantic import ValidationError

from ..algebra import (
    INTEGERS,
    RATIONALS,
    CoefficientRing,
    FilteredComplex,
    Generator,
    beta_alg_sup,
    dual_complex,
    lambda_pairing,
    make_complex,
    pi_pairing,
)
from ..core.errors import ErrorCode, MorseLinkError
from ..flow import ChainMap
from ..geometry.models import TWO_PI, CircleModel
from ..plchain import sign_linksym
from ..schemas import CircleComponent, CircleConfig, IdentityReport, MarkedPoint

logger = logging.getLogger(__name__)

CRITICAL_TAGS = ("max", "min")


def load_circle_config(path: Union[str, Path]) -> CircleConfig:
    """
    读取 TOML 圆周配置

    Raises:
        MorseLinkError: IO_ERROR / INVALID_CONFIG
    """
    try:
        with open(path, "rb") as fh:
            raw = tomllib.load(fh)
    except OSError as exc:
        raise MorseLinkError(ErrorCode.IO_ERROR, f"无法读取 {path}: {exc}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise MorseLinkError(ErrorCode.INVALID_CONFIG, f"{path}: TOML 解析失败: {exc}") from exc
    try:
        return CircleConfig.model_validate(raw)
    except ValidationError as exc:
        raise MorseLinkError(ErrorCode.INVALID_CONFIG, f"{path}: {exc}") from exc


# ----------------------------------------------------------------------
# 校验与斜坡分解
# ----------------------------------------------------------------------

@dataclass(frozen=True)
class Slot:
    """带分支号与位置的标记点"""
    component: int
    position: int
    tag: str
    value: float
    mult: int
    name: str


@dataclass
class Slope:
    """两相邻临界点之间的一段；marks 按流动方向（从极大到极小）排列"""
    top: str
    bottom: str
    sign: int
    marks: List[Slot]


@dataclass
class CircleLayout:
    slots: List[List[Slot]]
    slopes: List[Slope]
    maxima: List[Slot]
    minima: List[Slot]

    def marks(self, tag: str) -> List[Slot]:
        return [s for component in self.slots for s in component if s.tag == tag]


def _named(config: CircleConfig) -> List[List[Slot]]:
    counters = {"max": 0, "min": 0}
    prefixes = {"max": "M", "min": "m", "b_plus": "b+", "b_minus": "b-", "probe": "x"}
    seen = set()
    out = []
    for ci, component in enumerate(config.components):
        row = []
        for pi, point in enumerate(component.points):
            if point.tag in counters:
                counters[point.tag] += 1
                default = f"{prefixes[point.tag]}{counters[point.tag]}"
            else:
                default = f"{prefixes[point.tag]}{ci}.{pi}"
            name = point.name or default
            if name in seen:
                raise MorseLinkError(ErrorCode.INVALID_CONFIG, f"标记点名称重复: {name}")
            seen.add(name)
            row.append(Slot(ci, pi, point.tag, float(point.value), int(point.mult), name))
        out.append(row)
    return out


def _component_slopes(row: List[Slot]) -> List[Slope]:
    ci = row[0].component
    crit_at = [i for i, s in enumerate(row) if s.tag in CRITICAL_TAGS]
    if len(crit_at) < 2:
        raise MorseLinkError(ErrorCode.INVALID_CONFIG, f"分支 {ci}: 至少需要一个极大和一个极小")
    slopes = []
    for j, start in enumerate(crit_at):
        end = crit_at[(j + 1) % len(crit_at)]
        a, b = row[start], row[end]
        if a.tag == b.tag:
            raise MorseLinkError(ErrorCode.INVALID_CONFIG, f"分支 {ci}: {a.name} 与 {b.name} 未交替")
        between = row[start + 1:end] if end > start else row[start + 1:] + row[:end]
        if a.tag == "max":
            top, bottom, sign, along = a, b, 1, list(between)
        else:
            top, bottom, sign, along = b, a, -1, list(reversed(between))
        if not top.value > bottom.value:
            raise MorseLinkError(ErrorCode.INVALID_CONFIG, f"分支 {ci}: {top.name} 不高于 {bottom.name}")
        values = [top.value] + [s.value for s in along] + [bottom.value]
        if any(values[i] <= values[i + 1] for i in range(len(values) - 1)):
            raise MorseLinkError(ErrorCode.INVALID_CONFIG,
                                 f"分支 {ci}: {top.name}→{bottom.name} 上的标记点值不严格单调")
        slopes.append(Slope(top.name, bottom.name, sign, along))
    return slopes


def validate_config(config: CircleConfig) -> CircleLayout:
    """
    校验配置并分解为斜坡

    Raises:
        MorseLinkError: INVALID_CONFIG
    """
    slots = _named(config)
    slopes = []
    for row in slots:
        slopes.extend(_component_slopes(row))
        for tag in ("b_plus", "b_minus"):
            marks = [s for s in row if s.tag == tag]
            if any(s.mult == 0 for s in marks):
                raise MorseLinkError(ErrorCode.INVALID_CONFIG, f"分支 {row[0].component}: {tag} 含零重数")
            if sum(s.mult for s in marks):
                raise MorseLinkError(ErrorCode.INVALID_CONFIG,
                                     f"分支 {row[0].component}: {tag} 的重数和不为 0，不是零调闭链")
    maxima = [s for row in slots for s in row if s.tag == "max"]
    minima = [s for row in slots for s in row if s.tag == "min"]
    return CircleLayout(slots, slopes, maxima, minima)


# ----------------------------------------------------------------------
# 组合量
# ----------------------------------------------------------------------

def oracle_complex(layout: CircleLayout, ring: CoefficientRing = INTEGERS) -> FilteredComplex:
    """d M = (逆时针下一个极小) - (顺时针上一个极小)"""
    gens = [Generator(s.name, 1, s.value) for s in layout.maxima] + \
           [Generator(s.name, 0, s.value) for s in layout.minima]
    rows = {s.name: i for i, s in enumerate(layout.minima)}
    cols = {s.name: j for j, s in enumerate(layout.maxima)}
    matrix = [[0] * len(cols) for _ in rows]
    for slope in layout.slopes:
        matrix[rows[slope.bottom]][cols[slope.top]] += slope.sign
    return make_complex(1, ring, gens, {1: matrix})


def flow_counts(layout: CircleLayout) -> Dict[Tuple[str, str], int]:
    counts: Dict[Tuple[str, str], int] = {}
    for slope in layout.slopes:
        key = (slope.top, slope.bottom)
        counts[key] = counts.get(key, 0) + slope.sign
    return counts


def oracle_linking(layout: CircleLayout, minus_tag: str = "b_minus", plus_tag: str = "b_plus") -> int:
    """lk(b_-, b_+) = Σ m_y m_x [y 在 x 之前]，同一分支内按列表次序"""
    total = 0
    for row in layout.slots:
        for y in (s for s in row if s.tag == minus_tag):
            for x in (s for s in row if s.tag == plus_tag):
                if y.position < x.position:
                    total += y.mult * x.mult
    return total


def oracle_cap(layout: CircleLayout, tag: str, negated: bool = False) -> ChainMap:
    """斜坡 (M, m) 上每个点贡献 +mult；-f 方向键为 (m, M)"""
    entries: Dict[Tuple[str, str], int] = {}
    for slope in layout.slopes:
        key = (slope.bottom, slope.top) if negated else (slope.top, slope.bottom)
        for s in slope.marks:
            if s.tag == tag:
                entries[key] = entries.get(key, 0) + s.mult
    return ChainMap.build(1, entries)


def oracle_two_point(layout: CircleLayout, first: str, second: str) -> ChainMap:
    """同一斜坡上先经过 first、后经过 second 的有序点对，乘斜坡符号"""
    entries: Dict[Tuple[str, str], int] = {}
    for slope in layout.slopes:
        total = 0
        for i, s0 in enumerate(slope.marks):
            if s0.tag != first:
                continue
            for s1 in slope.marks[i + 1:]:
                if s1.tag == second:
                    total += s0.mult * s1.mult
        if total:
            key = (slope.top, slope.bottom)
            entries[key] = entries.get(key, 0) + slope.sign * total
    return ChainMap.build(1, entries)


def _cyclic_between(order: Dict[str, int], a: str, b: str, c: str) -> bool:
    """逆时针从 a 出发先遇到 b 再遇到 c"""
    pa, pb, pc = order[a], order[b], order[c]
    return (pb - pa) % len(order) < (pc - pa) % len(order)


def oracle_beta_geom(layout: CircleLayout) -> Tuple[float, Optional[Tuple[str, str, str, str]]]:
    """
    几何链接分离度（k = 0）的精确值

    非平凡链接的点对至少需要同一分支上交错的两个极小与两个极大；
    分离度为两极大中较低者减两极小中较高者。

    Returns:
        (β^geom, (m_a, M_b, m_c, M_d)) 或 (0.0, None)
    """
    best, witness = 0.0, None
    for row in layout.slots:
        crits = [s for s in row if s.tag in CRITICAL_TAGS]
        order = {s.name: i for i, s in enumerate(crits)}
        values = {s.name: s.value for s in crits}
        minima = [s.name for s in crits if s.tag == "min"]
        maxima = [s.name for s in crits if s.tag == "max"]
        for a, c in combinations(minima, 2):
            for b, d in combinations(maxima, 2):
                if _cyclic_between(order, a, b, c) == _cyclic_between(order, a, d, c):
                    continue
                gap = min(values[b], values[d]) - max(values[a], values[c])
                if gap > best:
                    best, witness = gap, (a, b, c, d)
    return best, witness


# ----------------------------------------------------------------------
# 汇总
# ----------------------------------------------------------------------

@dataclass
class OracleResult:
    name: str
    cx_f: FilteredComplex
    cx_neg: FilteredComplex
    counts: Dict[Tuple[str, str], int]
    lk: int
    cap_plus: ChainMap
    cap_minus: ChainMap
    two_point: ChainMap
    beta_alg: float
    beta_geom: float
    geom_witness: Optional[Tuple[str, ...]] = None
    linking: Dict[str, object] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "counts": [[p, q, v] for (p, q), v in sorted(self.counts.items())],
            "lk": self.lk,
            "cap_plus": self.cap_plus.to_dict(),
            "cap_minus": self.cap_minus.to_dict(),
            "two_point": self.two_point.to_dict(),
            "beta_alg": self.beta_alg,
            "beta_geom": self.beta_geom,
            "geom_witness": list(self.geom_witness or ()),
            "linking": self.linking,
        }


def linking_identity_terms(cx_f: FilteredComplex, cx_neg: FilteredComplex, lk: int, cap_plus: ChainMap,
                           cap_minus: ChainMap, two_point: ChainMap, k: int = 0) -> Dict[str, object]:
    """
    Λ(I_{b_-} M_{-f}, I_{b_+} M_f) 与 lk - (-1)^{(n-k)(k+1)} Π(M_{-f}, I_{b_+,b_-} M_f)

    Returns:
        dict: lam、lk、correction、rhs、residual
    """
    n = cx_f.dimension
    m_f, m_neg = cx_f.fundamental_cycle(), cx_neg.fundamental_cycle()
    x = cap_minus.apply(cx_neg, m_neg)
    y = cap_plus.apply(cx_f, m_f)
    lam = lambda_pairing(cx_f, x, y)
    correction = pi_pairing(m_neg, two_point.apply(cx_f, m_f), n)
    rhs = lk - sign_linksym(n, k) * correction
    return {"lam": lam, "lk": lk, "correction": correction, "rhs": rhs, "residual": lam - rhs}


def circle_oracle(config: CircleConfig, ring: CoefficientRing = INTEGERS) -> OracleResult:
    """
    圆周配置的全部组合量

    Args:
        config: 圆周配置
        ring: 复形系数环；β 在其分式域（Z 时取 Q）上计算

    Returns:
        OracleResult

    Raises:
        MorseLinkError: INVALID_CONFIG
    """
    layout = validate_config(config)
    cx_f = oracle_complex(layout, ring)
    cx_neg = dual_complex(cx_f)
    field_ring = ring if ring.is_field else RATIONALS
    beta_alg = beta_alg_sup(cx_f, 0, field_ring).beta
    beta_geom, witness = oracle_beta_geom(layout)
    result = OracleResult(
        name=config.name,
        cx_f=cx_f,
        cx_neg=cx_neg,
        counts=flow_counts(layout),
        lk=oracle_linking(layout),
        cap_plus=oracle_cap(layout, "b_plus"),
        cap_minus=oracle_cap(layout, "b_minus", negated=True),
        two_point=oracle_two_point(layout, "b_plus", "b_minus"),
        beta_alg=beta_alg,
        beta_geom=beta_geom,
        geom_witness=witness,
    )
    if layout.marks("b_plus") and layout.marks("b_minus"):
        result.linking = linking_identity_terms(cx_f, cx_neg, result.lk, result.cap_plus, result.cap_minus,
                                                result.two_point)
    logger.debug("%s: β^alg = %s，β^geom = %s，lk = %d", config.name, beta_alg, beta_geom, result.lk)
    return result


def check_oracle_linking(config: CircleConfig, ring: CoefficientRing = INTEGERS) -> IdentityReport:
    """圆周配置上的链接恒等式"""
    result = circle_oracle(config, ring)
    terms = result.linking
    residual = int(terms.get("residual", 0)) if terms else 0
    status = "pass" if residual == 0 else "fail"
    report = IdentityReport(
        identity="linking_identity",
        fixture=config.name,
        status=status,
        k=0,
        lhs=None if not terms else int(terms["lam"]),
        rhs=None if not terms else int(terms["rhs"]),
        residual=residual,
        residual_max=float(abs(residual)),
        ring=ring.label,
        witnesses=[{"lk": result.lk, "correction": None if not terms else int(terms["correction"])}],
        detail="oracle",
    )
    if not report.passed:
        logger.warning("linking_identity [%s]: 残差 %d", config.name, residual)
    return report


def oracle_beta_equality(config: CircleConfig) -> IdentityReport:
    """β^alg_0 = β^geom_0，圆周上精确比较"""
    result = circle_oracle(config)
    residual = result.beta_alg - result.beta_geom
    return IdentityReport(
        identity="beta_alg_equals_geom",
        fixture=config.name,
        status="pass" if residual == 0 else "fail",
        k=0,
        lhs=result.beta_alg,
        rhs=result.beta_geom,
        residual=residual,
        residual_max=abs(residual),
        ring=RATIONALS.label,
        witnesses=[{"critical": list(result.geom_witness or ())}],
        detail="oracle",
    )


# ----------------------------------------------------------------------
# 与数值模型对接
# ----------------------------------------------------------------------

Mark = Tuple[float, str, int]


def _crit_names(model: CircleModel) -> List[str]:
    if model.labels:
        return list(model.labels)
    values = model.critical_values
    is_max = [values[i] > values[(i + 1) % len(values)] for i in range(len(values))]
    maxima = sorted((i for i in range(len(values)) if is_max[i]), key=lambda i: -values[i])
    minima = sorted((i for i in range(len(values)) if not is_max[i]), key=lambda i: values[i])
    names = [""] * len(values)
    for rank, i in enumerate(maxima, start=1):
        names[i] = f"M{rank}"
    for rank, i in enumerate(minima, start=1):
        names[i] = f"m{rank}"
    return names


def config_from_model(model: CircleModel, marks: Sequence[Mark] = ()) -> CircleConfig:
    """
    数值圆周模型对应的组合配置，临界点名称与数值流水线一致

    Args:
        model: 圆周模型
        marks: (θ, tag, mult) 列表，θ 不得与临界点重合

    Returns:
        CircleConfig
    """
    positions = model.critical_positions
    values = model.critical_values
    names = _crit_names(model)
    entries = []
    for i, theta in enumerate(positions):
        tag = "max" if values[i] > values[(i + 1) % len(values)] else "min"
        entries.append((float(theta), MarkedPoint(tag=tag, value=float(values[i]), name=names[i])))
    for theta, tag, mult in marks:
        theta = float(np.mod(theta, TWO_PI))
        if np.min(np.abs(positions - theta)) < 1e-12:
            raise MorseLinkError(ErrorCode.INVALID_CONFIG, f"标记点 θ = {theta} 落在临界点上")
        value = float(model.values(np.array([[theta]]))[0])
        entries.append((theta, MarkedPoint(tag=tag, value=value, mult=int(mult))))
    entries.sort(key=lambda item: item[0])
    return CircleConfig(name=model.name, components=[CircleComponent(points=[p for _, p in entries])])


def random_circle_config(rng: np.random.Generator, m: int, marks: int = 2, name: str = "random") -> CircleConfig:
    """
    随机单分支配置：m 个极大，b_+ 与 b_- 各 marks 个点（重数和为 0）

    Args:
        rng: 随机数发生器
        m: 极大个数
        marks: 每种标记的点数（≥ 2）
        name: 配置名
    """
    if m < 1 or marks < 2:
        raise MorseLinkError(ErrorCode.INVALID_CONFIG, f"需要 m ≥ 1、marks ≥ 2: m={m}, marks={marks}")
    values = []
    minima = rng.uniform(0.0, 5.0, size=m)
    for i in range(m):
        peak = max(minima[i - 1], minima[i]) + rng.uniform(0.2, 4.0)
        values.extend([float(peak), float(minima[i])])
    count = 2 * m
    # 每段斜坡上的标记点：(段号, 段内比例)
    placed: List[Tuple[int, float, str, int]] = []
    for tag in ("b_plus", "b_minus"):
        while True:
            mults = [int(v) for v in rng.choice([-2, -1, 1, 2], size=marks - 1)]
            if sum(mults):
                break
        mults.append(-sum(mults))
        for mult in mults:
            placed.append((int(rng.integers(count)), float(rng.uniform(0.05, 0.95)), tag, int(mult)))
    points = []
    for i in range(count):
        a, b = values[i], values[(i + 1) % count]
        points.append(MarkedPoint(tag="max" if a > b else "min", value=a))
        inside = sorted((t, tag, mult) for seg, t, tag, mult in placed if seg == i)
        for j, (t, tag, mult) in enumerate(inside):
            t = t + 1e-6 * j
            points.append(MarkedPoint(tag=tag, value=a + (b - a) * t, mult=mult))
    return CircleConfig(name=name, components=[CircleComponent(points=points)])
