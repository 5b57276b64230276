"""
复形不变量：Morse 不等式分解与边界深度（代数链接分离度）
"""

import logging
import math
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

from . import linalg
from .complex import Chain, FilteredComplex, dual_complex, pi_pairing, primitive
from .ring import Coefficient, CoefficientRing

logger = logging.getLogger(__name__)


@dataclass
class MorseDecomposition:
    """𝔐(t) = 𝔓(t) + (1+t)𝔔(t) 的系数"""
    morse: List[int]
    poincare: List[int]
    q: List[int]

    def to_dict(self) -> dict:
        return {"morse": self.morse, "poincare": self.poincare, "q": self.q}


@dataclass
class SeparationWitness:
    """β^alg 的见证：x ∈ Im d_{-f}，y ∈ Im d_f，且 Λ(x, y) ≠ 0"""
    x: Chain
    y: Chain
    x_level: float      # -ℓ_{-f}(x)，即 x 支撑上 f 的最小值
    y_level: float      # ℓ_f(y)
    value: Coefficient

    @property
    def gap(self) -> float:
        return self.x_level - self.y_level


@dataclass
class SeparationResult:
    beta: float
    witness: Optional[SeparationWitness] = None
    ring: Optional[CoefficientRing] = None
    notes: List[str] = field(default_factory=list)


def morse_inequality_decomposition(cx: FilteredComplex, ring: CoefficientRing) -> MorseDecomposition:
    """
    Morse 不等式分解

    Args:
        cx: 复形
        ring: 域（Q 或 Z/p）

    Returns:
        MorseDecomposition: 𝔟_k = c_k - r_k - r_{k+1}，q_k = r_{k+1}
    """
    ring.require_field("morse_inequality_decomposition")
    n = cx.dimension
    ranks = [0] * (n + 2)
    for k in range(1, n + 1):
        ranks[k] = cx.rank(k, ring)
    morse = [cx.count(k) for k in range(n + 1)]
    q = [ranks[k + 1] for k in range(n + 1)]
    poincare = [morse[k] - ranks[k] - ranks[k + 1] for k in range(n + 1)]
    return MorseDecomposition(morse=morse, poincare=poincare, q=q)


def _field_complex(cx: FilteredComplex, ring: Optional[CoefficientRing], operation: str) -> FilteredComplex:
    target = ring or cx.ring
    if not target.is_field:
        logger.warning("%s 在整数环上需要除法，改用有理数域计算", operation)
        target = target.as_field()
    if target != cx.ring:
        return cx.with_ring(target)
    return cx


def _adapted_basis(cx: FilteredComplex, degree: int, vectors: linalg.Matrix,
                   descending: bool) -> List[Tuple[Chain, float]]:
    """
    与滤过相容的基

    列按滤过值排序（descending=True 时从高到低，主元给出 ℓ；
    否则从低到高，主元给出支撑上的最小值），再做 rref。
    """
    gens = cx.in_degree(degree)
    order = sorted(range(len(gens)), key=lambda i: (gens[i].level, gens[i].id), reverse=descending)
    permuted = [[row[i] for i in order] for row in vectors]
    rows, pivots = linalg.echelon_basis(permuted, len(order), cx.ring)
    basis = []
    for row, pivot in zip(rows, pivots):
        values = [0] * len(gens)
        for position, original in enumerate(order):
            values[original] = row[position]
        basis.append((cx.from_vector(degree, values), gens[order[pivot]].level))
    return basis


def _image_vectors(cx: FilteredComplex, k: int) -> linalg.Matrix:
    """d_k 的列（作为 k-1 度向量）"""
    matrix = cx.matrix(k)
    return [[matrix[r][c] for r in range(len(matrix))] for c in range(cx.count(k))]


def beta_alg_sup(cx: FilteredComplex, k: int, ring: Optional[CoefficientRing] = None) -> SeparationResult:
    """
    代数链接分离度 β^alg_k（上确界定义）

    在 Im d_{-f} 与 Im d_{f,k+1} 的滤过相容基上穷举，
    取 Λ 非零的配对中 -ℓ_{-f}(x) - ℓ_f(y) 的最大值。
    """
    fcx = _field_complex(cx, ring, "beta_alg_sup")
    n = fcx.dimension
    if k < 0 or k + 1 > n:
        return SeparationResult(beta=0.0, ring=fcx.ring)
    dual = dual_complex(fcx)
    y_basis = _adapted_basis(fcx, k, _image_vectors(fcx, k + 1), descending=True)
    # x 位于对偶 n-k-1 度，即 f 的 k+1 度
    x_vectors = _image_vectors(dual, n - k)
    x_basis = _adapted_basis(fcx, k + 1, x_vectors, descending=False)
    if not y_basis or not x_basis:
        return SeparationResult(beta=0.0, ring=fcx.ring)

    primitives = [primitive(fcx, y) for y, _ in y_basis]
    best: Optional[SeparationWitness] = None
    for x_chain, x_level in x_basis:
        x_dual = dual.chain(n - k - 1, x_chain.coefficients)
        for (y_chain, y_level), z in zip(y_basis, primitives):
            value = pi_pairing(x_dual, z, n)
            if value == 0:
                continue
            candidate = SeparationWitness(x_dual, y_chain, x_level, y_level, value)
            if best is None or candidate.gap > best.gap:
                best = candidate
    if best is None:
        return SeparationResult(beta=0.0, ring=fcx.ring)
    return SeparationResult(beta=max(0.0, best.gap), witness=best, ring=fcx.ring)


def beta_alg_depth(cx: FilteredComplex, k: int, ring: Optional[CoefficientRing] = None) -> float:
    """
    边界深度 β_k：使每个 λ 层的边界都在 λ+β 层有原像的最小 β

    Args:
        cx: 复形
        k: 度数
        ring: 域；缺省用复形自身的环

    Returns:
        float: 边界深度
    """
    target = ring or cx.ring
    target.require_field("beta_alg_depth")
    fcx = cx.with_ring(target) if target != cx.ring else cx
    if k < 0 or k + 1 > fcx.dimension:
        return 0.0
    y_basis = _adapted_basis(fcx, k, _image_vectors(fcx, k + 1), descending=True)
    if not y_basis:
        return 0.0

    sources = fcx.in_degree(k + 1)
    columns = _image_vectors(fcx, k + 1)
    mu_levels = sorted({g.level for g in sources})
    beta = 0.0
    for lam in sorted({lvl for _, lvl in y_basis}):
        # B_λ：滤过值不超过 λ 的边界
        targets = [fcx.vector(y) for y, lvl in y_basis if lvl <= lam]
        mu_found = math.inf
        for mu in mu_levels:
            allowed = [columns[i] for i, g in enumerate(sources) if g.level <= mu]
            base_rank = linalg.matrix_rank(allowed, fcx.count(k), fcx.ring)
            joint_rank = linalg.matrix_rank(allowed + targets, fcx.count(k), fcx.ring)
            if base_rank == joint_rank:
                mu_found = mu
                break
        beta = max(beta, mu_found - lam)
    return max(0.0, beta)
