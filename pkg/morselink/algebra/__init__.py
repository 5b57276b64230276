"""
滤过链复形与精确代数

提供功能：
- 精确系数环（Z、Q、Z/p）
- 滤过链复形、对偶复形、Π 与 Λ 配对
- Morse 不等式分解与两种 β^alg 计算

使用示例：
    >>> from morselink.algebra import CoefficientRing, Generator, make_complex
    >>> ring = CoefficientRing.integers()
    >>> gens = [Generator("M1", 1, 4.0), Generator("M2", 1, 3.0),
    ...         Generator("m1", 0, 0.0), Generator("m2", 0, 1.0)]
    >>> cx = make_complex(1, ring, gens, {1: [[1, -1], [-1, 1]]})
    >>> beta_alg_sup(cx, 0).beta
    2.0
"""

from .complex import (
    Chain,
    FilteredComplex,
    Generator,
    dual_complex,
    lambda_pairing,
    level,
    make_complex,
    pi_pairing,
    primitive,
)
from .invariants import (
    MorseDecomposition,
    SeparationResult,
    SeparationWitness,
    beta_alg_depth,
    beta_alg_sup,
    morse_inequality_decomposition,
)
from .ring import INTEGERS, RATIONALS, CoefficientRing, RingKind
from .serialization import dump_complex, load_complex

__all__ = [
    "Chain",
    "FilteredComplex",
    "Generator",
    "dual_complex",
    "lambda_pairing",
    "level",
    "make_complex",
    "pi_pairing",
    "primitive",
    "MorseDecomposition",
    "SeparationResult",
    "SeparationWitness",
    "beta_alg_depth",
    "beta_alg_sup",
    "morse_inequality_decomposition",
    "INTEGERS",
    "RATIONALS",
    "CoefficientRing",
    "RingKind",
    "dump_complex",
    "load_complex",
]
