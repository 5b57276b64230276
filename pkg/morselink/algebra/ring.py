"""
系数环

支持整数 Z、有理数 Q 与素数模 p 的剩余类环；所有运算均为精确运算。
"""

from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Any, Optional, Union

from sympy import isprime
from sympy.polys.domains import GF, QQ, ZZ

from ..core.errors import ErrorCode, MorseLinkError

Coefficient = Union[int, Fraction]


class RingKind(Enum):
    """系数环类型"""
    INTEGERS = "Z"
    RATIONALS = "Q"
    MOD_P = "Zp"


@dataclass(frozen=True)
class CoefficientRing:
    """系数环"""
    kind: RingKind
    p: Optional[int] = None

    def __post_init__(self):
        if self.kind is RingKind.MOD_P:
            if self.p is None or not isprime(self.p):
                raise MorseLinkError(ErrorCode.INVALID_CONFIG, f"模数必须为素数: {self.p}")
        elif self.p is not None:
            raise MorseLinkError(ErrorCode.INVALID_CONFIG, f"{self.kind.value} 不接受模数")

    # ------------------------------------------------------------------
    # 构造
    # ------------------------------------------------------------------

    @classmethod
    def integers(cls) -> "CoefficientRing":
        return cls(RingKind.INTEGERS)

    @classmethod
    def rationals(cls) -> "CoefficientRing":
        return cls(RingKind.RATIONALS)

    @classmethod
    def mod(cls, p: int) -> "CoefficientRing":
        return cls(RingKind.MOD_P, p)

    @classmethod
    def parse(cls, text: str) -> "CoefficientRing":
        """
        解析命令行写法: Z | Q | Zp:<p>（Z2 视为 Zp:2）

        Args:
            text: 环的文本表示

        Returns:
            CoefficientRing: 解析结果
        """
        token = text.strip()
        if token in ("Z", "ZZ"):
            return cls.integers()
        if token in ("Q", "QQ"):
            return cls.rationals()
        if token.startswith("Zp:"):
            modulus = token[3:]
        elif token.startswith("Z") and token[1:].isdigit():
            modulus = token[1:]
        else:
            raise MorseLinkError(ErrorCode.INVALID_CONFIG, f"无法识别的系数环: {text}")
        try:
            return cls.mod(int(modulus))
        except ValueError:
            raise MorseLinkError(ErrorCode.INVALID_CONFIG, f"无法识别的系数环: {text}")

    # ------------------------------------------------------------------
    # 属性
    # ------------------------------------------------------------------

    @property
    def is_field(self) -> bool:
        return self.kind is not RingKind.INTEGERS

    @property
    def label(self) -> str:
        if self.kind is RingKind.MOD_P:
            return f"Zp:{self.p}"
        return self.kind.value

    @property
    def domain(self):
        """对应的 sympy 定义域"""
        if self.kind is RingKind.INTEGERS:
            return ZZ
        if self.kind is RingKind.RATIONALS:
            return QQ
        return GF(self.p)

    def as_field(self) -> "CoefficientRing":
        """整数环退化为有理数域，其余保持不变"""
        return self.rationals() if self.kind is RingKind.INTEGERS else self

    def require_field(self, operation: str) -> None:
        if not self.is_field:
            raise MorseLinkError(ErrorCode.NOT_A_FIELD, f"{operation} 需要域系数，当前为 {self.label}")

    # ------------------------------------------------------------------
    # 元素运算
    # ------------------------------------------------------------------

    def normalize(self, value: Any) -> Coefficient:
        """将任意整数/分数化为本环的规范代表元"""
        if isinstance(value, str):
            value = Fraction(value)
        if self.kind is RingKind.INTEGERS:
            frac = Fraction(value)
            if frac.denominator != 1:
                raise MorseLinkError(ErrorCode.UNSOLVABLE_OVER_RING, f"{value} 不是整数")
            return int(frac)
        if self.kind is RingKind.RATIONALS:
            return Fraction(value)
        frac = Fraction(value)
        numerator = frac.numerator % self.p
        if frac.denominator == 1:
            return numerator
        return numerator * pow(frac.denominator, -1, self.p) % self.p

    def add(self, a: Coefficient, b: Coefficient) -> Coefficient:
        return self.normalize(a + b)

    def mul(self, a: Coefficient, b: Coefficient) -> Coefficient:
        return self.normalize(a * b)

    def neg(self, a: Coefficient) -> Coefficient:
        return self.normalize(-a)

    def is_zero(self, a: Coefficient) -> bool:
        return self.normalize(a) == 0

    def to_domain(self, value: Coefficient):
        """转换为 sympy 定义域元素"""
        value = self.normalize(value)
        if self.kind is RingKind.RATIONALS:
            return QQ(value.numerator, value.denominator)
        return self.domain(int(value))

    def from_domain(self, element) -> Coefficient:
        """由 sympy 定义域元素转换回来"""
        if self.kind is RingKind.INTEGERS:
            return int(element)
        if self.kind is RingKind.RATIONALS:
            return Fraction(int(element.numerator), int(element.denominator))
        return int(self.domain.to_int(element)) % self.p

    def format(self, value: Coefficient) -> str:
        """十进制字符串（分数写作 a/b）"""
        return str(self.normalize(value))

    def __str__(self) -> str:
        return self.label


INTEGERS = CoefficientRing.integers()
RATIONALS = CoefficientRing.rationals()
