"""
错误码与统一异常

所有模块抛出 MorseLinkError，携带错误码与说明；
to_dict() 生成统一的错误文档 {"status": "error", "code": ..., "detail": ...}
"""

from enum import Enum
from typing import Any, Dict


class ErrorCode(str, Enum):
    """错误码"""
    # complex
    D_SQUARED_NONZERO = "D_SQUARED_NONZERO"
    FILTRATION_VIOLATION = "FILTRATION_VIOLATION"
    NOT_A_FIELD = "NOT_A_FIELD"
    DEGREE_MISMATCH = "DEGREE_MISMATCH"
    NOT_A_BOUNDARY = "NOT_A_BOUNDARY"
    UNSOLVABLE_OVER_RING = "UNSOLVABLE_OVER_RING"
    # geometry
    UNKNOWN_MODEL = "UNKNOWN_MODEL"
    DEGENERATE_CRITICAL_POINT = "DEGENERATE_CRITICAL_POINT"
    CENSUS_MISMATCH = "CENSUS_MISMATCH"
    # flow
    STEP_LIMIT_EXCEEDED = "STEP_LIMIT_EXCEEDED"
    LEFT_DOMAIN = "LEFT_DOMAIN"
    NONTRANSVERSE_CONNECTION = "NONTRANSVERSE_CONNECTION"
    BISECTION_FAILED = "BISECTION_FAILED"
    DUALM_VIOLATION = "DUALM_VIOLATION"
    HOMOLOGY_MISMATCH = "HOMOLOGY_MISMATCH"
    CHAIN_TOO_CLOSE_TO_CRITICAL = "CHAIN_TOO_CLOSE_TO_CRITICAL"
    NONTRANSVERSE_CROSSING = "NONTRANSVERSE_CROSSING"
    SIMULTANEOUS_CROSSING = "SIMULTANEOUS_CROSSING"
    # plchain
    NONTRANSVERSE_AFTER_JITTER = "NONTRANSVERSE_AFTER_JITTER"
    NOT_NULL_HOMOLOGOUS = "NOT_NULL_HOMOLOGOUS"
    CARRIERS_INTERSECT = "CARRIERS_INTERSECT"
    # linktheory
    UNPAIRABLE_DELTA = "UNPAIRABLE_DELTA"
    NO_LINKED_PAIR_FOUND = "NO_LINKED_PAIR_FOUND"
    INVALID_CONFIG = "INVALID_CONFIG"
    # cli
    IO_ERROR = "IO_ERROR"


# 需要以退出码 2 结束的配置类错误
USAGE_ERRORS = frozenset({ErrorCode.UNKNOWN_MODEL, ErrorCode.INVALID_CONFIG})


class MorseLinkError(Exception):
    """统一异常"""

    def __init__(self, code: ErrorCode, detail: str = ""):
        self.code = code
        self.detail = detail
        super().__init__(f"{code.value}: {detail}" if detail else code.value)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "status": "error",
            "code": self.code.value,
            "detail": self.detail,
        }

    @property
    def exit_code(self) -> int:
        return 2 if self.code in USAGE_ERRORS else 1


class NonTransverseError(MorseLinkError):
    """可通过扰动重试的横截性失败"""
