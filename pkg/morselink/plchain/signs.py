"""
定向符号规则

纤维积、边界、对角、乘积、稳定/不稳定流形、连接轨道空间、对偶与链接对称的符号，
均为 (-1)^{指数}。参数超出维数范围时报 INVALID_CONFIG。
"""

from typing import Callable, Dict

from ..core.errors import ErrorCode, MorseLinkError


def _power(exponent: int) -> int:
    return -1 if exponent % 2 else 1


def _check(n: int, *dims: int) -> None:
    if n < 0 or any(d < 0 or d > n for d in dims):
        raise MorseLinkError(ErrorCode.INVALID_CONFIG, f"维数参数越界: n={n}, {dims}")


def sign_commute(n: int, dim_v: int, dim_w: int) -> int:
    """V ×_M W 与 W ×_M V 的定向差"""
    _check(n, dim_v, dim_w)
    return _power((n - dim_v) * (n - dim_w))


def sign_bdry(n: int, dim_v: int) -> int:
    """∂(V ×_M W) 中 V ×_M ∂W 一项的符号"""
    _check(n, dim_v)
    return _power(n - dim_v)


def sign_diag(n: int, dim_w: int) -> int:
    """与对角 M 的纤维积"""
    _check(n, dim_w)
    return _power(n * (n - dim_w))


def sign_prod(dim_n: int, dim_v1: int, dim_m: int, dim_w0: int) -> int:
    """乘积纤维积 (V0 × V1) ×_{M×N} (W0 × W1) 的重排符号"""
    _check(dim_n, dim_v1)
    _check(dim_m, dim_w0)
    return _power((dim_n - dim_v1) * (dim_m - dim_w0))


def sign_su(n: int, index: int) -> int:
    """W^s(p) ×_M W^u(p) 与点的定向差"""
    _check(n, index)
    return _power(index * (n - index))


def sign_tm(n: int, index_p: int, index_q: int) -> int:
    """参数化轨道空间 M̃(p,q) 的符号"""
    _check(n, index_p, index_q)
    return _power((index_p + index_q) * (n - index_p))


def sign_m(n: int, index_p: int, index_q: int) -> int:
    """商去 R 作用后 M(p,q) 的符号（比 sign_tm 多一个 -1）"""
    _check(n, index_p, index_q)
    return _power(1 + (index_p + index_q) * (n - index_p))


def sign_dualm(n: int, index_q: int) -> int:
    """m_{-f}(q,p) = sign · m_f(p,q)"""
    _check(n, index_q)
    return _power(n - index_q)


def sign_linksym(n: int, k: int) -> int:
    """lk(g,f) = sign · lk(f,g)，f 为 k 维"""
    if n < 1 or k < 0 or k > n - 1:
        raise MorseLinkError(ErrorCode.INVALID_CONFIG, f"链接需要 0 ≤ k ≤ n-1: n={n}, k={k}")
    return _power((k + 1) * (n - k))


SIGN_RULES: Dict[str, Callable[..., int]] = {
    "commute": sign_commute,
    "bdry": sign_bdry,
    "diag": sign_diag,
    "prod": sign_prod,
    "su": sign_su,
    "tm": sign_tm,
    "m": sign_m,
    "dualm": sign_dualm,
    "linksym": sign_linksym,
}
