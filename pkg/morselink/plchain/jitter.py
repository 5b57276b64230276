"""
扰动重试

检测到非横截时，把链整体平移（球面上为小角度旋转），偏移由种子确定，
最多重试 JITTER_RETRIES 次。第 k 次的幅度为 JITTER_SCALE · 直径 · JITTER_GROWTH^(k-1)，
点落在扇形顶点（例如锥的极点）附近时幅度必须超过横截容差才能离开各边。
"""

import logging
from typing import Callable, Iterator, Sequence, Tuple, TypeVar

import numpy as np
from scipy.spatial.transform import Rotation

from ..core.config import settings
from ..core.errors import ErrorCode, MorseLinkError, NonTransverseError
from ..geometry.models import ManifoldModel, ModelKind
from .chain import PLChain

logger = logging.getLogger(__name__)

T = TypeVar("T")
Move = Callable[[np.ndarray], np.ndarray]


def identity_move(x: np.ndarray) -> np.ndarray:
    return np.asarray(x, dtype=float)


def random_move(model: ManifoldModel, rng: np.random.Generator, magnitude: float) -> Move:
    """
    随机刚体小位移

    Args:
        model: 模型
        rng: 随机源
        magnitude: 平移长度（球面上为旋转角）

    Returns:
        Move: 顶点映射
    """
    direction = rng.normal(size=model.ambient)
    direction = direction / np.linalg.norm(direction)
    if model.kind is ModelKind.SPHERE:
        rotation = Rotation.from_rotvec(magnitude * direction)
        matrix = rotation.as_matrix()
        return lambda x: matrix @ np.asarray(x, dtype=float)
    offset = magnitude * direction
    return lambda x: np.asarray(x, dtype=float) + offset


def jitter_magnitude(model: ManifoldModel, attempt: int) -> float:
    return settings.JITTER_SCALE * model.diameter * settings.JITTER_GROWTH ** (attempt - 1)


def jitter_moves(model: ManifoldModel, seed: int, retries: int = None) -> Iterator[Tuple[int, Move]]:
    """第 0 次为恒等映射，其后为种子确定且逐次放大的扰动"""
    retries = settings.JITTER_RETRIES if retries is None else retries
    rng = np.random.default_rng(seed)
    yield 0, identity_move
    for attempt in range(1, retries + 1):
        yield attempt, random_move(model, rng, jitter_magnitude(model, attempt))


def run_with_jitter(
    fn: Callable[..., T],
    model: ManifoldModel,
    chains: Sequence[PLChain],
    seed: int,
    final_code: ErrorCode,
    retries: int = None,
) -> T:
    """
    以扰动重试方式调用 fn(*chains)

    Args:
        fn: 计算函数，非横截时抛 NonTransverseError
        model: 模型
        chains: 需要扰动的链（同一位移）
        seed: 扰动种子
        final_code: 重试耗尽后的错误码
        retries: 重试次数，缺省取配置

    Returns:
        fn 的结果

    Raises:
        MorseLinkError: final_code
    """
    last = None
    for attempt, move in jitter_moves(model, seed, retries):
        moved = [chain if attempt == 0 else chain.map_vertices(move) for chain in chains]
        try:
            return fn(*moved)
        except NonTransverseError as exc:
            last = exc
            logger.warning("非横截（第 %d 次尝试，seed=%d）: %s", attempt, seed, exc.detail)
    raise MorseLinkError(final_code, f"扰动 {settings.JITTER_RETRIES if retries is None else retries} 次后仍非横截: "
                                     f"{last.detail if last else ''}")
