"""
夹具：按运行配置构造 Morse 数据与采样链

采样链由记录在报告中的种子生成，同一配置重复运行得到同一组链。
"""

import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np

from ..core.errors import ErrorCode, MorseLinkError
from ..flow import MorseData, build_morse_data, check_clearance
from ..geometry import builtin_model
from ..linktheory import LinkPair, beta_geom_search, displace_pair
from ..plchain import PLChain
from .run_config import RunConfig

logger = logging.getLogger(__name__)

SAMPLE_ATTEMPTS = 32
ARC_LENGTH = 0.4
ARC_PIECES = 4


@dataclass
class Fixture:
    name: str
    md: MorseData
    seed: int

    @property
    def n(self) -> int:
        return self.md.n

    def rng(self, salt: int = 0) -> np.random.Generator:
        return np.random.default_rng([self.seed, salt])


def load_fixture(config: RunConfig) -> Fixture:
    """
    Raises:
        MorseLinkError: UNKNOWN_MODEL / 临界点与轨道搜索的各类错误
    """
    model = builtin_model(config.model.name, **config.model.params)
    md = build_morse_data(model, config.coefficient_ring)
    logger.info("夹具 %s：%d 个临界点，%d 条连接轨道", model.name, len(md.crits), len(md.all_trajectories()))
    return Fixture(name=model.name, md=md, seed=config.seed)


def _cleared(md: MorseData, chain: PLChain) -> bool:
    try:
        check_clearance(md, chain)
    except MorseLinkError as exc:
        if exc.code is not ErrorCode.CHAIN_TOO_CLOSE_TO_CRITICAL:
            raise
        return False
    return True


def sample_points(md: MorseData, rng: np.random.Generator, count: int = 3) -> PLChain:
    """count 个远离临界点的随机点，重数依次取 1、-1、2"""
    mults = [(1, -1, 2)[i % 3] for i in range(count)]
    for _ in range(SAMPLE_ATTEMPTS):
        chain = PLChain.points(md.model.kind, md.model.random_points(rng, count), mults)
        if _cleared(md, chain):
            return chain
    raise MorseLinkError(ErrorCode.CHAIN_TOO_CLOSE_TO_CRITICAL, f"{md.model.name}: 找不到远离临界点的采样点")


def sample_arc(md: MorseData, rng: np.random.Generator, length: float = ARC_LENGTH) -> PLChain:
    """从随机点沿随机切方向出发的短折线"""
    model = md.model
    for _ in range(SAMPLE_ATTEMPTS):
        x = model.random_points(rng, 1)[0]
        basis = model.tangent_basis(x)
        if model.n == 1:
            direction = basis[0]
        else:
            angle = rng.uniform(0.0, 2.0 * np.pi)
            direction = np.cos(angle) * basis[0] + np.sin(angle) * basis[1]
        vertices = [model.retract(x, t * length * direction) for t in np.linspace(0.0, 1.0, ARC_PIECES + 1)]
        chain = PLChain.polyline(model.kind, np.array(vertices))
        if _cleared(md, chain):
            return chain
    raise MorseLinkError(ErrorCode.CHAIN_TOO_CLOSE_TO_CRITICAL, f"{model.name}: 找不到远离临界点的采样折线")


def witness_pair(fixture: Fixture, k: int, ring=None) -> Optional[LinkPair]:
    """β^geom 见证的伪边界对，位移后可直接做链层面运算；不存在时返回 None"""
    search = beta_geom_search(fixture.md, k, "witness", ring, fixture.seed)
    if search.pair is None:
        return None
    return displace_pair(fixture.md, search.pair.b_plus, search.pair.b_minus, seed=fixture.seed,
                         label=f"witness k={k}")
