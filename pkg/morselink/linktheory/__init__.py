"""
链接理论：链接恒等式、链接矩阵、伪边界、β^geom 与圆周精确计算

使用示例：
    >>> from morselink.linktheory import circle_oracle, load_circle_config
    >>> result = circle_oracle(load_circle_config("circle.toml"))
    >>> result.beta_alg, result.beta_geom
    (2.0, 2.0)
"""

from .identities import (
    check_link_rank_bound,
    check_linking_identity,
    link_entries,
    link_matrix,
    linking_terms,
)
from .oracle import (
    CircleLayout,
    OracleResult,
    check_oracle_linking,
    circle_oracle,
    config_from_model,
    linking_identity_terms,
    load_circle_config,
    oracle_beta_equality,
    random_circle_config,
    validate_config,
)
from .pairs import LinkPair, bump_move, displace_chains, displace_pair, make_pair
from .pseudoboundary import (
    DeltaPairing,
    check_pseudoboundary,
    delta_pairing,
    pseudoboundary_from_chain,
    unstable_chain,
)
from .realization import verify_rank_realization
from .separation import GeometricSeparation, beta_geom_search, integer_lift, verify_beta_equality

__all__ = [
    "check_link_rank_bound",
    "check_linking_identity",
    "link_entries",
    "link_matrix",
    "linking_terms",
    "CircleLayout",
    "OracleResult",
    "check_oracle_linking",
    "circle_oracle",
    "config_from_model",
    "linking_identity_terms",
    "load_circle_config",
    "oracle_beta_equality",
    "random_circle_config",
    "validate_config",
    "LinkPair",
    "bump_move",
    "displace_chains",
    "displace_pair",
    "make_pair",
    "DeltaPairing",
    "check_pseudoboundary",
    "delta_pairing",
    "pseudoboundary_from_chain",
    "unstable_chain",
    "verify_rank_realization",
    "GeometricSeparation",
    "beta_geom_search",
    "integer_lift",
    "verify_beta_equality",
]
