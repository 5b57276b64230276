"""
内置模型

CIRCLE-A、CIRCLE-RANDOM(seed, m)、TORUS-C、SPHERE-B、ROUND-SPHERE。
"""

import logging
import math
from typing import Any, Dict, List

import numpy as np
from scipy.interpolate import PchipInterpolator
from scipy.optimize import brentq

from ..core.errors import ErrorCode, MorseLinkError
from .models import CircleModel, HeightSphere, ManifoldModel, RemappedSphere, TorusModel

logger = logging.getLogger(__name__)


class BuiltinModels:
    """
    内置模型注册表

    参数表按模型名归类，build() 统一入口。
    """

    # CIRCLE-A：逆时针依次 M1(4)、m1(0)、M2(3)、m2(1)
    CIRCLE_A_VALUES = [4.0, 0.0, 3.0, 1.0]

    TORUS_C = {
        "amplitude": 0.8,
        "width2": 0.09,
        "center": (math.pi / 2, math.pi / 2),
        "census": {2: 2, 1: 3, 0: 1},
    }

    SPHERE_B = {
        "curvature": 1.0,
        "tilt": 0.3,
        # 目标临界值：极小、鞍点、次极大、极大
        "targets": (0.0, 1.0, 1.2, 2.0),
        "census": {2: 2, 1: 1, 0: 1},
    }

    CIRCLE_RANDOM = {
        "min_range": (0.0, 5.0),
        "rise_range": (0.2, 4.0),
        "digits": 6,
    }

    NAMES = ("CIRCLE-A", "CIRCLE-RANDOM", "TORUS-C", "SPHERE-B", "ROUND-SPHERE")

    @classmethod
    def normalize_name(cls, name: str) -> str:
        return name.strip().upper().replace("_", "-")

    @classmethod
    def build(cls, name: str, params: Dict[str, Any] = None) -> ManifoldModel:
        params = dict(params or {})
        key = cls.normalize_name(name)
        if key == "CIRCLE-A":
            return CircleModel("CIRCLE-A", cls.CIRCLE_A_VALUES, labels=["M1", "m1", "M2", "m2"])
        if key == "CIRCLE-RANDOM":
            return cls.circle_random(int(params.get("seed", 0)), int(params.get("m", 3)))
        if key == "TORUS-C":
            cfg = dict(cls.TORUS_C)
            cfg.update({k: v for k, v in params.items() if k in ("amplitude", "width2")})
            return TorusModel("TORUS-C", cfg["amplitude"], cfg["width2"], cfg["center"], census=cfg["census"])
        if key == "SPHERE-B":
            return cls.sphere_b()
        if key == "ROUND-SPHERE":
            return HeightSphere("ROUND-SPHERE")
        raise MorseLinkError(ErrorCode.UNKNOWN_MODEL, f"未知模型: {name}，可选 {', '.join(cls.NAMES)}")

    @classmethod
    def random_circle_values(cls, seed: int, m: int) -> List[float]:
        """交替的随机临界值：先取极小值，极大值高于两侧极小值"""
        if m < 1:
            raise MorseLinkError(ErrorCode.INVALID_CONFIG, f"极大值个数必须为正: {m}")
        cfg = cls.CIRCLE_RANDOM
        rng = np.random.default_rng(seed)
        minima = rng.uniform(*cfg["min_range"], size=m)
        rises = rng.uniform(*cfg["rise_range"], size=m)
        values = []
        for i in range(m):
            peak = max(minima[i - 1], minima[i]) + rises[i]
            values.extend([round(float(peak), cfg["digits"]), round(float(minima[i]), cfg["digits"])])
        return values

    @classmethod
    def circle_random(cls, seed: int, m: int) -> CircleModel:
        values = cls.random_circle_values(seed, m)
        return CircleModel(f"CIRCLE-RANDOM(seed={seed}, m={m})", values)

    @classmethod
    def sphere_b(cls) -> RemappedSphere:
        cfg = cls.SPHERE_B
        kappa, delta = cfg["curvature"], cfg["tilt"]

        # 临界点都在 y = 0 的大圆上：x = sin φ，z = cos φ
        def g(phi):
            return math.cos(phi) + kappa * math.sin(phi) ** 2 + delta * math.sin(phi)

        def dg(phi):
            return -math.sin(phi) + 2 * kappa * math.sin(phi) * math.cos(phi) + delta * math.cos(phi)

        grid = np.linspace(-math.pi, math.pi, 4001)
        signs = np.sign([dg(p) for p in grid])
        roots = [brentq(dg, grid[i], grid[i + 1]) for i in range(len(grid) - 1) if signs[i] * signs[i + 1] < 0]
        levels = sorted(g(r) for r in roots)
        if len(levels) != 4:
            raise MorseLinkError(ErrorCode.CENSUS_MISMATCH, f"SPHERE-B 基函数应有 4 个临界值，得到 {len(levels)}")

        targets = cfg["targets"]
        lo_slope = (targets[1] - targets[0]) / (levels[1] - levels[0])
        hi_slope = (targets[3] - targets[2]) / (levels[3] - levels[2])
        # 区间外各加一个节点，保证端点处导数为正
        knots_x = [levels[0] - 0.5] + levels + [levels[3] + 0.5]
        knots_y = [targets[0] - 0.5 * lo_slope] + list(targets) + [targets[3] + 0.5 * hi_slope]
        remap = PchipInterpolator(knots_x, knots_y, extrapolate=True)
        logger.debug("SPHERE-B 基函数临界值: %s", levels)
        return RemappedSphere("SPHERE-B", remap, kappa, delta, census=cfg["census"])


def builtin_model(name: str, **params) -> ManifoldModel:
    """
    按名称构造内置模型

    Args:
        name: CIRCLE-A / CIRCLE-RANDOM / TORUS-C / SPHERE-B / ROUND-SPHERE（大小写、下划线不敏感）
        **params: 模型参数（CIRCLE-RANDOM 需要 seed 与 m）

    Returns:
        ManifoldModel: 模型

    Raises:
        MorseLinkError: UNKNOWN_MODEL
    """
    return BuiltinModels.build(name, params)
