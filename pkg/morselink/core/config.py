# 使用 pydantic_settings 的 BaseSettings（Pydantic v2）
from pydantic_settings import BaseSettings


class Settings(BaseSettings):
    # 随机性与容差
    DEFAULT_SEED: int = 0
    DEFAULT_TOL: float = 1e-9

    # 临界点定位
    SEED_GRID: int = 256
    NEWTON_TOL: float = 1e-12
    NEWTON_MAX_ITER: int = 60
    DEGENERACY_EPS: float = 1e-8

    # 梯度流积分
    FLOW_RTOL: float = 1e-9
    FLOW_ATOL: float = 1e-11
    FLOW_MAX_STEP: float = 0.02
    FLOW_MAX_TIME: float = 400.0
    BALL_RADIUS: float = 0.05
    BRANCH_OFFSET: float = 1e-4

    # 打靶与二分
    SHOOTING_RAYS: int = 720
    SHOOTING_RADIUS: float = 1e-3
    SADDLE_WINDOW: float = 0.3
    REFINE_SPLITS: int = 16
    BISECTION_TOL: float = 1e-10
    DISK_RESOLUTION: int = 48
    DISK_PIECES: int = 24

    # 横截性与扰动
    TRANSVERSALITY_EPS: float = 1e-6
    JITTER_RETRIES: int = 8
    JITTER_SCALE: float = 1e-6
    # 每次重试的扰动幅度倍增
    JITTER_GROWTH: float = 3.0
    WITNESS_SHIFT: float = 2.0
    WITNESS_DIRECTIONS: int = 16
    # 二维模型上 β^geom 与 β^alg 的比较容差
    GEOM_TOL: float = 0.05

    # PL 链
    MESH_SCALE: float = 0.5
    SNAP_TOL: float = 1e-9

    # 输出
    OUTPUT_DIR: str = "reports"
    LOG_LEVEL: str = "INFO"

    # Pydantic v2 configuration
    model_config = {"env_file": ".env", "env_file_encoding": "utf-8", "env_prefix": "MORSELINK_"}


settings = Settings()
