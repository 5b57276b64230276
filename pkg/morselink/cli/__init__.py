"""
命令行前端

使用示例：
    python run.py verify --model circle-a --suite all
    python run.py beta --model circle-random --param seed=3 --param m=5
    python run.py export --model torus-c --out reports
    python run.py oracle --circle circle.toml
"""

from .commands import COMMANDS, cmd_beta, cmd_export, cmd_oracle, cmd_verify
from .main import main
from .run_config import RunConfig, build_run_config

__all__ = [
    "COMMANDS",
    "cmd_beta",
    "cmd_export",
    "cmd_oracle",
    "cmd_verify",
    "main",
    "RunConfig",
    "build_run_config",
]
