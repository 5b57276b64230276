"""
运行配置

合并顺序：settings 缺省值 < TOML 文件（--config）< 命令行参数。
"""

import logging
try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from pathlib import Path
from typing import Any, Dict, List, Optional

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator

from ..algebra import CoefficientRing
from ..core.config import settings
from ..core.errors import ErrorCode, MorseLinkError

logger = logging.getLogger(__name__)

SUITE_ORDER = ("identities", "dualm", "linklink", "alggeom", "main2")
SUITES = SUITE_ORDER + ("all",)
STRATEGIES = ("witness", "random")


class ModelSpec(BaseModel):
    """模型名与参数；TOML 的 [model] 表中 name 以外的键都是参数"""
    model_config = ConfigDict(extra="forbid")

    name: str = "CIRCLE-A"
    params: Dict[str, Any] = Field(default_factory=dict)


class RunConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    model: ModelSpec = Field(default_factory=ModelSpec)
    ring: str = "Z"
    degrees: Optional[List[int]] = None
    tol: float = Field(default_factory=lambda: settings.DEFAULT_TOL, ge=0.0)
    seed: int = Field(default_factory=lambda: settings.DEFAULT_SEED, ge=0)
    out: str = Field(default_factory=lambda: settings.OUTPUT_DIR)
    suites: List[str] = Field(default_factory=lambda: ["all"])
    strategy: str = "witness"
    circle: Optional[str] = None

    @field_validator("ring")
    @classmethod
    def _ring(cls, value: str) -> str:
        try:
            return CoefficientRing.parse(value).label
        except MorseLinkError as exc:
            raise ValueError(exc.detail)

    @field_validator("suites")
    @classmethod
    def _suites(cls, value: List[str]) -> List[str]:
        unknown = [s for s in value if s not in SUITES]
        if unknown:
            raise ValueError(f"未知套件 {unknown}，可选 {', '.join(SUITES)}")
        return value

    @field_validator("strategy")
    @classmethod
    def _strategy(cls, value: str) -> str:
        if value not in STRATEGIES:
            raise ValueError(f"未知策略 {value}，可选 {', '.join(STRATEGIES)}")
        return value

    @property
    def coefficient_ring(self) -> CoefficientRing:
        return CoefficientRing.parse(self.ring)

    def selected_suites(self) -> List[str]:
        if "all" in self.suites:
            return list(SUITE_ORDER)
        return [s for s in SUITE_ORDER if s in self.suites]

    def degrees_for(self, n: int) -> List[int]:
        """待测度数，缺省为 0..n-1"""
        if self.degrees is None:
            return list(range(n))
        bad = [k for k in self.degrees if not 0 <= k <= n - 1]
        if bad:
            raise MorseLinkError(ErrorCode.INVALID_CONFIG, f"度数 {bad} 超出 0..{n - 1}")
        return sorted(set(self.degrees))


def load_toml(path) -> Dict[str, Any]:
    """
    读取 TOML 配置，键名与命令行参数一致（degree、suite 可为单值或列表）

    Raises:
        MorseLinkError: IO_ERROR / INVALID_CONFIG
    """
    try:
        with open(path, "rb") as fh:
            raw = tomllib.load(fh)
    except OSError as exc:
        raise MorseLinkError(ErrorCode.IO_ERROR, f"无法读取配置 {path}: {exc}")
    except tomllib.TOMLDecodeError as exc:
        raise MorseLinkError(ErrorCode.INVALID_CONFIG, f"{path}: {exc}")

    data: Dict[str, Any] = {}
    for key, value in raw.items():
        if key == "model":
            if isinstance(value, str):
                value = {"name": value}
            table = dict(value)
            data["model"] = {"name": table.pop("name", "CIRCLE-A"), "params": table}
        elif key in ("degree", "suite"):
            data[key + "s"] = value if isinstance(value, list) else [value]
        else:
            data[key] = value
    return data


def _flag_params(pairs: Optional[List[str]]) -> Dict[str, Any]:
    params: Dict[str, Any] = {}
    for item in pairs or ():
        key, sep, text = item.partition("=")
        if not sep or not key:
            raise MorseLinkError(ErrorCode.INVALID_CONFIG, f"模型参数应为 key=value: {item}")
        try:
            value: Any = int(text)
        except ValueError:
            try:
                value = float(text)
            except ValueError:
                value = text
        params[key.strip()] = value
    return params


def build_run_config(args) -> RunConfig:
    """
    由命令行参数（argparse.Namespace）构造 RunConfig

    Raises:
        MorseLinkError: INVALID_CONFIG / IO_ERROR
    """
    data: Dict[str, Any] = load_toml(args.config) if getattr(args, "config", None) else {}

    model = dict(data.get("model") or {"name": "CIRCLE-A", "params": {}})
    if getattr(args, "model", None):
        if args.model.upper().replace("_", "-") != str(model.get("name", "")).upper().replace("_", "-"):
            model["params"] = {}
        model["name"] = args.model
    model["params"] = {**model.get("params", {}), **_flag_params(getattr(args, "param", None))}
    data["model"] = model

    overrides = {
        "ring": getattr(args, "ring", None),
        "degrees": getattr(args, "degree", None),
        "tol": getattr(args, "tol", None),
        "seed": getattr(args, "seed", None),
        "out": getattr(args, "out", None),
        "suites": getattr(args, "suite", None),
        "strategy": getattr(args, "strategy", None),
        "circle": getattr(args, "circle", None),
    }
    data.update({key: value for key, value in overrides.items() if value is not None})

    try:
        config = RunConfig.model_validate(data)
    except ValidationError as exc:
        raise MorseLinkError(ErrorCode.INVALID_CONFIG, "; ".join(
            f"{'.'.join(str(p) for p in err['loc'])}: {err['msg']}" for err in exc.errors()))
    if config.circle and not Path(config.circle).is_file():
        raise MorseLinkError(ErrorCode.IO_ERROR, f"圆周配置不存在: {config.circle}")
    logger.debug("运行配置: %s", config.model_dump())
    return config
