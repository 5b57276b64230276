from typing import List, Literal, Optional

from pydantic import BaseModel, ConfigDict, Field


class MarkedPoint(BaseModel):
    """圆周上的标记点"""
    tag: Literal["max", "min", "b_plus", "b_minus", "probe"]
    value: float
    mult: int = 1
    name: Optional[str] = None

    model_config = ConfigDict(extra="forbid")


class CircleComponent(BaseModel):
    """一个圆周分支，points 按逆时针循环次序给出"""
    points: List[MarkedPoint] = Field(min_length=2)

    model_config = ConfigDict(extra="forbid")


class CircleConfig(BaseModel):
    """圆周并上的组合配置（TOML: [[components]] points = [{tag, value, mult}]）"""
    name: str = "circle"
    components: List[CircleComponent] = Field(min_length=1)

    model_config = ConfigDict(extra="forbid")
