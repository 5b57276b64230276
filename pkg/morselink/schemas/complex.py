from typing import Dict, List, Tuple

from pydantic import BaseModel, ConfigDict, Field


class GeneratorSchema(BaseModel):
    id: str
    degree: int = Field(ge=0)
    level: float


class ComplexDocument(BaseModel):
    """复形 JSON 文档；系数以十进制字符串保存"""
    dimension: int = Field(ge=0)
    ring: str
    orientation: int = 1
    generators: List[GeneratorSchema]
    boundary: Dict[str, List[Tuple[str, str, str]]] = Field(default_factory=dict)

    model_config = ConfigDict(extra="forbid")
