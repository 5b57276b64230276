from typing import List

from pydantic import BaseModel, ConfigDict, Field


class CellSchema(BaseModel):
    vertices: List[List[float]]
    multiplicity: int


class ChainDocument(BaseModel):
    """PL 链 JSON 文档"""
    dim: int = Field(ge=0)
    model: str = ""
    cells: List[CellSchema] = Field(default_factory=list)

    model_config = ConfigDict(extra="forbid")
